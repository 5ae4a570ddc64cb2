"""Transaction atoms. Each maps to one explanation predicate."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .binning import Interval


@dataclass(frozen=True)
class NumericEq:
    attribute: str
    value: float

    def __str__(self):
        return f"{self.attribute}={self.value:g}"


@dataclass(frozen=True)
class CatEq:
    attribute: str
    value: str

    def __str__(self):
        return f"{self.attribute}={self.value}"


@dataclass(frozen=True)
class CatNeg:
    attribute: str
    value: str

    def __str__(self):
        return f"{self.attribute}!={self.value}"


@dataclass(frozen=True)
class IntervalItem:
    attribute: str
    interval: Interval

    def __str__(self):
        return f"{self.attribute} in {self.interval}"


@dataclass(frozen=True)
class Category:
    """Named node of a general item taxonomy; carries no attribute."""
    name: str

    attribute = None

    def __str__(self):
        return self.name


Item = Union[NumericEq, CatEq, CatNeg, IntervalItem, Category]

_RANK = {NumericEq: 0, IntervalItem: 1, CatEq: 2, CatNeg: 3}


def item_key(item: Item) -> tuple:
    """Total order over items: attribute, then kind, then value(s)."""
    if isinstance(item, Category):
        return (1, item.name)
    if isinstance(item, IntervalItem):
        return (0, item.attribute, 1, item.interval.lo, item.interval.hi)
    return (0, item.attribute, _RANK[type(item)], item.value, item.value)


def conflicts(x: Item, y: Item) -> bool:
    """Attribute rule: one value-constraint per numeric attribute, one
    equality per categorical attribute, equality excludes negation; any
    number of negations may share an attribute."""
    if x.attribute is None or x.attribute != y.attribute:
        return False
    return not (isinstance(x, CatNeg) and isinstance(y, CatNeg))
