"""Per-row augmented transactions.

Storage is columnar: a ``TransactionSet`` keeps the dataset's columns plus
the negation-eligible categories per attribute, and builds ``Transaction``
objects only on access. The miner reads the columns directly.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .dataset import AttributeKind, Dataset, cluster_rows
from .items import CatEq, CatNeg, Item, NumericEq

DEFAULT_NEG_CAP = 20


@dataclass(frozen=True)
class Transaction:
    row_index: int
    items: frozenset
    cluster: Any


def negation_values(column, cap: int = DEFAULT_NEG_CAP) -> np.ndarray:
    """Category codes eligible for negation items.

    Every category when there are at most ``cap`` of them, otherwise the
    ``cap`` most frequent (ties by category order).
    """
    n_cat = len(column.categories)
    if n_cat <= cap:
        return np.arange(n_cat)
    counts = np.bincount(column.codes[column.codes >= 0], minlength=n_cat)
    order = np.lexsort((np.arange(n_cat), -counts))
    return np.sort(order[:cap])


class TransactionSet(Sequence):
    """Augmented transactions for a subset of a dataset's rows."""

    def __init__(self, dataset: Dataset, neg_cap: int = DEFAULT_NEG_CAP,
                 attributes: Iterable[str] | None = None, rows: np.ndarray | None = None,
                 _negations: dict | None = None):
        if neg_cap < 0:
            raise ValueError("neg_cap must be non-negative")
        self.dataset = dataset
        self.neg_cap = neg_cap
        self.attributes = list(dataset.attributes if attributes is None else attributes)
        for a in self.attributes:
            dataset.column(a)
        self.rows = np.arange(dataset.n_rows) if rows is None else np.asarray(rows, dtype=np.int64)
        if _negations is None:
            _negations = {
                a: negation_values(dataset.column(a), neg_cap)
                for a in self.attributes if dataset.kind(a) is AttributeKind.CATEGORICAL
            }
        self.negations = _negations

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return self.select(self.rows[i], positions=False)
        return self._materialize(int(self.rows[i]))

    def select(self, rows, positions: bool = False) -> "TransactionSet":
        """Transactions of the given dataset rows (or positions within this set)."""
        rows = self.rows[rows] if positions else np.asarray(rows, dtype=np.int64)
        return TransactionSet(self.dataset, self.neg_cap, self.attributes, rows, self.negations)

    def restrict(self, attributes: Iterable[str]) -> "TransactionSet":
        attributes = [a for a in self.attributes if a in set(attributes)]
        negs = {a: v for a, v in self.negations.items() if a in attributes}
        return TransactionSet(self.dataset, self.neg_cap, attributes, self.rows, negs)

    @property
    def labels(self) -> np.ndarray:
        return self.dataset.labels[self.rows]

    def _materialize(self, r: int) -> Transaction:
        items: list[Item] = []
        for a in self.attributes:
            col = self.dataset.column(a)
            if col.kind is AttributeKind.NUMERIC:
                v = col.values[r]
                if not np.isnan(v):
                    items.append(NumericEq(a, float(v)))
            else:
                code = col.codes[r]
                if code < 0:
                    continue
                items.append(CatEq(a, col.categories[code]))
                items.extend(CatNeg(a, col.categories[e]) for e in self.negations[a] if e != code)
        return Transaction(r, frozenset(items), self.dataset.labels[r])


def augment_dataset(d: Dataset, neg_cap: int = DEFAULT_NEG_CAP,
                    attributes: Iterable[str] | None = None) -> TransactionSet:
    return TransactionSet(d, neg_cap, attributes)


def cluster_transactions(transactions: TransactionSet, c: Any) -> TransactionSet:
    rows = cluster_rows(transactions.dataset, c)
    return transactions.select(np.intersect1d(transactions.rows, rows))
