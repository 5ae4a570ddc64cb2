"""Containment DAG over each numeric attribute's intervals, merged under ALL.

Edges run parent -> child where the parent strictly contains the child and
no third interval sits between them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .binning import Interval, dedupe
from .items import IntervalItem, NumericEq

ALL = "ALL"


def precedes(b: Interval, b2: Interval) -> bool:
    """Strict containment: ``b`` contains ``b2`` and they differ."""
    return (b.lo != b2.lo or b.hi != b2.hi) and b.lo <= b2.lo and b.hi >= b2.hi


@dataclass(frozen=True)
class AttributeTaxonomy:
    attribute: str
    intervals: tuple[Interval, ...]
    edges: frozenset[tuple[Interval, Interval]]
    roots: tuple[Interval, ...]

    def children(self, b: Interval) -> list[Interval]:
        return sorted(c for p, c in self.edges if p == b)

    @property
    def root(self) -> Interval | None:
        return self.roots[0] if len(self.roots) == 1 else None


def build_attribute_taxonomy(attribute: str, intervals: Iterable[Interval]) -> AttributeTaxonomy:
    nodes = dedupe(intervals)
    above = {b: [a for a in nodes if precedes(a, b)] for b in nodes}
    edges = set()
    for child, parents in above.items():
        for p in parents:
            if not any(precedes(p, mid) for mid in parents if mid != p):
                edges.add((p, child))
    roots = tuple(b for b in nodes if not above[b])
    return AttributeTaxonomy(attribute, tuple(nodes), frozenset(edges), roots)


class Taxonomy:
    """All attribute sub-DAGs joined by an artificial ALL root.

    Node ids: 0 is ALL; intervals are numbered in attribute order, then by
    ``(lo, hi)``.
    """

    def __init__(self, parts: Iterable[AttributeTaxonomy] = ()):
        self._parts: dict[str, AttributeTaxonomy] = {}
        for part in parts:
            if part.attribute in self._parts:
                raise ValueError(f"duplicate attribute {part.attribute!r} in taxonomy")
            self._parts[part.attribute] = part
        self.nodes: dict[int, object] = {0: ALL}
        self._ids: dict[tuple[str, Interval], int] = {}
        for attr, part in self._parts.items():
            for iv in part.intervals:
                nid = len(self.nodes)
                self.nodes[nid] = (attr, iv)
                self._ids[(attr, iv)] = nid
        edges = []
        self.attr_index: dict[str, tuple[int, ...]] = {}
        for attr, part in self._parts.items():
            root_ids = tuple(self._ids[(attr, r)] for r in part.roots)
            self.attr_index[attr] = root_ids
            edges.extend((0, r) for r in root_ids)
            edges.extend(sorted((self._ids[(attr, p)], self._ids[(attr, c)]) for p, c in part.edges))
        self.edges: tuple[tuple[int, int], ...] = tuple(edges)

    @property
    def attributes(self) -> list[str]:
        return list(self._parts)

    def __contains__(self, attribute: str) -> bool:
        return attribute in self._parts

    def part(self, attribute: str) -> AttributeTaxonomy:
        return self._parts[attribute]

    def intervals(self, attribute: str) -> tuple[Interval, ...]:
        part = self._parts.get(attribute)
        return part.intervals if part else ()

    def node_id(self, attribute: str, interval: Interval) -> int:
        return self._ids[(attribute, interval)]

    def generalizations(self, item) -> frozenset:
        """Interval items strictly above ``item`` (ALL excluded)."""
        if isinstance(item, NumericEq):
            return frozenset(IntervalItem(item.attribute, iv) for iv in ancestors(item.attribute, item.value, self))
        if isinstance(item, IntervalItem):
            return frozenset(IntervalItem(item.attribute, iv)
                             for iv in self.intervals(item.attribute) if precedes(iv, item.interval))
        return frozenset()

    def generalized_items(self, raw_items: Iterable) -> list[IntervalItem]:
        """Every interval item of the numeric attributes present in ``raw_items``."""
        attrs = sorted({i.attribute for i in raw_items if isinstance(i, NumericEq)})
        return [IntervalItem(a, iv) for a in attrs for iv in self.intervals(a)]

    def restrict(self, attributes: Iterable[str]) -> "Taxonomy":
        keep = set(attributes)
        return Taxonomy(p for a, p in self._parts.items() if a in keep)

    def to_dot(self) -> str:
        lines = ["digraph taxonomy {", '  n0 [label="ALL"];']
        for nid, payload in self.nodes.items():
            if nid:
                attr, iv = payload
                lines.append(f'  n{nid} [label="{attr} {iv}"];')
        lines.extend(f"  n{p} -> n{c};" for p, c in self.edges)
        lines.append("}")
        return "\n".join(lines) + "\n"


def merge_taxonomies(parts: Iterable[AttributeTaxonomy]) -> Taxonomy:
    return Taxonomy(parts)


def build_taxonomy(intervals_by_attribute: Mapping[str, Iterable[Interval]]) -> Taxonomy:
    parts = [build_attribute_taxonomy(a, ivs) for a, ivs in intervals_by_attribute.items()]
    return merge_taxonomies(p for p in parts if p.intervals)


def ancestors(attribute: str, value: float, taxonomy: Taxonomy) -> set[Interval]:
    """Every interval of ``attribute`` containing ``value`` (ALL excluded)."""
    return {iv for iv in taxonomy.intervals(attribute) if iv.contains(value)}
