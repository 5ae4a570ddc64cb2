"""Cluster explanations: predicates, quality measures and the Pareto filter."""
from __future__ import annotations

import heapq
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .dataset import AttributeKind, Dataset, cluster_rows
from .errors import DataError, SchemaError
from .gfim import GeneralizedItemset, max_itemset_size, mine_with_outside
from .items import CatEq, CatNeg, IntervalItem, NumericEq, item_key
from .transactions import TransactionSet

log = logging.getLogger(__name__)

CANDIDATE_CAP = 50_000
EPS = 1e-12

OPS = ("eq", "neq", "between")
_JSON_OPS = {"eq": "==", "neq": "!=", "between": "between"}
_FROM_JSON_OPS = {v: k for k, v in _JSON_OPS.items()}


@dataclass(frozen=True)
class Predicate:
    attribute: str
    op: str
    value: Any = None
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown operator {self.op!r}")
        if self.op == "between":
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise ValueError(f"'between' needs lo < hi, got {self.lo}, {self.hi}")
        elif self.value is None:
            raise ValueError(f"{self.op!r} needs a value")

    def evaluate(self, v) -> bool:
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return False
        if self.op == "between":
            return self.lo <= v <= self.hi
        if self.op == "eq":
            return v == self.value
        return v != self.value

    def mask(self, d: Dataset) -> np.ndarray:
        col = d.column(self.attribute)
        if col.kind is AttributeKind.NUMERIC:
            x = col.values
            if self.op == "between":
                return (x >= self.lo) & (x <= self.hi)
            if self.op == "neq":
                raise SchemaError(f"'!=' on numeric attribute {self.attribute!r}")
            try:
                return x == float(self.value)
            except (TypeError, ValueError):
                raise SchemaError(f"non-numeric value {self.value!r} for {self.attribute!r}") from None
        if self.op == "between":
            raise SchemaError(f"'between' on categorical attribute {self.attribute!r}")
        value = str(self.value)
        code = col.categories.index(value) if value in col.categories else -2
        if self.op == "eq":
            return col.codes == code
        return (col.codes >= 0) & (col.codes != code)

    def to_dict(self) -> dict:
        out = {"attribute": self.attribute, "op": _JSON_OPS[self.op]}
        if self.op == "between":
            out.update(lo=self.lo, hi=self.hi)
        else:
            out["value"] = self.value
        return out

    @classmethod
    def from_dict(cls, obj: Mapping) -> "Predicate":
        op = _FROM_JSON_OPS.get(obj.get("op"))
        if op is None or "attribute" not in obj:
            raise DataError(f"malformed predicate {obj!r}")
        if op == "between":
            return cls(obj["attribute"], op, lo=float(obj["lo"]), hi=float(obj["hi"]))
        return cls(obj["attribute"], op, obj["value"])

    def __str__(self):
        if self.op == "between":
            return f"{self.attribute} between {self.lo:g}–{self.hi:g}"
        value = f"{self.value:g}" if isinstance(self.value, float) else self.value
        return f"{self.attribute} {'=' if self.op == 'eq' else '!='} {value}"


@dataclass(frozen=True)
class ExplanationMetrics:
    coverage: float
    separation_error: float
    conciseness: float

    @property
    def qse(self) -> float:
        return (self.coverage + (1.0 - self.separation_error) + self.conciseness) / 3.0


@dataclass(frozen=True)
class Thresholds:
    coverage: float = 0.8
    separation: float = 0.3
    conciseness: float = 0.2

    def __post_init__(self):
        if not 0 < self.coverage <= 1:
            raise ValueError("coverage threshold must lie in (0, 1]")
        if not 0 <= self.separation <= 1:
            raise ValueError("separation threshold must lie in [0, 1]")
        if not 0 < self.conciseness <= 1:
            raise ValueError("conciseness threshold must lie in (0, 1]")

    @property
    def maxsize(self) -> int:
        return max_itemset_size(self.conciseness)


@dataclass(frozen=True)
class Explanation:
    cluster: Any
    predicates: tuple[Predicate, ...]
    metrics: ExplanationMetrics | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.predicates:
            raise ValueError("an explanation needs at least one predicate")

    def __len__(self):
        return len(self.predicates)

    def render(self) -> str:
        return " AND ".join(map(str, self.predicates))


def holds(e: Explanation, x: Mapping[str, Any]) -> bool:
    """Conjunction of ``e``'s predicates on one data point (missing -> False)."""
    for p in e.predicates:
        if p.attribute not in x:
            raise SchemaError(f"unknown attribute {p.attribute!r}")
        if not p.evaluate(x[p.attribute]):
            return False
    return True


def satisfied(e: Explanation, d: Dataset) -> np.ndarray:
    mask = np.ones(d.n_rows, dtype=bool)
    for p in e.predicates:
        mask &= p.mask(d)
    return mask


def _cluster_mask(d: Dataset, c) -> np.ndarray:
    if c not in d.cluster_ids:
        raise DataError(f"unknown cluster id {c!r}")
    return d.label_codes == d.cluster_ids.index(c)


def coverage(e: Explanation, d: Dataset) -> float:
    inside = _cluster_mask(d, e.cluster)
    n_c = int(inside.sum())
    if n_c == 0:
        raise DataError(f"cluster {e.cluster!r} is empty")
    return int((satisfied(e, d) & inside).sum()) / n_c


def separation_error(e: Explanation, d: Dataset) -> float:
    inside = _cluster_mask(d, e.cluster)
    hit = satisfied(e, d)
    total = int(hit.sum())
    if total == 0:
        raise DataError("separation error is undefined for an explanation that holds nowhere")
    return int((hit & ~inside).sum()) / total


def conciseness(e: Explanation) -> float:
    return 1.0 / len(e.predicates)


def evaluate(e: Explanation, d: Dataset) -> Explanation:
    """Copy of ``e`` with metrics computed from scratch on ``d``."""
    m = ExplanationMetrics(coverage(e, d), separation_error(e, d), conciseness(e))
    return replace(e, metrics=m)


def _predicate(item) -> Predicate:
    if isinstance(item, (NumericEq, CatEq)):
        return Predicate(item.attribute, "eq", item.value)
    if isinstance(item, CatNeg):
        return Predicate(item.attribute, "neq", item.value)
    if isinstance(item, IntervalItem):
        return Predicate(item.attribute, "between", lo=item.interval.lo, hi=item.interval.hi)
    raise ValueError(f"{item!r} has no predicate form")


def itemset_to_explanation(itemset, c) -> Explanation:
    items = itemset.items if isinstance(itemset, GeneralizedItemset) else tuple(itemset)
    return Explanation(c, tuple(_predicate(i) for i in sorted(items, key=item_key)))


def dominates(a: ExplanationMetrics, b: ExplanationMetrics) -> bool:
    no_worse = (a.coverage >= b.coverage and a.separation_error <= b.separation_error
                and a.conciseness >= b.conciseness)
    better = (a.coverage > b.coverage or a.separation_error < b.separation_error
              or a.conciseness > b.conciseness)
    return no_worse and better


def _dominates_t(a, b) -> bool:
    # a, b: (coverage, separation_error, conciseness)
    return (a[0] >= b[0] and a[1] <= b[1] and a[2] >= b[2]
            and (a[0] > b[0] or a[1] < b[1] or a[2] > b[2]))


def skyline_indices(points: Sequence[tuple[float, float, float]]) -> list[int]:
    """Indices (ascending) of the (coverage, separation, conciseness) points
    that no other point strictly dominates; exact ties all survive.

    Sort-filter-skyline: after sorting by (conciseness desc, coverage desc,
    separation asc) no point can be dominated by a later one, so each is
    compared against the survivors so far only.
    """
    order = sorted(range(len(points)), key=lambda i: (-points[i][2], -points[i][0], points[i][1]))
    kept: list[int] = []
    for i in order:
        p = points[i]
        if not any(_dominates_t(points[k], p) for k in kept):
            kept.append(i)
    return sorted(kept)


def _triple(m: ExplanationMetrics):
    return (m.coverage, m.separation_error, m.conciseness)


def skyline(candidates: Sequence[Explanation]) -> list[Explanation]:
    """Candidates not strictly dominated by another candidate."""
    return [candidates[i] for i in skyline_indices([_triple(e.metrics) for e in candidates])]


def qse(e: Explanation) -> float:
    return e.metrics.qse


def qse_aggregate(ex_all: Mapping[Any, Sequence[Explanation]]) -> float:
    """Mean over clusters of the best explanation's QSE (0 for clusters without one)."""
    if not ex_all:
        return 0.0
    return sum(max((qse(e) for e in exps), default=0.0) for exps in ex_all.values()) / len(ex_all)


def sort_explanations(exps: Iterable[Explanation]) -> list[Explanation]:
    def key(e):
        m = e.metrics
        return (len(e), -m.coverage, m.separation_error,
                [(p.attribute, p.op, str(p.value), p.lo or 0.0, p.hi or 0.0) for p in e.predicates])
    return sorted(exps, key=key)


@dataclass
class ClusterReport:
    cluster: Any
    explanations: list[Explanation]
    n_rows: int = 0
    candidates: int = 0
    capped: bool = False
    mine_ms: float = 0.0
    skyline_ms: float = 0.0
    warning: str | None = None


def explain_cluster(d: Dataset, taxonomy, transactions: TransactionSet, th: Thresholds, c,
                    attrs: Iterable[str] | None = None, cap: int = CANDIDATE_CAP) -> ClusterReport:
    inside = cluster_rows(d, c)
    if inside.size == 0:
        return ClusterReport(c, [], warning=f"cluster {c!r} has no rows; skipped")
    ts = transactions if attrs is None else transactions.restrict(attrs)
    ts_c = ts.select(inside)
    outside = np.setdiff1d(np.arange(d.n_rows), inside, assume_unique=True)
    n_c = inside.size

    heap: list = []
    seen = 0

    def emit(items, in_count, out_count):
        nonlocal seen
        sep = out_count / (in_count + out_count)
        if sep > th.separation:
            return
        seen += 1
        m = (in_count / n_c, sep, 1.0 / len(items))
        entry = ((m[0] + 1.0 - m[1] + m[2]) / 3.0, [item_key(i) for i in items][::-1], items, m)
        if len(heap) < cap:
            heapq.heappush(heap, entry)
        elif entry[:2] > heap[0][:2]:
            heapq.heapreplace(heap, entry)

    t0 = time.perf_counter()
    mine_with_outside(ts_c, outside, taxonomy, th.coverage, th.maxsize, emit)
    t1 = time.perf_counter()
    if seen > cap:
        log.warning("cluster %r: %d candidates, keeping the top %d by QSE", c, seen, cap)
    points = [entry[3] for entry in heap]
    result = []
    for k in skyline_indices(points):
        _, _, items, m = heap[k]
        result.append(Explanation(c, itemset_to_explanation(items, c).predicates, ExplanationMetrics(*m)))
    result = sort_explanations(result)
    t2 = time.perf_counter()
    return ClusterReport(c, result, n_c, seen, seen > cap, (t1 - t0) * 1e3, (t2 - t1) * 1e3)


def explain_clusters(d: Dataset, taxonomy, transactions: TransactionSet, th: Thresholds,
                     attrs: Iterable[str] | None = None, threads: int = 1,
                     cap: int = CANDIDATE_CAP) -> list[ClusterReport]:
    attrs = None if attrs is None else list(attrs)

    def one(c):
        return explain_cluster(d, taxonomy, transactions, th, c, attrs, cap)

    if threads > 1 and len(d.cluster_ids) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(one, d.cluster_ids))
    else:
        reports = [one(c) for c in d.cluster_ids]
    for r in reports:
        if r.warning:
            log.warning(r.warning)
    return reports


def explain_all(d: Dataset, taxonomy, transactions: TransactionSet, th: Thresholds,
                attrs: Iterable[str] | None = None, threads: int = 1) -> dict[Any, list[Explanation]]:
    """Cluster id -> Pareto-optimal explanations meeting all three thresholds."""
    reports = explain_clusters(d, taxonomy, transactions, th, attrs, threads)
    return {r.cluster: r.explanations for r in reports if r.warning is None}
