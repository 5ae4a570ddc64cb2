"""Candidate intervals for numeric attributes.

Each method maps a numeric column to closed intervals ``[lo, hi]`` with
``lo < hi``. Degenerate single-point groups are dropped: equality on the
raw value already covers that case.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class BinningError(ValueError):
    pass


class BinningMethod(str, enum.Enum):
    EQUAL_WIDTH = "equal-width"
    EQUAL_FREQUENCY = "equal-frequency"
    KMEANS_1D = "kmeans-1d"
    TREE_BASED = "tree"


ALL_METHODS = tuple(BinningMethod)


def _sig9(x: float) -> float:
    return float(f"{x:.9g}")


@dataclass(frozen=True, order=True)
class Interval:
    lo: float
    hi: float
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BinningError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    @property
    def key(self) -> tuple[float, float]:
        """Endpoints rounded to 9 significant digits; used for deduplication."""
        return _sig9(self.lo), _sig9(self.hi)

    def __str__(self) -> str:
        return f"[{self.lo:g}, {self.hi:g}]"


@dataclass(frozen=True)
class BinningConfig:
    methods: tuple[BinningMethod, ...] = ALL_METHODS
    bins_per_method: int = 5
    tree_max_leaves: int = 8

    def __post_init__(self):
        methods = tuple(BinningMethod(m) for m in self.methods)
        object.__setattr__(self, "methods", methods)
        if not methods:
            raise ValueError("at least one binning method is required")
        if self.bins_per_method < 2:
            raise ValueError("bins_per_method must be >= 2")
        if self.tree_max_leaves < 1:
            raise ValueError("tree_max_leaves must be positive")


def _clean(values) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    return x[~np.isnan(x)]


def _checked(values) -> np.ndarray:
    x = _clean(values)
    if x.size == 0:
        raise BinningError("all values are missing")
    if x.min() == x.max():
        raise BinningError("all values are identical")
    return x


def _from_edges(edges: Sequence[float], source: str) -> list[Interval]:
    edges = np.unique(np.asarray(edges, dtype=np.float64))
    return [Interval(float(a), float(b), source) for a, b in zip(edges[:-1], edges[1:])]


def bin_equal_width(values, k: int) -> list[Interval]:
    x = _checked(values)
    lo, hi = float(x.min()), float(x.max())
    edges = np.linspace(lo, hi, k + 1)
    edges[0], edges[-1] = lo, hi
    return _from_edges(edges, BinningMethod.EQUAL_WIDTH.value)


def equal_frequency_edges(values, k: int) -> np.ndarray:
    """Min, the j/k inverse-CDF quantiles (j = 1..k-1) and max.

    The j/k quantile is the smallest observed value v with
    ``#{x <= v} >= n*j/k``.
    """
    xs = np.sort(_checked(values))
    n = xs.size
    idx = [(n * j + k - 1) // k - 1 for j in range(1, k)]
    return np.concatenate(([xs[0]], xs[idx], [xs[-1]]))


def bin_equal_frequency(values, k: int) -> list[Interval]:
    return _from_edges(equal_frequency_edges(values, k), BinningMethod.EQUAL_FREQUENCY.value)


def _segment_cost(cw, cwx, cwx2, j, i):
    """Weighted SSE of sorted distinct values j..i (inclusive)."""
    sw = cw[i + 1] - cw[j]
    sx = cwx[i + 1] - cwx[j]
    sx2 = cwx2[i + 1] - cwx2[j]
    return np.maximum(sx2 - sx * sx / sw, 0.0)


def kmeans_1d_groups(values, k: int) -> list[tuple[float, float]]:
    """Optimal contiguous k-partition of the sorted values (min within-group SSE).

    Returns ``(min, max)`` per group in ascending order. Exact dynamic
    programme over distinct values weighted by multiplicity; each DP row is
    filled by divide and conquer on the monotone optimal split point, one
    recursion level at a time.
    """
    x = _clean(values)
    if x.size == 0:
        raise BinningError("all values are missing")
    u, w = np.unique(x, return_counts=True)
    n = u.size
    if k < 1:
        raise BinningError("k must be positive")
    if k > n:
        raise BinningError(f"k={k} exceeds the {n} distinct values")
    w = w.astype(np.float64)
    z = u - np.average(u, weights=w)
    cw = np.concatenate(([0.0], np.cumsum(w)))
    cwx = np.concatenate(([0.0], np.cumsum(w * z)))
    cwx2 = np.concatenate(([0.0], np.cumsum(w * z * z)))

    idx = np.arange(n)
    prev = _segment_cost(cw, cwx, cwx2, np.zeros(n, dtype=np.int64), idx)
    argmins = [np.zeros(n, dtype=np.int64)]
    for m in range(2, k + 1):
        cur = np.full(n, np.inf)
        opt = np.zeros(n, dtype=np.int64)
        # task = (lo, hi, optlo, opthi) over end index i; start j of last group
        lo = np.array([m - 1]); hi = np.array([n - 1])
        olo = np.array([m - 1]); ohi = np.array([n - 1])
        while lo.size:
            mid = (lo + hi) // 2
            top = np.minimum(mid, ohi)
            lengths = top - olo + 1
            offsets = np.concatenate(([0], np.cumsum(lengths)[:-1]))
            task = np.repeat(np.arange(mid.size), lengths)
            j = olo[task] + (np.arange(task.size) - offsets[task])
            vals = prev[j - 1] + _segment_cost(cw, cwx, cwx2, j, mid[task])
            best = np.minimum.reduceat(vals, offsets)
            hit = np.flatnonzero(vals <= best[task])
            first = hit[np.unique(task[hit], return_index=True)[1]]
            bj = j[first]
            cur[mid] = best
            opt[mid] = bj
            left = lo <= mid - 1
            right = mid + 1 <= hi
            lo, hi, olo, ohi = (
                np.concatenate((lo[left], mid[right] + 1)),
                np.concatenate((mid[left] - 1, hi[right])),
                np.concatenate((olo[left], bj[right])),
                np.concatenate((bj[left], ohi[right])),
            )
        prev = cur
        argmins.append(opt)

    groups = []
    i = n - 1
    for m in range(k, 0, -1):
        j = int(argmins[m - 1][i])
        groups.append((float(u[j]), float(u[i])))
        i = j - 1
    return groups[::-1]


def bin_kmeans_1d(values, k: int) -> list[Interval]:
    _checked(values)
    src = BinningMethod.KMEANS_1D.value
    return [Interval(a, b, src) for a, b in kmeans_1d_groups(values, k) if a < b]


def _best_split(cum: np.ndarray, xs: np.ndarray, s: int, e: int):
    """Best Gini split of sorted rows s..e-1: (gain, split position p) with
    left = s..p; gain is the drop in node-size-weighted Gini impurity."""
    counts = cum[s + 1:e] - cum[s]            # left counts for p = s..e-2
    total = cum[e] - cum[s]
    valid = xs[s:e - 1] < xs[s + 1:e]
    if not valid.any():
        return 0.0, -1
    n_left = np.arange(1, e - s, dtype=np.float64)
    n_right = (e - s) - n_left
    right = total - counts
    score = (counts ** 2).sum(axis=1) / n_left + (right ** 2).sum(axis=1) / n_right
    score[~valid] = -np.inf
    p = int(np.argmax(score))
    gain = float(score[p] - (total ** 2).sum() / (e - s))
    return gain, s + p


def tree_split_points(values, labels, max_leaves: int) -> list[float]:
    """Thresholds of a single-feature Gini tree grown best-first."""
    return _grow_tree(values, labels, max_leaves)[1]


def _grow_tree(values, labels, max_leaves):
    x = np.asarray(values, dtype=np.float64)
    y = np.asarray(labels)
    if x.shape != y.shape:
        raise BinningError("values and labels differ in length")
    keep = ~np.isnan(x)
    x, y = x[keep], y[keep]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    _, codes = np.unique(y[order], return_inverse=True)
    onehot = np.zeros((xs.size, codes.max() + 1 if codes.size else 1))
    onehot[np.arange(xs.size), codes] = 1.0
    cum = np.vstack((np.zeros((1, onehot.shape[1])), np.cumsum(onehot, axis=0)))

    leaves = [(0, xs.size)]
    thresholds = []
    cache = {}
    while len(leaves) < max_leaves:
        best = None
        for pos, (s, e) in enumerate(leaves):
            if (s, e) not in cache:
                cache[(s, e)] = _best_split(cum, xs, s, e)
            gain, p = cache[(s, e)]
            if p >= 0 and gain > 1e-12 * (e - s) and (best is None or gain > best[0]):
                best = (gain, pos, p)
        if best is None:
            break
        _, pos, p = best
        s, e = leaves[pos]
        leaves[pos:pos + 1] = [(s, p + 1), (p + 1, e)]
        thresholds.append(float((xs[p] + xs[p + 1]) / 2))
    return [(float(xs[s]), float(xs[e - 1])) for s, e in leaves], sorted(thresholds)


def bin_tree_based(values, labels, max_leaves: int) -> list[Interval]:
    _checked(values)
    ranges, _ = _grow_tree(values, labels, max_leaves)
    src = BinningMethod.TREE_BASED.value
    return [Interval(a, b, src) for a, b in ranges if a < b]


def _run(method: BinningMethod, values, labels, cfg: BinningConfig) -> list[Interval]:
    if method is BinningMethod.EQUAL_WIDTH:
        return bin_equal_width(values, cfg.bins_per_method)
    if method is BinningMethod.EQUAL_FREQUENCY:
        return bin_equal_frequency(values, cfg.bins_per_method)
    if method is BinningMethod.KMEANS_1D:
        return bin_kmeans_1d(values, cfg.bins_per_method)
    return bin_tree_based(values, labels, cfg.tree_max_leaves)


def dedupe(intervals: Iterable[Interval]) -> list[Interval]:
    """First occurrence per rounded key, sorted by (lo, hi)."""
    seen = {}
    for iv in intervals:
        seen.setdefault(iv.key, iv)
    return sorted(seen.values())


def bin_attribute(values, labels, cfg: BinningConfig = BinningConfig()) -> list[Interval]:
    """Union of all configured methods' intervals plus the spanning interval."""
    found = []
    for method in cfg.methods:
        try:
            found.extend(_run(method, values, labels, cfg))
        except BinningError:
            continue
    if not found:
        return []
    lo = min(iv.lo for iv in found)
    hi = max(iv.hi for iv in found)
    found.append(Interval(lo, hi, "span"))
    return dedupe(found)
