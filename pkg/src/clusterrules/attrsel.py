"""Attribute ranking by per-cluster decision-tree Gini importance.

One binary tree per cluster (member vs. rest), importances normalised per
tree and averaged with equal weight per cluster.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dataset import AttributeKind, Dataset
from .explain import Thresholds
from .gfim import SUPPORT_EPS


@dataclass
class Split:
    attribute: str
    kind: AttributeKind
    threshold: float | None = None      # numeric: value <= threshold goes left
    category: str | None = None         # categorical: value == category goes left
    missing_left: bool = True


@dataclass
class Node:
    depth: int
    n: int
    n_pos: int
    split: Split | None = None
    decrease: float = 0.0               # parent Gini minus weighted child Gini
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def gini(self) -> float:
        if self.n == 0:
            return 0.0
        p = self.n_pos / self.n
        return 2.0 * p * (1.0 - p)

    @property
    def is_leaf(self) -> bool:
        return self.split is None


@dataclass
class DecisionTree:
    root: Node
    max_depth: int
    n_rows: int

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.extend((node.right, node.left))

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes())


@dataclass
class AttributeScores:
    per_cluster: dict[Any, dict[str, float]]
    scores: dict[str, float]
    selected: list[str] = field(default_factory=list)


def _gini_sum(n, pos):
    """n * Gini for binary counts; zero where n == 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        g = 2.0 * pos * (n - pos) / n
    return np.where(n > 0, g, 0.0)


class _Splitter:
    """Best-split search shared by every node of one tree."""

    def __init__(self, d: Dataset, y: np.ndarray):
        self.d = d
        self.y = y.astype(np.int64)
        self.attrs = d.attributes
        self.order = {}
        for a in self.attrs:
            col = d.column(a)
            if col.kind is AttributeKind.NUMERIC:
                x = col.values
                present = np.flatnonzero(~np.isnan(x))
                self.order[a] = present[np.argsort(x[present], kind="stable")]

    def best(self, rows_mask: np.ndarray, n: int, n_pos: int):
        """(weighted child impurity, split) minimising child Gini; ties go to the
        earlier attribute, then the smaller threshold."""
        best_score, best_split = math.inf, None
        for a in self.attrs:
            col = self.d.column(a)
            if col.kind is AttributeKind.NUMERIC:
                cand = self._numeric(a, col.values, rows_mask, n, n_pos)
            else:
                cand = self._categorical(a, col, rows_mask, n, n_pos)
            if cand is not None and cand[0] < best_score:
                best_score, best_split = cand
        return best_score, best_split

    @staticmethod
    def _with_missing(nl, pl, nr, pr, nm, pm):
        left = nl >= nr
        nl2 = nl + np.where(left, nm, 0)
        pl2 = pl + np.where(left, pm, 0)
        nr2 = nr + np.where(left, 0, nm)
        pr2 = pr + np.where(left, 0, pm)
        return _gini_sum(nl2, pl2) + _gini_sum(nr2, pr2), left

    def _numeric(self, a, x, rows_mask, n, n_pos):
        idx = self.order[a]
        idx = idx[rows_mask[idx]]
        if idx.size < 2:
            return None
        xs = x[idx]
        ys = self.y[idx]
        boundary = np.flatnonzero(xs[:-1] < xs[1:])
        if boundary.size == 0:
            return None
        cpos = np.cumsum(ys)
        nl = (boundary + 1).astype(np.float64)
        pl = cpos[boundary].astype(np.float64)
        nr = idx.size - nl
        pr = cpos[-1] - pl
        nm = n - idx.size
        pm = n_pos - cpos[-1]
        score, left = self._with_missing(nl, pl, nr, pr, nm, pm)
        k = int(np.argmin(score))
        thr = float((xs[boundary[k]] + xs[boundary[k] + 1]) / 2)
        return float(score[k]), Split(a, AttributeKind.NUMERIC, threshold=thr, missing_left=bool(left[k]))

    def _categorical(self, a, col, rows_mask, n, n_pos):
        codes = col.codes[rows_mask]
        ys = self.y[rows_mask]
        present = codes >= 0
        n_cat = len(col.categories)
        cnt = np.bincount(codes[present], minlength=n_cat).astype(np.float64)
        pos = np.bincount(codes[present], weights=ys[present], minlength=n_cat)
        usable = np.flatnonzero((cnt > 0) & (cnt < present.sum()))
        if usable.size == 0:
            return None
        nl, pl = cnt[usable], pos[usable]
        nr, pr = present.sum() - nl, pos.sum() - pl
        score, left = self._with_missing(nl, pl, nr, pr, n - present.sum(), n_pos - pos.sum())
        k = int(np.argmin(score))
        return float(score[k]), Split(a, AttributeKind.CATEGORICAL,
                                      category=col.categories[usable[k]], missing_left=bool(left[k]))

    def route_left(self, split: Split) -> np.ndarray:
        col = self.d.column(split.attribute)
        if split.kind is AttributeKind.NUMERIC:
            x = col.values
            return np.where(np.isnan(x), split.missing_left, x <= split.threshold)
        code = col.categories.index(split.category)
        return np.where(col.codes < 0, split.missing_left, col.codes == code)


def fit_binary_tree(d: Dataset, c, max_depth: int, min_samples_split: int = 2) -> DecisionTree:
    """Greedy CART predicting membership of cluster ``c``."""
    if c not in d.cluster_ids:
        raise ValueError(f"unknown cluster id {c!r}")
    y = d.label_codes == d.cluster_ids.index(c)
    if not y.any():
        raise ValueError(f"cluster {c!r} is empty")
    splitter = _Splitter(d, y)

    def grow(mask, depth):
        n = int(mask.sum())
        n_pos = int(y[mask].sum())
        node = Node(depth, n, n_pos)
        if depth >= max_depth or n < min_samples_split or n_pos in (0, n):
            return node
        score, split = splitter.best(mask, n, n_pos)
        if split is None:
            return node
        decrease = node.gini - score / n
        if decrease <= 1e-12:
            return node
        left = splitter.route_left(split)
        node.split, node.decrease = split, decrease
        node.left = grow(mask & left, depth + 1)
        node.right = grow(mask & ~left, depth + 1)
        return node

    root = grow(np.ones(d.n_rows, dtype=bool), 0)
    return DecisionTree(root, max_depth, d.n_rows)


def gini_importance(tree: DecisionTree) -> dict[str, float]:
    """Per attribute: sum of (node weight * impurity decrease), normalised to 1."""
    raw: dict[str, float] = {}
    for node in tree.nodes():
        if not node.is_leaf:
            w = node.n / tree.n_rows
            raw[node.split.attribute] = raw.get(node.split.attribute, 0.0) + w * node.decrease
    total = sum(raw.values())
    if total <= 0:
        return {}
    return {a: v / total for a, v in raw.items()}


def n_selected(th: Thresholds, p: float) -> int:
    return int(math.floor((1.0 / th.conciseness) * p + SUPPORT_EPS))


def score_attributes(d: Dataset, th: Thresholds, p: float = 1.0, threads: int = 1) -> AttributeScores:
    if p <= 0:
        raise ValueError("p must be positive")
    depth = th.maxsize

    def one(c):
        return c, gini_importance(fit_binary_tree(d, c, depth))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_cluster = dict(pool.map(one, d.cluster_ids))
    else:
        per_cluster = dict(one(c) for c in d.cluster_ids)
    attrs = d.attributes
    k = len(d.cluster_ids)
    scores = {a: sum(g.get(a, 0.0) for g in per_cluster.values()) / k for a in attrs}
    n_attr = n_selected(th, p)
    if n_attr >= len(attrs):
        selected = list(attrs)
    else:
        ranked = sorted(range(len(attrs)), key=lambda i: (-scores[attrs[i]], i))
        selected = [attrs[i] for i in sorted(ranked[:n_attr])]
    return AttributeScores(per_cluster, scores, selected)


def select_attributes(d: Dataset, th: Thresholds, p: float = 1.0, threads: int = 1) -> list[str]:
    """Top ``floor(p / theta_con)`` attributes by averaged importance, in column order."""
    return score_attributes(d, th, p, threads).selected
