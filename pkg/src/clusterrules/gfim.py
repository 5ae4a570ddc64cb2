"""Generalized frequent itemset mining.

Itemsets may hold raw items or any of their taxonomy generalizations.
Two structural rules hold for every itemset: the per-attribute rule of
``items.conflicts`` and "no item together with one of its ancestors". Both
are pairwise, so the search only checks each new item against the last
one added; everything in a node's tail is already compatible with the
prefix.

Supports are counted on Python ``int`` bitsets (one bit per transaction),
one AND and one popcount per candidate. The search is a depth-first
prefix join: children of itemset ``P + (i,)`` are ``P + (i, j)`` for the
compatible, frequent siblings ``j`` after ``i``. The output is the same
set a breadth-first Apriori would produce.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .dataset import AttributeKind
from .items import (Category, CatEq, CatNeg, IntervalItem, Item, NumericEq,
                    conflicts, item_key)
from .transactions import Transaction, TransactionSet

SUPPORT_EPS = 1e-9


@dataclass(frozen=True)
class GeneralizedItemset:
    items: tuple
    support: float
    count: int = 0

    def __len__(self):
        return len(self.items)

    def __str__(self):
        return "{" + ", ".join(map(str, self.items)) + f"}} @ {self.support:.4f}"


class CategoryTaxonomy:
    """Arbitrary item/category DAG given as parent -> children."""

    def __init__(self, children: Mapping[Item, Iterable[Item]]):
        self._parents: dict = defaultdict(set)
        for parent, kids in children.items():
            for kid in kids:
                self._parents[kid].add(parent)
        self._memo: dict = {}

    def generalizations(self, item) -> frozenset:
        if item not in self._memo:
            up = set()
            for p in self._parents.get(item, ()):
                up.add(p)
                up |= self.generalizations(p)
            self._memo[item] = frozenset(up)
        return self._memo[item]

    def generalized_items(self, raw_items: Iterable) -> list:
        found = set()
        for item in raw_items:
            found |= self.generalizations(item)
        return sorted(found - set(raw_items), key=item_key)


def _generalizations(taxonomy, item) -> frozenset:
    return taxonomy.generalizations(item) if taxonomy is not None else frozenset()


def item_supported_by(item, t: Transaction, taxonomy=None) -> bool:
    if isinstance(item, IntervalItem):
        iv = item.interval
        return any(isinstance(r, NumericEq) and r.attribute == item.attribute and iv.contains(r.value)
                   for r in t.items)
    if item in t.items:
        return True
    if isinstance(item, Category):
        return any(item in _generalizations(taxonomy, r) for r in t.items)
    return False


def support(items: Iterable, transactions: Sequence[Transaction], taxonomy=None) -> float:
    items = list(items)
    n = len(transactions)
    if n == 0:
        raise ValueError("support over an empty transaction list")
    hits = sum(all(item_supported_by(i, t, taxonomy) for i in items) for t in transactions)
    return hits / n


def min_count(minsup: float, n: int) -> int:
    """Smallest transaction count whose fraction of ``n`` reaches ``minsup``."""
    return max(1, math.ceil(minsup * n - SUPPORT_EPS))


def max_itemset_size(conciseness_threshold: float) -> int:
    """Largest predicate count whose inverse still meets the threshold."""
    return int(math.floor(1.0 / conciseness_threshold + SUPPORT_EPS))


def _bits(mask: np.ndarray) -> int:
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


# -- level-1 covers ----------------------------------------------------------

def _columnar_items(ts: TransactionSet, taxonomy, need: int, outside: np.ndarray | None):
    """Frequent level-1 items over ``ts.rows`` as (item, in_bits, out_bits, count).

    Counts are computed vectorially; bitsets are built for frequent items only.
    """
    d = ts.dataset
    rows = ts.rows
    found = []
    for a in ts.attributes:
        col = d.column(a)
        if col.kind is AttributeKind.NUMERIC:
            full = col.values
            x = full[rows]
            x = x[~np.isnan(x)]
            if x.size == 0:
                continue
            u, cnt = np.unique(x, return_counts=True)
            for v, c in zip(u[cnt >= need], cnt[cnt >= need]):
                found.append((NumericEq(a, float(v)), lambda v=v, full=full: full == v, int(c)))
            if taxonomy is not None and a in taxonomy:
                xs = np.sort(x)
                for iv in taxonomy.intervals(a):
                    c = int(np.searchsorted(xs, iv.hi, "right") - np.searchsorted(xs, iv.lo, "left"))
                    if c >= need:
                        found.append((IntervalItem(a, iv),
                                      lambda iv=iv, full=full: (full >= iv.lo) & (full <= iv.hi), c))
        else:
            codes_full = col.codes
            codes = codes_full[rows]
            cnt = np.bincount(codes[codes >= 0], minlength=len(col.categories))
            present = int(cnt.sum())
            for code in np.flatnonzero(cnt >= need):
                found.append((CatEq(a, col.categories[code]),
                              lambda code=code, cf=codes_full: cf == code, int(cnt[code])))
            for code in ts.negations.get(a, ()):
                c = present - int(cnt[code])
                if c >= need:
                    found.append((CatNeg(a, col.categories[code]),
                                  lambda code=code, cf=codes_full: (cf >= 0) & (cf != code), c))
    out = []
    for item, mask_fn, c in found:
        mask = mask_fn()
        out.append((item, _bits(mask[rows]), _bits(mask[outside]) if outside is not None else 0, c))
    return out


def _generic_items(transactions: Sequence[Transaction], taxonomy, need: int):
    covers: dict = defaultdict(int)
    for pos, t in enumerate(transactions):
        for item in t.items:
            covers[item] |= 1 << pos
    raw = list(covers)
    if taxonomy is not None:
        for g in taxonomy.generalized_items(raw):
            covers.setdefault(g, 0)
        for item in raw:
            for g in _generalizations(taxonomy, item):
                covers[g] |= covers[item]
    out = []
    for item, b in covers.items():
        c = b.bit_count()
        if c >= need:
            out.append((item, b, 0, c))
    return out


def _compatibility(items: list, taxonomy) -> list[list[bool]]:
    anc = [_generalizations(taxonomy, i) for i in items]
    n = len(items)
    ok = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            x, y = items[i], items[j]
            good = not (conflicts(x, y) or y in anc[i] or x in anc[j])
            ok[i][j] = ok[j][i] = good
    return ok


# -- search --------------------------------------------------------------------

def _search(level1, compat, maxsize: int, need: int, emit: Callable, prune: bool):
    """Depth-first prefix join over ``level1`` = [(in_bits, out_bits, count)].

    ``emit(index_tuple, in_count, out_bits)`` receives every frequent legal
    itemset. With ``prune`` set, an extension whose cover (inside and
    outside) equals that of either parent is dropped together with all of
    its supersets: each such itemset has a strictly smaller itemset with the
    same cover, which dominates it.
    """
    def walk(prefix, entries):
        depth = len(prefix) + 1
        for pos, (i, ib, ob, c) in enumerate(entries):
            node = prefix + (i,)
            emit(node, c, ob)
            if depth >= maxsize:
                continue
            row = compat[i]
            child = []
            for j, jb, job, _ in entries[pos + 1:]:
                if not row[j]:
                    continue
                nb = ib & jb
                nc = nb.bit_count()
                if nc < need:
                    continue
                nob = ob & job
                if prune and ((nb == ib and nob == ob) or (nb == jb and nob == job)):
                    continue
                child.append((j, nb, nob, nc))
            if child:
                walk(node, child)

    walk((), [(k, ib, ob, c) for k, (ib, ob, c) in enumerate(level1)])


def _prepare(transactions, taxonomy, minsup: float, maxsize: int, outside=None):
    if not 0 < minsup <= 1:
        raise ValueError(f"minsup must lie in (0, 1], got {minsup}")
    if maxsize < 1:
        raise ValueError(f"maxsize must be >= 1, got {maxsize}")
    n = len(transactions)
    if n == 0:
        raise ValueError("cannot mine an empty transaction list")
    need = min_count(minsup, n)
    if isinstance(transactions, TransactionSet):
        found = _columnar_items(transactions, taxonomy, need, outside)
    else:
        found = _generic_items(transactions, taxonomy, need)
    found.sort(key=lambda e: item_key(e[0]))
    items = [e[0] for e in found]
    return n, need, items, [e[1:] for e in found], _compatibility(items, taxonomy)


def mine(transactions, taxonomy, minsup: float, maxsize: int) -> list[GeneralizedItemset]:
    """All frequent generalized itemsets of size <= ``maxsize``.

    ``transactions`` is a ``TransactionSet`` or any sequence of
    ``Transaction``; ``taxonomy`` supplies ``generalizations(item)`` and
    ``generalized_items(raw_items)`` (or is ``None``). Output is ordered by
    size, then support descending, then item order.
    """
    n, need, items, level1, compat = _prepare(transactions, taxonomy, minsup, maxsize)
    found = []
    _search(level1, compat, maxsize, need, lambda idx, c, _ob: found.append((idx, c)), prune=False)
    result = [GeneralizedItemset(tuple(items[k] for k in idx), c / n, c) for idx, c in found]
    result.sort(key=lambda s: (len(s.items), -s.count, [item_key(i) for i in s.items]))
    return result


def mine_with_outside(transactions: TransactionSet, outside_rows: np.ndarray, taxonomy,
                      minsup: float, maxsize: int, emit: Callable, prune: bool = True):
    """Mine ``transactions`` while also tracking cover among ``outside_rows``.

    ``emit(items, in_count, out_count)`` is called per itemset. Returns the
    number of transactions mined.
    """
    n, need, items, level1, compat = _prepare(
        transactions, taxonomy, minsup, maxsize, outside=np.asarray(outside_rows, dtype=np.int64))
    _search(level1, compat, maxsize, need,
            lambda idx, c, ob: emit(tuple(items[k] for k in idx), c, ob.bit_count()), prune=prune)
    return n
