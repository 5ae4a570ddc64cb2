import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterrules.binning import Interval, bin_attribute
from clusterrules.dataset import Dataset, cluster_rows
from clusterrules.errors import DataError
from clusterrules.explain import (ExplanationMetrics, Explanation, Predicate, Thresholds, conciseness,
                                  coverage, dominates, evaluate, explain_all, explain_cluster, holds,
                                  itemset_to_explanation, qse, qse_aggregate, separation_error, skyline,
                                  skyline_indices)
from clusterrules.gfim import GeneralizedItemset, mine
from clusterrules.items import CatEq, CatNeg, IntervalItem
from clusterrules.taxonomy import build_taxonomy
from clusterrules.transactions import augment_dataset

from fixtures import census_like, metric_fixture_373, random_instance
from oracles import pairwise_skyline

AGE = Predicate("age", "between", lo=16, hi=35)
EDU = Predicate("education-num", "between", lo=4, hi=13)


def metrics(cov, sep, con):
    return ExplanationMetrics(cov, sep, con)


def test_holds_on_rows():
    e = Explanation(0, (AGE, EDU))
    assert holds(e, {"age": 25, "education-num": 7})
    assert not holds(e, {"age": 41, "education-num": 7})
    assert not holds(e, {"age": None, "education-num": 7})
    assert not holds(Explanation(0, (Predicate("rel", "neq", "Husband"),)), {"rel": None})
    with pytest.raises(DataError):
        holds(e, {"age": 25})


def test_predicate_validation():
    with pytest.raises(ValueError):
        Predicate("a", "between", lo=3, hi=3)
    with pytest.raises(ValueError):
        Predicate("a", "lt", 3)
    with pytest.raises(ValueError):
        Explanation(0, ())


def test_metrics_on_373_row_fixture():
    d = metric_fixture_373()
    e = Explanation(0, tuple(Predicate(a, "eq", "yes") for a in "abc"))
    assert coverage(e, d) == pytest.approx(370 / 373, abs=1e-12)
    assert separation_error(e, d) == pytest.approx(20 / 390, abs=1e-12)
    assert conciseness(e) == 1 / 3


def test_metric_edge_cases():
    d = Dataset.from_columns({"x": [1.0, 2.0, 3.0, 4.0], "c": ["u", "u", "v", "v"]}, [0, 0, 1, 1],
                             kinds={"x": "numeric"})
    nowhere = Explanation(0, (Predicate("x", "between", lo=10, hi=20),))
    assert coverage(nowhere, d) == 0
    with pytest.raises(DataError):
        separation_error(nowhere, d)
    full = Explanation(0, (Predicate("x", "between", lo=1, hi=4),))
    assert coverage(full, d) == 1
    assert separation_error(Explanation(0, (Predicate("c", "eq", "u"),)), d) == 0
    assert separation_error(Explanation(0, (Predicate("c", "eq", "v"),)), d) == 1
    assert conciseness(Explanation(0, (AGE, EDU))) == 0.5
    assert conciseness(full) == 1
    with pytest.raises(DataError):
        coverage(Explanation(9, (AGE,)), d)


def test_itemset_to_explanation():
    iset = GeneralizedItemset((IntervalItem("education-num", Interval(4, 13)),
                               IntervalItem("age", Interval(16, 35))), 0.95)
    assert itemset_to_explanation(iset, 0) == Explanation(0, (AGE, EDU))
    assert itemset_to_explanation([CatNeg("relationship", "Husband")], 1).predicates == (
        Predicate("relationship", "neq", "Husband"),)
    e = itemset_to_explanation([CatEq("gender", "Male")], 2)
    assert e.predicates == (Predicate("gender", "eq", "Male"),) and e.metrics is None


def test_skyline_three_candidates():
    table = [metrics(0.99, 0.05, 0.33), metrics(0.95, 0.04, 0.5), metrics(0.88, 0.04, 0.33)]
    cands = [Explanation(0, (Predicate("p", "eq", k),), m) for k, m in enumerate(table)]
    assert skyline(cands) == cands[:2]
    assert skyline(cands[:1]) == cands[:1]
    assert skyline([]) == []
    assert dominates(table[1], table[2]) and not dominates(table[0], table[1])


def test_skyline_keeps_ties():
    pts = [(0.9, 0.1, 0.5), (0.9, 0.1, 0.5), (0.8, 0.1, 0.5)]
    assert sorted(skyline_indices(pts)) == [0, 1]


triple = st.tuples(st.sampled_from([0.8, 0.85, 0.9, 0.95, 1.0]), st.sampled_from([0.0, 0.05, 0.1, 0.2]),
                   st.sampled_from([1 / 3, 0.5, 1.0]))


@settings(max_examples=60, deadline=None)
@given(st.lists(triple, max_size=40))
def test_skyline_matches_pairwise(points):
    assert sorted(skyline_indices(points)) == pairwise_skyline(points)


def test_skyline_200_random(rng):
    pts = [tuple(v) for v in np.round(rng.random((200, 3)), 2)]
    assert sorted(skyline_indices(pts)) == pairwise_skyline(pts)


def test_qse_values():
    def ex(m):
        return Explanation(0, (AGE,), m)
    assert qse(ex(metrics(0.99, 0.05, 0.33))) == pytest.approx((0.99 + 0.95 + 0.33) / 3)
    assert qse(ex(metrics(1, 0, 1))) == 1
    best = {0: [ex(metrics(1, 0.6, 0.8)), ex(metrics(0.7, 0.0, 1.0))], 1: [ex(metrics(0.8, 0.4, 1.0))]}
    assert qse_aggregate(best) == pytest.approx((0.9 + 0.8) / 2)
    assert qse_aggregate({0: [ex(metrics(1, 0, 1))], 1: []}) == 0.5
    assert qse_aggregate({}) == 0.0


def test_thresholds():
    assert Thresholds().maxsize == 5
    assert Thresholds(0.8, 0.05, 0.33).maxsize == 3
    for bad in [(0, 0.3, 0.2), (0.8, 1.5, 0.2), (0.8, 0.3, 0)]:
        with pytest.raises(ValueError):
            Thresholds(*bad)


def _taxonomy(d):
    return build_taxonomy({a: bin_attribute(d.column(a).values, d.label_codes)
                           for a in d.attributes if d.kind(a).value == "numeric"})


def test_census_cluster0_needs_two_predicates():
    d = census_like()
    th = Thresholds(0.8, 0.05, 0.33)
    out = explain_all(d, _taxonomy(d), augment_dataset(d), th)
    rules = {tuple((p.attribute, p.lo, p.hi) for p in e.predicates) for e in out[0]}
    assert (("age", 17.0, 35.0), ("education-num", 9.0, 13.0)) in rules
    for e in out[0]:
        assert e.metrics.coverage >= 0.8 and e.metrics.separation_error <= 0.05


def test_census_with_hand_picked_intervals():
    d = census_like()
    tax = build_taxonomy({"age": [Interval(16, 90), Interval(16, 48), Interval(16, 35), Interval(36, 90)],
                          "education-num": [Interval(1, 16), Interval(4, 13), Interval(9, 16)]})
    out = explain_all(d, tax, augment_dataset(d), Thresholds(0.8, 0.05, 0.33))
    assert [str(e.render()) for e in out[0]] == ["age between 16–35 AND education-num between 9–16"]


def test_perfectly_separable_categorical(rng):
    labels = rng.integers(0, 3, 300)
    d = Dataset.from_columns({"tag": [f"t{k}" for k in labels], "noise": rng.uniform(0, 100, 300).tolist()},
                             labels.tolist())
    out = explain_all(d, _taxonomy(d), augment_dataset(d), Thresholds(1.0, 0.0, 0.2))
    for c in d.cluster_ids:
        (e,) = out[c]
        assert e.predicates == (Predicate("tag", "eq", f"t{c}"),)
        assert (e.metrics.coverage, e.metrics.separation_error) == (1.0, 0.0)


def test_unknown_cluster():
    d = Dataset.from_columns({"x": [1.0, 2.0] * 6}, [0, 1] * 6)
    with pytest.raises(DataError):
        explain_cluster(d, _taxonomy(d), augment_dataset(d), Thresholds(), 5)


def reference_skyline(d, tax, th, c):
    """Every frequent itemset as a candidate, metrics from scratch, filter, O(n^2) skyline."""
    rows = cluster_rows(d, c)
    cands = []
    for iset in mine(augment_dataset(d).select(rows), tax, th.coverage, th.maxsize):
        e = evaluate(itemset_to_explanation(iset, c), d)
        assert e.metrics.coverage == pytest.approx(iset.support, abs=1e-12)
        if e.metrics.separation_error <= th.separation:
            cands.append(e)
    pts = [(e.metrics.coverage, e.metrics.separation_error, e.metrics.conciseness) for e in cands]
    return {cands[i] for i in pairwise_skyline(pts)}, cands


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.3, 0.5, 1.0]))
def test_explanations_equal_reference_skyline(seed, sep):
    d, tax, _, minsup, maxsize = random_instance(seed)
    th = Thresholds(minsup, sep, 1 / maxsize)
    for c in d.cluster_ids:
        got = explain_cluster(d, tax, augment_dataset(d), th, c).explanations
        expected, _ = reference_skyline(d, tax, th, c)
        assert set(got) == expected
        for e in got:
            fresh = evaluate(e, d).metrics
            assert fresh == e.metrics
            assert fresh.coverage >= th.coverage - 1e-12
            assert fresh.separation_error <= th.separation
            assert fresh.conciseness >= th.conciseness
            assert fresh.conciseness * len(e) == pytest.approx(1.0)
            assert 0.0 <= fresh.qse <= 1.0


def test_candidate_cap_keeps_pareto_front():
    d = census_like()
    tax = _taxonomy(d)
    th = Thresholds(0.5, 0.6, 0.33)
    full = explain_cluster(d, tax, augment_dataset(d), th, 0)
    capped = explain_cluster(d, tax, augment_dataset(d), th, 0, cap=5)
    assert capped.capped and not full.capped
    assert capped.candidates == full.candidates
    assert set(capped.explanations) <= set(full.explanations)
    assert max(e.metrics.qse for e in capped.explanations) == max(e.metrics.qse for e in full.explanations)


def test_restricted_attributes():
    d = census_like()
    out = explain_all(d, _taxonomy(d), augment_dataset(d), Thresholds(0.8, 0.3, 0.33), attrs=["age"])
    assert all(p.attribute == "age" for exps in out.values() for e in exps for p in e.predicates)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.one_of(st.none(), st.integers(0, 6)), min_size=1, max_size=30),
       st.integers(0, 6), st.integers(0, 6))
def test_mask_agrees_with_row_evaluation(values, lo, width):
    d = Dataset.from_columns({"x": values, "c": [None if v is None else f"k{v % 3}" for v in values]},
                             [0] * len(values), kinds={"x": "numeric", "c": "categorical"})
    preds = [Predicate("x", "between", lo=lo, hi=lo + width + 1), Predicate("x", "eq", float(lo)),
             Predicate("c", "eq", "k1"), Predicate("c", "neq", "k1")]
    for p in preds:
        expected = [p.evaluate(d.row(i)[p.attribute]) for i in range(d.n_rows)]
        assert p.mask(d).tolist() == expected
