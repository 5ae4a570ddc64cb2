"""Acceptance criteria, each at its stated tolerance and time budget.

Every test records one PASS/FAIL line; the lines are repeated in the
terminal summary under "acceptance criteria".
"""
import json
import time

import pytest

from clusterrules.binning import BinningConfig
from clusterrules.cli import main
from clusterrules.dataset import cluster_rows
from clusterrules.explain import (Explanation, ExplanationMetrics, Predicate, Thresholds, conciseness,
                                  coverage, evaluate, explain_cluster, explain_clusters,
                                  itemset_to_explanation, qse_aggregate, separation_error, skyline)
from clusterrules.gfim import mine
from clusterrules.items import Category as C
from clusterrules.pipeline import bin_attributes
from clusterrules.attrsel import select_attributes
from clusterrules.synth import synthetic_dataset, write_synthetic
from clusterrules.taxonomy import build_taxonomy
from clusterrules.transactions import augment_dataset

from conftest import record_criterion
from fixtures import census_like, character_fixture, metric_fixture_373, random_instance
from oracles import oracle_for_rows, pairwise_skyline


def check(number, title, ok, detail=""):
    record_criterion(number, title, ok, detail)
    assert ok, detail


def test_criterion_1_metric_fixture():
    t0 = time.perf_counter()
    d = metric_fixture_373()
    e = Explanation(0, tuple(Predicate(a, "eq", "yes") for a in "abc"))
    cov, sep, con = coverage(e, d), separation_error(e, d), conciseness(e)
    elapsed = time.perf_counter() - t0
    ok = (abs(cov - 370 / 373) <= 1e-12 and abs(sep - 20 / 390) <= 1e-12 and con == 1 / 3
          and elapsed < 1.0)
    check(1, "373-row metric fixture", ok, f"cov={cov:.6f} sep={sep:.6f} con={con:.6f} in {elapsed:.3f}s")


def test_criterion_2_skyline_fixture():
    t0 = time.perf_counter()
    triples = [(0.99, 0.05, 0.33), (0.95, 0.04, 0.5), (0.88, 0.04, 0.33)]
    cands = [Explanation(0, (Predicate("p", "eq", k),), ExplanationMetrics(*m)) for k, m in enumerate(triples)]
    kept = skyline(cands)
    elapsed = time.perf_counter() - t0
    check(2, "three-candidate skyline", kept == cands[:2] and elapsed < 1.0,
          f"kept {[k.predicates[0].value for k in kept]} in {elapsed:.3f}s")


def test_criterion_3_gfim_background():
    t0 = time.perf_counter()
    ts, tax = character_fixture()
    out = {frozenset(s.items): s.support for s in mine(ts, tax, 2 / 3, 2)}
    elapsed = time.perf_counter() - t0
    wanted = [{C("A")}, {C("2")}, {C("Letter"), C("2")}, {C("A"), C("Number")}]
    present = all(abs(out.get(frozenset(w), -1) - 2 / 3) < 1e-12 for w in wanted)
    no_ancestor_pairs = all(not (tax.generalizations(x) & s) for s in out for x in s)
    check(3, "character taxonomy fixture", present and no_ancestor_pairs and elapsed < 1.0,
          f"{len(out)} itemsets in {elapsed:.3f}s")


def test_criterion_4_oracle_equivalence():
    t0 = time.perf_counter()
    mismatches, n_instances, seed = [], 0, 0
    while n_instances < 120:
        d, tax, intervals, minsup, maxsize = random_instance(seed)
        seed += 1
        for c in d.cluster_ids:
            rows = cluster_rows(d, c)
            got = {frozenset(s.items): s.count for s in mine(augment_dataset(d).select(rows), tax, minsup, maxsize)}
            if got != oracle_for_rows(d, intervals, rows, minsup, maxsize):
                mismatches.append(seed - 1)
            n_instances += 1
    elapsed = time.perf_counter() - t0
    check(4, "mine() equals brute-force oracle", not mismatches and elapsed < 120,
          f"{n_instances} instances, {len(mismatches)} mismatches, {elapsed:.1f}s")


SOUNDNESS_FIXTURES = [
    ("census-like", lambda: census_like(), Thresholds(0.8, 0.05, 0.33)),
    ("census-like loose", lambda: census_like(1), Thresholds(0.6, 0.4, 0.33)),
    ("blobs", lambda: synthetic_dataset(rows=900, numeric_attrs=2, categorical_attrs=2, clusters=3,
                                        noise_attrs=2, seed=1, spread=2.0), Thresholds(0.7, 0.3, 0.34)),
    ("overlapping blobs", lambda: synthetic_dataset(rows=900, numeric_attrs=3, categorical_attrs=1, clusters=4,
                                                    noise_attrs=1, seed=2, spread=4.0), Thresholds(0.5, 0.5, 0.34)),
    ("noisy categorical", lambda: synthetic_dataset(rows=600, numeric_attrs=1, categorical_attrs=3, clusters=3,
                                                    noise_attrs=2, seed=3, dominance=0.6), Thresholds(0.6, 0.5, 0.25)),
]


def test_criterion_5_threshold_and_pareto_soundness():
    violations, dominated, total = [], 0, 0
    for name, make, th in SOUNDNESS_FIXTURES:
        d = make()
        binned = bin_attributes(d, d.attributes, BinningConfig())
        tax = build_taxonomy(binned)
        ts = augment_dataset(d)
        for c in d.cluster_ids:
            survivors = explain_cluster(d, tax, ts, th, c).explanations
            # every post-filter candidate, from the unpruned miner
            cands = []
            for iset in mine(ts.select(cluster_rows(d, c)), tax, th.coverage, th.maxsize):
                e = evaluate(itemset_to_explanation(iset, c), d)
                if e.metrics.separation_error <= th.separation:
                    cands.append(e)
            points = [(e.metrics.coverage, e.metrics.separation_error, e.metrics.conciseness) for e in cands]
            front = {cands[i] for i in pairwise_skyline(points)}
            for e in survivors:
                total += 1
                m = evaluate(e, d).metrics
                if not (m.coverage >= th.coverage - 1e-12 and m.separation_error <= th.separation
                        and m.conciseness >= th.conciseness):
                    violations.append((name, c, e.render()))
                if e not in front:
                    dominated += 1
            if set(survivors) != front:
                violations.append((name, c, "survivor set differs from brute-force skyline"))
    check(5, "threshold and Pareto soundness", not violations and dominated == 0 and total > 0,
          f"{total} explanations over {len(SOUNDNESS_FIXTURES)} fixtures, "
          f"{len(violations)} violations, {dominated} dominated")


def _mine_ms(reports):
    return sum(r.mine_ms + r.skyline_ms for r in reports)


@pytest.mark.slow
def test_criterion_6_attribute_selection_speedup():
    d = synthetic_dataset(rows=100_000, numeric_attrs=3, categorical_attrs=2, clusters=5, noise_attrs=45,
                          seed=7, spread=1.5)
    th = Thresholds()

    t0 = time.perf_counter()
    selected = select_attributes(d, th, 1.0)
    tax = build_taxonomy(bin_attributes(d, selected, BinningConfig()))
    sel_reports = explain_clusters(d, tax, augment_dataset(d, attributes=selected), th)
    sel_total = time.perf_counter() - t0

    t0 = time.perf_counter()
    tax_all = build_taxonomy(bin_attributes(d, d.attributes, BinningConfig()))
    exact_reports = explain_clusters(d, tax_all, augment_dataset(d), th)
    exact_total = time.perf_counter() - t0

    def agg(reports):
        return qse_aggregate({r.cluster: r.explanations for r in reports})

    speedup = _mine_ms(exact_reports) / _mine_ms(sel_reports)
    gap = abs(agg(sel_reports) - agg(exact_reports))
    ok = speedup >= 3 and gap <= 0.1 and exact_total <= 600 and sel_total <= 180
    check(6, "attribute selection speedup", ok,
          f"selected {selected}; mining speedup {speedup:.1f}x; QSE {agg(sel_reports):.4f} vs "
          f"{agg(exact_reports):.4f}; wall {sel_total:.1f}s vs {exact_total:.1f}s")


@pytest.mark.slow
def test_criterion_7_end_to_end_performance(tmp_path):
    data = tmp_path / "big.csv"
    write_synthetic(data, rows=100_000, numeric_attrs=4, categorical_attrs=3, clusters=5, noise_attrs=13,
                    seed=11)
    out = tmp_path / "ex.json"
    t0 = time.perf_counter()
    code = main(["explain", "--input", str(data), "--out", str(out), "--format", "json"])
    elapsed = time.perf_counter() - t0
    doc = json.loads(out.read_text()) if code == 0 else {}
    n_clusters = len(doc.get("clusters", []))
    check(7, "100K x 20 explain within 60 s", code == 0 and n_clusters == 5 and elapsed <= 60,
          f"exit {code}, {n_clusters} clusters, {elapsed:.1f}s")


def test_criterion_8_determinism(tmp_path):
    data = tmp_path / "d.csv"
    write_synthetic(data, rows=5000, numeric_attrs=3, categorical_attrs=2, clusters=4, noise_attrs=5, seed=5,
                    spread=2.5)
    texts = []
    for k, threads in enumerate(["1", "1", "4"]):
        out = tmp_path / f"r{k}.json"
        assert main(["explain", "--input", str(data), "--out", str(out), "--threads", threads,
                     "--format", "json"]) == 0
        doc = json.loads(out.read_text())
        doc.pop("timings_ms")
        texts.append(doc)
    single_identical = json.dumps(texts[0], indent=2) == json.dumps(texts[1], indent=2)

    def explanation_set(doc):
        return {(c["cluster"], json.dumps(e, sort_keys=True)) for c in doc["clusters"] for e in c["explanations"]}

    multi_same = explanation_set(texts[0]) == explanation_set(texts[2])
    check(8, "determinism", single_identical and multi_same,
          f"single-thread identical={single_identical}, multi-thread same set={multi_same}")
