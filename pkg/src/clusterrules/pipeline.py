"""End-to-end explanation runs, reports and re-evaluation."""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .attrsel import score_attributes
from .binning import BinningConfig, bin_attribute
from .dataset import AttributeKind, Dataset
from .errors import DataError, SchemaError
from .explain import (Explanation, Predicate, Thresholds, evaluate, explain_clusters,
                      qse_aggregate)
from .taxonomy import Taxonomy, build_taxonomy
from .transactions import DEFAULT_NEG_CAP, augment_dataset

DRIFT_TOL = 1e-9


@dataclass
class RunConfig:
    input: str | None = None
    labels: str = "cluster"
    thresholds: Thresholds = field(default_factory=Thresholds)
    binning: BinningConfig = field(default_factory=BinningConfig)
    neg_cap: int = DEFAULT_NEG_CAP
    attr_selection: bool = True
    p: float = 1.0
    out: str | None = None
    seed: int = 0
    threads: int = 1
    dot_taxonomy: str | None = None
    format: str = "both"
    type_hints: dict[str, str] = field(default_factory=dict)

    def describe(self) -> dict:
        """Settings that determine the explanations (echoed in the report)."""
        return {
            "labels": self.labels,
            "thresholds": asdict(self.thresholds),
            "maxsize": self.thresholds.maxsize,
            "binning": {
                "methods": [m.value for m in self.binning.methods],
                "bins_per_method": self.binning.bins_per_method,
                "tree_max_leaves": self.binning.tree_max_leaves,
            },
            "neg_cap": self.neg_cap,
            "attr_selection": self.attr_selection,
            "p": self.p,
            "seed": self.seed,
            "type_hints": dict(sorted(self.type_hints.items())),
        }


class Timer:
    def __init__(self):
        self.ms: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.ms[name] = self.ms.get(name, 0.0) + (time.perf_counter() - t0) * 1e3


def bin_attributes(d: Dataset, attributes, cfg: BinningConfig, threads: int = 1) -> dict:
    """Attribute -> candidate intervals, for the numeric attributes given."""
    numeric = [a for a in attributes if d.kind(a) is AttributeKind.NUMERIC]

    def one(a):
        return a, bin_attribute(d.column(a).values, d.label_codes, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return dict(pool.map(one, numeric))
    return dict(map(one, numeric))


@dataclass
class RunResult:
    report: dict
    taxonomy: Taxonomy


def run(d: Dataset, cfg: RunConfig) -> RunResult:
    """Explain every cluster of ``d``."""
    timer = Timer()
    attributes = d.attributes
    selected = None
    if cfg.attr_selection:
        with timer.stage("attrsel"):
            selected = score_attributes(d, cfg.thresholds, cfg.p, cfg.threads).selected
        attributes = selected
    with timer.stage("binning"):
        binned = bin_attributes(d, attributes, cfg.binning, cfg.threads)
    with timer.stage("taxonomy"):
        taxonomy = build_taxonomy(binned)
    with timer.stage("augment"):
        transactions = augment_dataset(d, cfg.neg_cap, attributes)
    reports = explain_clusters(d, taxonomy, transactions, cfg.thresholds, threads=cfg.threads)
    timer.ms["mine"] = sum(r.mine_ms for r in reports)
    timer.ms["skyline"] = sum(r.skyline_ms for r in reports)
    for r in reports:
        timer.ms[f"mine[{r.cluster}]"] = r.mine_ms

    report = {
        "clusters": [
            {
                "cluster": _jsonable(r.cluster),
                "size": r.n_rows,
                "candidates": r.candidates,
                "explanations": [explanation_to_dict(e) for e in r.explanations],
            }
            for r in reports
        ],
        "qse": qse_aggregate({r.cluster: r.explanations for r in reports}),
        "selected_attributes": selected,
        "warnings": [r.warning for r in reports if r.warning]
        + [f"cluster {r.cluster!r}: {r.candidates} candidates, kept the top by QSE" for r in reports if r.capped],
        "config": cfg.describe(),
        "timings_ms": timer.ms,
    }
    return RunResult(report, taxonomy)


def _jsonable(v: Any):
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def explanation_to_dict(e: Explanation) -> dict:
    m = e.metrics
    return {
        "predicates": [p.to_dict() for p in e.predicates],
        "coverage": m.coverage,
        "separation_error": m.separation_error,
        "conciseness": m.conciseness,
        "qse": m.qse,
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def report_text(report: dict) -> str:
    lines = []
    for entry in report["clusters"]:
        exps = entry["explanations"]
        head = f"Cluster {entry['cluster']} ({entry['size']} rows)"
        if not exps:
            lines.append(f"{head}: no explanation meets the thresholds")
            continue
        best = max(exps, key=lambda e: e["qse"])
        lines.append(f"{head}: {len(exps)} Pareto-optimal explanation(s)")
        lines.append(f"  {best['coverage']:.0%} of the cluster's points hold: {_render(best)}")
        for e in exps:
            lines.append(
                f"  - cov {e['coverage']:.2f}  sep {e['separation_error']:.2f}  "
                f"con {e['conciseness']:.2f}  qse {e['qse']:.2f}  {_render(e)}"
            )
    lines.append(f"QSE (mean of per-cluster best): {report['qse']:.2f}")
    return "\n".join(lines) + "\n"


def _render(e: dict) -> str:
    return " AND ".join(str(Predicate.from_dict(p)) for p in e["predicates"])


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def load_explanations(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("clusters"), list):
        raise SchemaError(f"{path}: expected an object with a 'clusters' list")
    return doc


def _match_cluster(raw, d: Dataset):
    for c in d.cluster_ids:
        if c == raw or str(c) == str(raw):
            return c
    raise SchemaError(f"cluster {raw!r} does not occur in the data")


def evaluate_report(d: Dataset, doc: dict) -> dict:
    """Recompute every stored explanation's metrics on ``d`` and compare."""
    per_cluster: dict = {c: [] for c in d.cluster_ids}
    rows = []
    drift = False
    for entry in doc["clusters"]:
        if not isinstance(entry, dict) or "cluster" not in entry or not isinstance(entry.get("explanations"), list):
            raise SchemaError("each cluster entry needs 'cluster' and an 'explanations' list")
        c = _match_cluster(entry["cluster"], d)
        for k, raw in enumerate(entry["explanations"]):
            try:
                preds = tuple(Predicate.from_dict(p) for p in raw["predicates"])
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"cluster {c!r} explanation {k}: {exc}") from None
            e = Explanation(c, preds)
            try:
                e = evaluate(e, d)
            except SchemaError:
                raise
            except DataError as exc:
                rows.append({"cluster": c, "index": k, "error": str(exc), "drift": True})
                drift = True
                continue
            m = e.metrics
            recomputed = {"coverage": m.coverage, "separation_error": m.separation_error,
                          "conciseness": m.conciseness, "qse": m.qse}
            diffs = {key: abs(float(raw[key]) - val) for key, val in recomputed.items() if key in raw}
            bad = sorted(key for key, diff in diffs.items() if diff > DRIFT_TOL)
            drift |= bool(bad)
            per_cluster[c].append(e)
            rows.append({"cluster": c, "index": k, **recomputed, "drift_fields": bad, "drift": bool(bad)})
    best = {c: max((e.metrics.qse for e in exps), default=0.0) for c, exps in per_cluster.items()}
    return {
        "explanations": rows,
        "best_qse": best,
        "qse": qse_aggregate(per_cluster),
        "drift": drift,
    }


def eval_text(result: dict) -> str:
    lines = []
    for row in result["explanations"]:
        if "error" in row:
            lines.append(f"cluster {row['cluster']} #{row['index']}: DRIFT ({row['error']})")
        elif row["drift"]:
            lines.append(f"cluster {row['cluster']} #{row['index']}: DRIFT in {', '.join(row['drift_fields'])}")
    for c, q in result["best_qse"].items():
        lines.append(f"cluster {c}: best QSE {q:.4f}")
    lines.append(f"QSE: {result['qse']:.4f}")
    lines.append("drift: " + ("yes" if result["drift"] else "none"))
    return "\n".join(lines) + "\n"
