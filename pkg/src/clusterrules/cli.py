"""``clusterrules`` command line: explain | eval | synth.

Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .binning import BinningConfig, BinningError, BinningMethod
from .dataset import load_csv
from .errors import DataError
from .explain import Thresholds
from .pipeline import (RunConfig, eval_text, evaluate_report, load_explanations, report_json,
                       report_text, run, write_atomic)
from .synth import write_synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("clusterrules")

DEFAULTS = {
    "labels": "cluster",
    "coverage": 0.8,
    "separation": 0.3,
    "conciseness": 0.2,
    "p": 1.0,
    "attr_selection": True,
    "bins": 5,
    "tree_leaves": 8,
    "methods": [m.value for m in BinningMethod],
    "neg_cap": 20,
    "seed": 0,
    "threads": None,
    "format": "both",
    "type_hints": {},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _on_off(text: str) -> bool:
    if text.lower() in ("on", "true", "yes", "1"):
        return True
    if text.lower() in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError("expected on|off")


def _hint(text: str) -> tuple[str, str]:
    name, sep, kind = text.rpartition("=")
    if not sep or kind.lower() not in ("numeric", "categorical"):
        raise argparse.ArgumentTypeError("expected NAME=numeric|categorical")
    return name, kind.lower()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clusterrules", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ex = sub.add_parser("explain", help="mine Pareto-optimal explanations per cluster")
    ex.add_argument("--config", help="JSON file with defaults for any of the options below")
    ex.add_argument("--input", help="CSV file with a header row")
    ex.add_argument("--labels", help="name of the cluster label column (default: cluster)")
    ex.add_argument("--out", help="JSON report path (default: stdout)")
    ex.add_argument("--coverage", type=float, help="coverage threshold (default 0.8)")
    ex.add_argument("--separation", type=float, help="separation error threshold (default 0.3)")
    ex.add_argument("--conciseness", type=float, help="conciseness threshold (default 0.2)")
    ex.add_argument("--p", type=float, help="attribute-selection scaling factor (default 1.0)")
    ex.add_argument("--attr-selection", dest="attr_selection", type=_on_off, metavar="on|off")
    ex.add_argument("--no-attr-selection", dest="attr_selection", action="store_false")
    ex.add_argument("--bins", type=int, help="bins per binning method (default 5)")
    ex.add_argument("--tree-leaves", type=int, help="max leaves of tree-based binning (default 8)")
    ex.add_argument("--methods", nargs="+", choices=[m.value for m in BinningMethod])
    ex.add_argument("--neg-cap", type=int, help="max categories that get negation items (default 20)")
    ex.add_argument("--seed", type=int)
    ex.add_argument("--threads", type=int, help="worker threads (default: available cores)")
    ex.add_argument("--dot-taxonomy", help="also write the interval taxonomy as a DOT graph")
    ex.add_argument("--format", choices=["json", "text", "both"])
    ex.add_argument("--type-hint", dest="type_hints", type=_hint, action="append",
                    metavar="NAME=KIND", help="force a column to numeric or categorical")
    ex.set_defaults(attr_selection=None)

    ev = sub.add_parser("eval", help="recompute the metrics of a JSON report")
    ev.add_argument("--input", required=True)
    ev.add_argument("--labels", default="cluster")
    ev.add_argument("--explanations", required=True, help="JSON report written by 'explain'")
    ev.add_argument("--out", help="write the evaluation as JSON")
    ev.add_argument("--type-hint", dest="type_hints", type=_hint, action="append", metavar="NAME=KIND")

    sy = sub.add_parser("synth", help="write a seeded synthetic clustered CSV")
    sy.add_argument("--out", required=True)
    sy.add_argument("--rows", type=int, default=1000)
    sy.add_argument("--numeric-attrs", type=int, default=3)
    sy.add_argument("--categorical-attrs", type=int, default=2)
    sy.add_argument("--clusters", type=int, default=3)
    sy.add_argument("--noise-attrs", type=int, default=0)
    sy.add_argument("--spread", type=float, default=1.0, help="within-cluster spread multiplier")
    sy.add_argument("--seed", type=int, default=0)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    merged = dict(DEFAULTS)
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS) - {"input", "out", "dot_taxonomy"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key, value in vars(args).items():
        if value is None or key in ("command", "config", "verbose"):
            continue
        merged[key] = dict(value) if key == "type_hints" else value
    if not merged.get("input"):
        raise UsageError("--input is required")
    try:
        return RunConfig(
            input=merged["input"],
            labels=merged["labels"],
            thresholds=Thresholds(merged["coverage"], merged["separation"], merged["conciseness"]),
            binning=BinningConfig(tuple(merged["methods"]), merged["bins"], merged["tree_leaves"]),
            neg_cap=merged["neg_cap"],
            attr_selection=bool(merged["attr_selection"]),
            p=merged["p"],
            out=merged.get("out"),
            seed=merged["seed"],
            threads=merged["threads"] or os.cpu_count() or 1,
            dot_taxonomy=merged.get("dot_taxonomy"),
            format=merged["format"],
            type_hints=dict(merged["type_hints"]),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_explain(cfg: RunConfig) -> int:
    if cfg.p <= 0 or cfg.neg_cap < 0 or cfg.threads < 1:
        raise UsageError("--p must be positive, --neg-cap non-negative, --threads >= 1")
    d = load_csv(cfg.input, cfg.labels, cfg.type_hints)
    result = run(d, cfg)
    report = result.report
    wants_json = cfg.format in ("json", "both")
    wants_text = cfg.format in ("text", "both")
    if cfg.dot_taxonomy:
        write_atomic(cfg.dot_taxonomy, result.taxonomy.to_dot())
    if wants_json and cfg.out:
        write_atomic(cfg.out, report_json(report))
    if wants_json and not cfg.out:
        sys.stdout.write(report_json(report))
        if wants_text:
            sys.stderr.write(report_text(report))
    elif wants_text:
        sys.stdout.write(report_text(report))
    for w in report["warnings"]:
        log.warning(w)
    return EXIT_OK


def cmd_eval(args) -> int:
    d = load_csv(args.input, args.labels, dict(args.type_hints or []))
    doc = load_explanations(args.explanations)
    result = evaluate_report(d, doc)
    if args.out:
        payload = dict(result)
        payload["best_qse"] = [{"cluster": c, "qse": q} for c, q in result["best_qse"].items()]
        write_atomic(args.out, json.dumps(payload, indent=2) + "\n")
    sys.stdout.write(eval_text(result))
    return EXIT_OK


def cmd_synth(args) -> int:
    if min(args.rows, args.clusters) < 1 or min(args.numeric_attrs, args.categorical_attrs, args.noise_attrs) < 0:
        raise UsageError("sizes must be positive")
    write_synthetic(args.out, rows=args.rows, numeric_attrs=args.numeric_attrs,
                    categorical_attrs=args.categorical_attrs, clusters=args.clusters,
                    noise_attrs=args.noise_attrs, seed=args.seed, spread=args.spread)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.command == "explain":
            return cmd_explain(resolve_config(args))
        if args.command == "eval":
            return cmd_eval(args)
        return cmd_synth(args)
    except UsageError as exc:
        print(f"clusterrules: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, BinningError) as exc:
        print(f"clusterrules: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"clusterrules: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
