"""Command line entry point.

    casimir-stats analyze --config C.json --data D1.csv ... --theory T1.csv ... --out DIR
    casimir-stats mc --scenario S.json --trials N --out DIR

Exit status: 0 on success, 2 when any model is excluded at the requested
confidence, 1 on input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .data_model import InputError, load_config, load_measurement_sets, load_theory_curves
from .pipeline import analyze
from .reporting import emit_comparison, emit_error_budget
from .synth_mc import coverage_study, load_scenario

log = logging.getLogger("casimir_stats")

EXIT_OK, EXIT_INPUT, EXIT_EXCLUDED = 0, 1, 2


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def run_pipeline(config_path, data_paths, theory_paths, out_dir, beta=None, threads=1,
                 theory_names=None) -> int:
    """Analyze, write ``error_budget.{csv,json}`` and ``comparison.{csv,json}``."""
    config = load_config(config_path)
    if beta is not None:
        config = config.with_beta(beta)
    coll = load_measurement_sets(data_paths, config.unit, config.quantity_kind, config.delta_z)
    curves = load_theory_curves(theory_paths, theory_names)
    result = analyze(coll, curves, config, threads=threads)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for fmt in ("csv", "json"):
        _write(out, f"error_budget.{fmt}", emit_error_budget(result.budget, result.meta, fmt))
        _write(out, f"comparison.{fmt}", emit_comparison(result.verdicts, result.meta, fmt))
    for v in result.verdicts:
        if v.excluded:
            spans = ", ".join(f"{a:g}-{b:g} nm" for a, b in v.excluded_ranges())
            log.info("%s: excluded at beta=%g over %s", v.model_name, v.beta, spans)
        else:
            log.info("%s: consistent at beta=%g", v.model_name, v.beta)
    return EXIT_EXCLUDED if result.any_excluded else EXIT_OK


def run_mc(scenario_path, trials, out_dir, beta=0.95, threads=1) -> int:
    scenario = load_scenario(scenario_path)
    report = coverage_study(scenario, trials, beta=beta, threads=threads)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"scenario": scenario.to_json(), "coverage": report.to_json()}
    _write(out, "coverage.json", json.dumps(doc, indent=2) + "\n")
    log.info("coverage %.4f over %d intervals (beta=%g)", report.coverage,
             report.n_intervals, beta)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="casimir-stats", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="error budgets and model verdicts")
    a.add_argument("--config", help="experiment config JSON")
    a.add_argument("--data", nargs="+", default=[], help="measurement CSV files (set,z_nm,value)")
    a.add_argument("--theory", nargs="*", default=[], help="theory CSV files (z_nm,value)")
    a.add_argument("--name", action="append", default=None,
                   help="model name for the matching --theory file (repeatable)")
    a.add_argument("--beta", type=float, default=None,
                   help="confidence level; overrides the config (default: config value)")
    a.add_argument("--out", default="out", help="output directory (default: out)")
    a.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    a.add_argument("--mc", metavar="SCENARIO", default=None,
                   help="run a coverage study on this scenario instead")
    a.add_argument("--trials", type=int, default=10000, help="trials for --mc (default: 10000)")

    m = sub.add_parser("mc", help="Monte Carlo coverage study")
    m.add_argument("--scenario", required=True, help="scenario JSON")
    m.add_argument("--trials", type=int, default=10000, help="number of trials (default: 10000)")
    m.add_argument("--beta", type=float, default=0.95, help="confidence level (default: 0.95)")
    m.add_argument("--out", default="out", help="output directory (default: out)")
    m.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "mc":
            return run_mc(args.scenario, args.trials, args.out, args.beta, args.threads)
        if args.mc:
            return run_mc(args.mc, args.trials, args.out, args.beta or 0.95, args.threads)
        if not args.config or not args.data:
            raise InputError("analyze needs --config and --data", where="cli")
        return run_pipeline(args.config, args.data, args.theory, args.out, args.beta,
                            args.threads, args.name)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
