"""Command-line entry point: ``heraldshape run | sweep | verify``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .linalg import ShapingError
from .scenario import (
    DEFAULT_TOLERANCE,
    SEED_ENV,
    FALLBACK_SEED,
    ScenarioError,
    default_seed,
    load_scenario,
    run_scenario,
)
from .verification import run_checks

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_PHYSICS = 0, 1, 2, 3

OUTCOME_COLUMNS = ("f", "probability", "fidelity", "purity", "accepted", "target_reached")
SWEEP_COLUMNS = ("param", "value", "total_herald_rate", "discard_probability", "fidelity", "purity")


def _parse_values(tokens: list[str]) -> list[float]:
    values = []
    for tok in tokens:
        for part in tok.split(","):
            part = part.strip()
            if part:
                try:
                    values.append(float(part))
                except ValueError:
                    raise ScenarioError(f"not a number: {part!r}", "--values") from None
    return values


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})
    return buf.getvalue()


def _emit(payload, out: Path | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _cmd_run(args) -> int:
    scenario = load_scenario(args.file)
    report = run_scenario(scenario, args.tolerance, args.trials, args.seed)
    if args.csv:
        args.csv.write_text(_csv_text(OUTCOME_COLUMNS, report.per_outcome), encoding="utf-8")
    _emit(report.to_dict(), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    scenario = load_scenario(args.file)
    values = _parse_values(args.values)
    variants = [scenario.with_param(args.param, v) for v in values]
    reports = [run_scenario(s, args.tolerance, args.trials, args.seed) for s in variants]
    if args.csv:
        rows = [
            {"param": args.param, "value": v, "discard_probability": r.discard_probability,
             **{k: getattr(r.totals, k) for k in ("total_herald_rate", "fidelity", "purity")}}
            for v, r in zip(values, reports)
        ]
        args.csv.write_text(_csv_text(SWEEP_COLUMNS, rows), encoding="utf-8")
    _emit([r.to_dict() for r in reports], args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    results = run_checks(seed, args.filter)
    width = max((len(r.name) for r in results), default=10)
    lines = [f"seed {seed}"]
    for r in results:
        lines.append(f"{'PASS' if r.ok else 'FAIL'}  {r.name:<{width}}  {r.inputs:<5}  {r.detail}".rstrip())
    failed = [r for r in results if not r.ok]
    lines.append(f"{len(results) - len(failed)}/{len(results)} checks passed")
    print("\n".join(lines))
    if not results:
        print(f"no checks match filter {args.filter!r}", file=sys.stderr)
        return EXIT_VERIFY
    if failed:
        for r in failed:
            print(f"failed: {r.name} [{r.inputs}] {r.detail}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heraldshape",
        description="Simulate heralded single-photon shaping with entangled pairs.",
        epilog=f"Environment: {SEED_ENV} overrides the default seed ({FALLBACK_SEED}). "
               "Exit codes: 0 ok, 1 verification failure, 2 parse error, 3 physics error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("file", type=Path, help="scenario JSON file")
        p.add_argument("--out", type=Path, default=None, help="write the JSON report here")
        p.add_argument("--csv", type=Path, default=None, help="also write a CSV table here")
        p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials (enables sampling)")
        p.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
        p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE,
                       help="fidelity tolerance for the report's target_reached flags")

    run = sub.add_parser("run", help="evaluate one scenario")
    add_run_flags(run)
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="evaluate a scenario over a parameter list")
    add_run_flags(sweep)
    sweep.add_argument("--param", choices=("eta", "p"), required=True)
    sweep.add_argument("--values", nargs="*", default=[], help="comma- or space-separated values")
    sweep.set_defaults(func=_cmd_sweep)

    verify = sub.add_parser("verify", help="run the built-in invariant suite")
    verify.add_argument("--filter", default=None, help="only checks whose name contains this")
    verify.add_argument("--seed", type=int, default=None)
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ShapingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
