"""Command line: ``aces {plan,simulate,ingest,solve,resources,report}``.

A run lives in one output directory (``--out``).  ``plan`` creates it,
``simulate`` or ``ingest`` fills ``counts/``, ``solve`` writes the report and
CSVs.  Exit codes: 0 success, 2 configuration error, 3 coverage or schema
error, 4 rank failure.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

from . import __version__
from .archive import (
    estimates_to_dict,
    load_counts,
    load_noise_model,
    load_plan,
    read_json,
    save_counts,
    save_noise_model,
    save_plan,
    write_csvs,
    write_json,
    write_manifest,
)
from .config import ConfigError, RunConfig
from .protocol import (
    CoverageError,
    RankDeficientError,
    check_coverage,
    default_noise_model,
    estimate_all,
    execute,
    make_plan,
    resource_estimate,
    solve,
)
from .schemas import SchemaError

EXIT_OK, EXIT_CONFIG, EXIT_COVERAGE, EXIT_RANK = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _run_dir(args) -> Path:
    return Path(args.out or "aces_run")


def _load_run_plan(run: Path):
    path = run / "plan.json"
    if not path.exists():
        raise CliError(f"no plan at {path}; run 'aces plan' first", EXIT_CONFIG)
    return load_plan(path)


def cmd_plan(args) -> int:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    config = config.replace(seed=args.seed, shots_per_circuit=args.shots, out_dir=args.out)
    plan = make_plan(config)
    run = Path(config.out_dir)
    save_plan(plan, run / "plan.json")
    write_json(run / "config.json", config.to_dict())
    rows, cols = plan.design.matrix.shape
    gs = plan.gateset
    est = resource_estimate(config.n_qubits, len(gs.one_qubit), len(gs.two_qubit), 0.01)
    print(f"plan written to {run}")
    print(f"design matrix: {rows} rows x {cols} columns, rank {plan.design.rank.rank}, "
          f"condition {plan.design.rank.condition:.3g}, attempts {plan.design.attempts}")
    print(f"jobs: {len(plan.jobs)}")
    print(f"resource estimate: min independent rows {est['min_independent_rows']} (index has {cols})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    run = _run_dir(args)
    plan = _load_run_plan(run)
    source = args.noise_model or plan.config.noise_model
    if source:
        if not Path(source).exists():
            raise CliError(f"noise model file {source} not found", EXIT_CONFIG)
        model = load_noise_model(source)
    else:
        model = default_noise_model(plan.config)
    missing = [loc for loc in plan.index.locations() if loc not in model]
    if missing:
        raise CliError(f"noise model lacks locations {missing}", EXIT_CONFIG)
    counts = execute(plan, model)
    save_noise_model(model, run / "noise_model.json")
    counts_dir = run / "counts"
    if counts_dir.exists():
        shutil.rmtree(counts_dir)
    save_counts(counts, counts_dir)
    print(f"{len(counts)} counts files written to {counts_dir}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    run = _run_dir(args)
    plan = _load_run_plan(run)
    if not (args.directory or plan.config.ingest_dir):
        raise CliError("no counts directory given and ingest_dir is not set", EXIT_CONFIG)
    source = Path(args.directory or plan.config.ingest_dir)
    tables = load_counts(source)
    check_coverage(plan, tables)
    dest = run / "counts"
    if source.resolve() != dest.resolve():
        if dest.exists():
            shutil.rmtree(dest)
        save_counts(tables, dest)
    print(f"{len(tables)} counts files cover all {len(plan.jobs)} planned jobs")
    return EXIT_OK


def cmd_solve(args) -> int:
    run = _run_dir(args)
    plan = _load_run_plan(run)
    counts = load_counts(Path(args.counts) if args.counts else run / "counts")
    truth = None
    if args.truth:
        truth = load_noise_model(args.truth)
    elif not args.no_truth and (run / "noise_model.json").exists():
        truth = load_noise_model(run / "noise_model.json")
    estimates = estimate_all(plan, counts)
    report = solve(plan.design.matrix, estimates, truth=truth, weighted=args.weighted)
    report_dict = report.to_dict()
    write_json(run / "estimates.json", estimates_to_dict(plan, estimates))
    write_json(run / "report.json", report_dict)
    for stale in ("tvd.csv", "eigenvalue_errors.csv"):
        (run / stale).unlink(missing_ok=True)
    write_csvs(report_dict, run)
    write_manifest(run, plan.config)
    _print_summary(report_dict)
    return EXIT_OK


def cmd_resources(args) -> int:
    try:
        est = resource_estimate(args.n_qubits, args.g1, args.g2, args.epsilon)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from None
    if args.json:
        print(json.dumps(est, sort_keys=True))
    else:
        print(f"minimum independent rows: {est['min_independent_rows']}")
        print(f"shots per expectation (order): {est['shots_per_expectation_order']}")
        print(f"total measurements (order): {est['total_measurement_order']}")
    return EXIT_OK


def cmd_report(args) -> int:
    run = _run_dir(args)
    path = run / "report.json"
    if not path.exists():
        raise CliError(f"no report at {path}; run 'aces solve' first", EXIT_CONFIG)
    report = read_json(path, "report")
    if args.csv:
        write_csvs(report, run)
    _print_summary(report, detail=True)
    return EXIT_OK


def _print_summary(report: dict, detail: bool = False) -> None:
    rank = report["rank"]
    print(f"rank {rank['rank']}/{rank['n_columns']}, residual {report['residual_norm']:.4g}, "
          f"clamped rows {len(report['clamped_rows'])}")
    if detail:
        for ch in report["channels"]:
            probs = ch["channel"]["probs"]
            err = 1.0 - probs["I" * len(ch["qubits"])]
            line = f"  {ch['gate']:>3} on {tuple(ch['qubits'])}: error rate {err:.5f}"
            if "tvd" in ch:
                line += f", tvd {ch['tvd']:.5f}"
            print(line)
    if "summary" in report:
        s = report["summary"]
        print(f"mean eigenvalue abs error {s['mean_abs_error']:.5f}, mean tvd {s['mean_tvd']:.5f}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aces", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def run_args(sp):
        sp.add_argument("--out", help="run directory (default aces_run)")

    sp = sub.add_parser("plan", help="draw circuits, check rank, write job specs")
    sp.add_argument("--config", help="JSON config file")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--shots", type=int, help="shots per circuit")
    run_args(sp)
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("simulate", help="run planned jobs on the Pauli-frame simulator")
    sp.add_argument("--noise-model", help="noise model JSON (default: random model from the seed)")
    run_args(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("ingest", help="validate externally produced counts against the plan")
    sp.add_argument("directory", nargs="?", help="counts directory (default: ingest_dir from the config)")
    run_args(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("solve", help="estimate circuit eigenvalues and solve for gate noise")
    sp.add_argument("--counts", help="counts directory (default <out>/counts)")
    sp.add_argument("--truth", help="ground-truth noise model for error columns")
    sp.add_argument("--no-truth", action="store_true", help="ignore <out>/noise_model.json")
    sp.add_argument("--weighted", action="store_true", help="inverse-variance weighted fit")
    run_args(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("resources", help="rows and measurement budget for a device")
    sp.add_argument("--n-qubits", type=int, required=True)
    sp.add_argument("--g1", type=int, required=True)
    sp.add_argument("--g2", type=int, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_resources)

    sp = sub.add_parser("report", help="print a solved run and optionally rewrite its CSVs")
    sp.add_argument("--csv", action="store_true")
    run_args(sp)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        code = exc.code
        msg = str(exc)
    except ConfigError as exc:
        code, msg = EXIT_CONFIG, f"config error: {exc}"
    except (CoverageError, SchemaError, FileNotFoundError) as exc:
        code, msg = EXIT_COVERAGE, f"counts error: {exc}"
    except RankDeficientError as exc:
        code = EXIT_RANK
        msg = f"rank failure: {exc}\n{json.dumps(exc.diagnostics.to_dict(), indent=1)}"
    except ValueError as exc:
        code, msg = EXIT_CONFIG, f"error: {exc}"
    print(msg, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
