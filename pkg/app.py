# app.py
"""
Command-line entry point for quasimode experiments.

Commands:
- run <config.json>: sweep h, fit decay orders, write CSV/JSON/SVG results
- list-cases: print the case/condition table
- check-exponents <j> <kappa> <lambda> <mu>: order of a conjugated-operator term
- check-remainders <j> <k> [--beta]: live remainder orders of a tangential model

Exit codes: 0 success, 1 domain or config error, 2 verdict differs from the expected one
(or, for check-remainders, some remainder does not decay).
"""
import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from config.constants import CASE_TABLE, CONDITION_COLUMNS, DEFAULT_BETA
from src.api.schemas import ExperimentConfig, format_validation_error, load_config
from src.models.exponent_calculus import check_remainders, expansion_term_orders, export_term_table, remainder_order
from src.models.operator_engine import Grid
from src.models.quasimode_builder import build_quasimode, dump_field
from src.services.results_store import ResultsStore
from src.services.verification_harness import VerdictKind, oracle_crosscheck, run_experiment
from src.utils.logger import setup_logger
from src.utils.validators import QuasimodeError, UnsupportedCaseError

logger = logging.getLogger("src.app")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2


# =============================================================================
# COMMANDS
# =============================================================================

def run_command(args: argparse.Namespace) -> int:
    """Run one experiment file end to end."""
    try:
        config = load_config(args.config)
    except ValidationError as exc:
        print(f"invalid config {args.config}:\n{format_validation_error(exc)}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_ERROR

    out_dir = Path(args.out or config.output_dir)
    expect = VerdictKind(args.expect) if args.expect else config.expect

    try:
        sweep = config.to_sweep_config(grid=args.grid, jobs=args.jobs)
        condition = config.condition_report()
        logger.info(
            f"Running {config.name}: {config.case.value} j={config.j} k={config.k} beta={config.beta} "
            f"condition={condition['condition']} t*={condition['origin_shift']:.6g}"
        )
        result = run_experiment(sweep)
        oracle = None
        if config.oracle is not None:
            oracle = oracle_crosscheck(
                sweep.spec,
                sweep.recipe,
                Grid(config.oracle.points),
                tuple(2.0 ** -e for e in config.oracle.h_exponents),
                sweep.thresholds,
                seed=config.seed,
            )
        store = ResultsStore(out_dir)
        written = store.write(result, config.name, config.resolved(), oracle, condition)
        written.extend(_extra_artifacts(config, sweep, out_dir, args.dump_field))
    except QuasimodeError as exc:
        print(f"{config.name}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    verdict = result.verdict
    print(f"{config.name}: {verdict.kind.value} ({verdict.reason})")
    for n, slope in verdict.slope_by_n.items():
        print(f"  N={n}: slope {slope:.4f}")
    if oracle is not None:
        for note in oracle.notes:
            print(f"  note: {note}")
    for path in written:
        logger.info(f"  wrote {path}")

    if expect is not None and verdict.kind is not expect:
        print(f"expected {expect.value}, got {verdict.kind.value}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _extra_artifacts(config: ExperimentConfig, sweep, out_dir: Path, dump: bool) -> List[Path]:
    written = []
    try:
        table = expansion_term_orders(sweep.spec, sweep.recipe.params)
        written.append(export_term_table(table, Fraction(config.beta), out_dir / f"{config.name}_terms.csv"))
    except UnsupportedCaseError as exc:
        logger.info(f"No term table for {config.name}: {exc}")
    if dump:
        path = sweep.primary_path
        h = sweep.h_values[0]
        v = build_quasimode(sweep.recipe, sweep.grid_for(path), h)
        written.extend(dump_field(v, out_dir / f"{config.name}_quasimode.csv"))
    return written


def list_cases_command(args: argparse.Namespace) -> int:
    print(format_case_table())
    return EXIT_OK


def format_case_table() -> str:
    """Rows Transversal/Tangential/Factorable against the condition columns."""
    width = max(len(row) for row in CASE_TABLE) + 2
    cell = max(len(c) for c in CONDITION_COLUMNS + ["implemented"]) + 2
    lines = ["".ljust(width) + "".join(c.ljust(cell) for c in CONDITION_COLUMNS)]
    for row, marks in CASE_TABLE.items():
        lines.append(row.ljust(width) + "".join((marks[c] or "-").ljust(cell) for c in CONDITION_COLUMNS))
    return "\n".join(line.rstrip() for line in lines)


def check_exponents_command(args: argparse.Namespace) -> int:
    try:
        order = remainder_order(args.kappa, args.lam, args.mu, args.j)
    except QuasimodeError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(order)
    return EXIT_OK


def check_remainders_command(args: argparse.Namespace) -> int:
    try:
        report = check_remainders(args.j, args.k, args.beta)
    except QuasimodeError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for label, order in report.orders.items():
        print(f"{label}: {order}")
    print(f"dominant: {report.dominant.order} ({', '.join(report.dominant.labels)})")
    print(f"beta bound: {report.beta_bound}")
    return EXIT_OK if report.all_positive else EXIT_MISMATCH


# =============================================================================
# MAIN
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasimodes", description=__doc__.split("\n\n")[0].strip())
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run an experiment config")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, help="output directory (overrides the config)")
    run.add_argument("--grid", type=int, help="points per axis for every path")
    run.add_argument("--jobs", type=int, help="parallel sweep workers")
    run.add_argument("--expect", choices=[v.value for v in VerdictKind], help="verdict the run must produce")
    run.add_argument("--dump-field", action="store_true", help="also dump the quasimode at the largest h")
    run.set_defaults(handler=run_command)

    cases = commands.add_parser("list-cases", help="print the case/condition table")
    cases.set_defaults(handler=list_cases_command)

    exponents = commands.add_parser("check-exponents", help="h-order of xi2^kappa D1^lambda D2^mu a")
    exponents.add_argument("j", type=int)
    exponents.add_argument("kappa", type=int)
    exponents.add_argument("lam", metavar="lambda", type=int)
    exponents.add_argument("mu", type=int)
    exponents.set_defaults(handler=check_exponents_command)

    remainders = commands.add_parser("check-remainders", help="live remainder orders of the tangential (j, k) model")
    remainders.add_argument("j", type=int)
    remainders.add_argument("k", type=int)
    remainders.add_argument("--beta", default=str(DEFAULT_BETA), help="scaling exponent, e.g. 1/8")
    remainders.set_defaults(handler=check_remainders_command)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        setup_logger()
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
