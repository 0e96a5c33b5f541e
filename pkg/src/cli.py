"""
Command-line front end.

Commands:
    gen           generate an instance file
    verify        verify an instance file and write a report
    sweep         generate and verify many instances, write CSV
    check-joseph  evaluate the power-sum identity on a nodes file
    validate      run the fixture set against data/fixtures/expected.json

Run with: python -m src.cli <command> [options]

Logs go to stderr; stdout carries only machine-readable output.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from .arithmetic import BACKENDS, scalar_to_json
from .config import Settings, get_settings
from .data_loader import load_nodes, save_instance, serialize_instance, export_json
from .exceptions import DuplicateNode, InstanceParseError, UsageError, VerificationError
from .generator import DISTRIBUTIONS, generate_instance
from .identities import power_sum_identity
from .reporting import EXIT_DEGENERATE, EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, request_context, verify_instance_file
from .sweep import run_sweep, summarize_sweep
from .validator import export_report_json, print_validation_report, validate_fixtures

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this contract reserves 2 for degenerate input."""

    def error(self, message: str):
        raise UsageError(message)


# =============================================================================
# ARGUMENT HELPERS
# =============================================================================

def parse_params(items: Optional[Sequence[str]]) -> Dict[str, str]:
    """
    key=value pairs from repeated --param flags.

    Examples:
        >>> parse_params(["min_gap=0.01", "bound=20"])
        {'min_gap': '0.01', 'bound': '20'}
    """
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects key=value, got {item!r}")
        params[key.strip()] = value.strip()
    return params


def parse_n_range(text: str) -> List[int]:
    """
    Point counts: "8", "4,6,8" or an inclusive range "4:12:2".

    Examples:
        >>> parse_n_range("4:12:2")
        [4, 6, 8, 10, 12]
    """
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError(text)
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1:
                raise ValueError(text)
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise UsageError(f"bad point-count range {text!r}") from e
    if not values or any(n < 2 for n in values):
        raise UsageError(f"point counts must be ≥ 2, got {text!r}")
    return values


def _add_numeric_flags(parser: argparse.ArgumentParser, settings: Settings) -> None:
    parser.add_argument("--backend", choices=BACKENDS, default=settings.backend)
    parser.add_argument("--precision", type=int, default=settings.precision_bits, help="working precision in bits")
    parser.add_argument("--escalate", action="store_true", help="re-evaluate along the escalation schedule")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="mcdougall", description="Chord-product identity verification kernel")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    gen = commands.add_parser("gen", help="generate an instance file")
    gen.add_argument("--kind", choices=("circle", "line"), default="circle")
    gen.add_argument("--n", type=int, required=True, help="number of points")
    gen.add_argument("--dist", choices=DISTRIBUTIONS, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--radius", default="1")
    gen.add_argument("--param", action="append", help="distribution parameter key=value")
    gen.add_argument("--out", help="instance path (default: stdout)")

    verify = commands.add_parser("verify", help="verify an instance file")
    verify.add_argument("--in", dest="instance", required=True)
    _add_numeric_flags(verify, settings)
    verify.add_argument("--report", help="report path (default: stdout)")

    sweep = commands.add_parser("sweep", help="sweep generated instances")
    sweep.add_argument("--n", required=True, help='point counts: "8", "4,6,8" or "4:12:2"')
    sweep.add_argument("--trials", type=int, default=10)
    sweep.add_argument("--dist", choices=DISTRIBUTIONS, default="uniform")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--param", action="append", help="distribution parameter key=value")
    _add_numeric_flags(sweep, settings)
    sweep.add_argument("--workers", type=int, default=settings.sweep_workers)
    sweep.add_argument("--out", help="CSV path (default: stdout)")

    joseph = commands.add_parser("check-joseph", help="power-sum identity on a nodes file")
    joseph.add_argument("--in", dest="nodes", required=True)
    joseph.add_argument("--r", type=int, required=True)

    validate = commands.add_parser("validate", help="run the fixture set")
    validate.add_argument("--in", dest="manifest", help="fixture manifest (default: data/fixtures/expected.json)")
    validate.add_argument("--report", help="validation report path")

    return parser


# =============================================================================
# COMMANDS
# =============================================================================

def cmd_gen(args: argparse.Namespace, settings: Settings) -> int:
    instance = generate_instance(args.kind, args.n, args.dist, args.seed, parse_params(args.param), args.radius)
    if args.out:
        digest = save_instance(instance, args.out)
        logger.info(f"Instance digest {digest}")
    else:
        sys.stdout.write(serialize_instance(instance))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    ctx = request_context(args.backend, args.precision, args.escalate, settings.escalation_schedule)
    outcome = verify_instance_file(args.instance, ctx)
    if args.report:
        export_json(outcome.document, args.report)
    else:
        sys.stdout.write(json.dumps(outcome.document, indent=2) + "\n")
    return outcome.exit_code


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    ctx = request_context(args.backend, args.precision, args.escalate, settings.escalation_schedule)
    df = run_sweep(
        parse_n_range(args.n),
        args.trials,
        args.dist,
        args.seed,
        ctx,
        out_path=args.out,
        params=parse_params(args.param),
        workers=max(1, args.workers),
    )
    if not args.out:
        df.to_csv(sys.stdout, index=False)
    summary = summarize_sweep(df)
    logger.info(f"Sweep summary: {json.dumps(summary)}")
    return EXIT_OK


def joseph_expectation(count: int, r: int) -> Optional[int]:
    """0 for r ≤ N−2, 1 for r = N−1, None beyond."""
    if r <= count - 2:
        return 0
    if r == count - 1:
        return 1
    return None


def cmd_check_joseph(args: argparse.Namespace, settings: Settings) -> int:
    if args.r < 0:
        raise UsageError(f"--r must be ≥ 0, got {args.r}")
    nodes = load_nodes(args.nodes)
    try:
        value = power_sum_identity(nodes, args.r)
    except DuplicateNode as e:
        logger.error(f"Nodes are not distinct: {e}")
        sys.stdout.write(json.dumps({"n": len(nodes), "r": args.r, "error": str(e)}) + "\n")
        return EXIT_DEGENERATE

    expected = joseph_expectation(len(nodes), args.r)
    if expected is None:
        verdict = "computed"
    elif value == expected:
        verdict = f"exact-{'zero' if expected == 0 else 'one'}"
    else:
        verdict = "mismatch"
    result = {
        "n": len(nodes),
        "r": args.r,
        "value": scalar_to_json(value),
        "expected": expected,
        "verdict": verdict,
    }
    sys.stdout.write(json.dumps(result) + "\n")
    return EXIT_VIOLATED if verdict == "mismatch" else EXIT_OK


def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    report = validate_fixtures(args.manifest)
    print_validation_report(report, stream=sys.stderr)
    if args.report:
        export_report_json(report, args.report)
    summary = {"total": report.total, "matches": report.matches, "mismatches": report.mismatches}
    sys.stdout.write(json.dumps(summary) + "\n")
    return EXIT_OK if report.mismatches == 0 else EXIT_VIOLATED


COMMANDS = {
    "gen": cmd_gen,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "check-joseph": cmd_check_joseph,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point; returns the process exit code.

    Usage and parse errors return 3; verdicts return 0/1/2.
    """
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        args = build_parser(settings).parse_args(argv)
        return COMMANDS[args.command](args, settings)
    except (UsageError, InstanceParseError) as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except VerificationError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
