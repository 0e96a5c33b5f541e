"""
Report Assembly
Runs an instance file through verification and builds the report document
plus the process exit code.

Exit codes:
    0  identity-consistent
    1  violated
    2  degenerate input
    3  usage or parse error
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

from .arithmetic import DEFAULT_SCHEDULE, DEGENERATE, IDENTITY_CONSISTENT, VIOLATED, NumericContext
from .data_loader import Instance, instance_digest, load_instance
from .exceptions import DegenerateConfiguration, InstanceParseError
from .identities import ResidualReport, verify_identity

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_DEGENERATE = 2
EXIT_USAGE = 3

VERDICT_EXIT_CODES = {
    IDENTITY_CONSISTENT: EXIT_OK,
    VIOLATED: EXIT_VIOLATED,
    DEGENERATE: EXIT_DEGENERATE,
}


def request_context(
    backend: str,
    precision_bits: int,
    escalate: bool = False,
    schedule: Sequence[int] = DEFAULT_SCHEDULE,
) -> NumericContext:
    """
    Context for a verification request.

    Without escalation the residual is evaluated once at precision_bits;
    with it, precision_bits is followed by every larger schedule entry.

    Raises:
        UsageError: unknown backend or precision outside [24, 4096]
    """
    steps = (precision_bits,)
    if escalate:
        steps += tuple(p for p in schedule if p > precision_bits)
    return NumericContext(backend=backend, precision_bits=precision_bits, escalation_schedule=steps)


@dataclass
class VerifyOutcome:
    """
    Result of verifying one instance file.

    Attributes:
        exit_code: Process exit code for the verdict (or 3 on parse errors)
        document: Report document ready for JSON export
        report: ResidualReport, None when the file did not parse
    """
    exit_code: int
    document: Dict[str, Any]
    report: Optional[ResidualReport] = None


def build_report_document(
    instance: Instance,
    report: ResidualReport,
    ctx: NumericContext,
    timings: Dict[str, float],
) -> Dict[str, Any]:
    """Report file contents: instance digest, request, residual report, timings."""
    return {
        "instance": {
            "digest": instance_digest(instance),
            "kind": instance.kind,
            "count": instance.count,
            "generator": instance.generator,
        },
        "request": {
            "backend": ctx.backend,
            "precision_bits": ctx.precision_bits,
            "schedule": list(ctx.escalation_schedule),
        },
        **report.to_dict(),
        "timings": {key: round(value, 6) for key, value in timings.items()},
    }


def verify_instance(instance: Instance, ctx: NumericContext) -> ResidualReport:
    """Normalize and verify; coincident points come back as a degenerate report."""
    try:
        config = instance.to_config(ctx)
    except DegenerateConfiguration as e:
        logger.warning(f"Degenerate instance: {e}")
        return ResidualReport(
            verdict=DEGENERATE,
            precision_bits=None if ctx.is_exact else ctx.precision_bits,
            backend=ctx.backend,
            path="normalize",
            error=str(e),
        )
    return verify_identity(config, ctx)


def verify_instance_file(path: Union[str, Path], ctx: NumericContext) -> VerifyOutcome:
    """
    Load, verify and report on one instance file.

    Never raises for bad input: parse errors map to exit code 3 and
    degenerate inputs to exit code 2.
    """
    start = time.perf_counter()
    try:
        instance = load_instance(path)
    except InstanceParseError as e:
        logger.error(f"Cannot parse {path}: {e}")
        document = {"verdict": None, "error": str(e), "location": e.location}
        return VerifyOutcome(EXIT_USAGE, document)
    parsed = time.perf_counter()

    report = verify_instance(instance, ctx)
    done = time.perf_counter()

    timings = {"parse_s": parsed - start, "verify_s": done - parsed, "total_s": done - start}
    document = build_report_document(instance, report, ctx, timings)
    logger.info(f"Verdict for {path}: {report.verdict}")
    return VerifyOutcome(VERDICT_EXIT_CODES[report.verdict], document, report)
