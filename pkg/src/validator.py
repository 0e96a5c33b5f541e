"""
Validator Module
Runs the fixture instances in data/fixtures against expected.json.

Each fixture names an instance file, the backend and precision to verify
with, and the expected exit code and verdict. A fixture passes when both
match, the stored verdict can be recomputed from the serialized trace, and
(when given) the residual lies within the stated tolerance of the expected
value.

Run with: python -m src.validator
"""

from typing import Any, Dict, List, Optional, TextIO, Union
from functools import partial
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
import json
import logging
import sys

from .arithmetic import NumericContext, bigfloat_context, scalar_from_json, to_bigfloat
from .data_loader import FIXTURES_DIR, load_json
from .exceptions import InstanceParseError
from .identities import verdict_from_report_dict
from .reporting import request_context, verify_instance_file

logger = logging.getLogger(__name__)

MANIFEST_NAME = "expected.json"


@dataclass
class ValidationResult:
    """
    Result of a single fixture.

    Attributes:
        id: Fixture identifier
        name: Fixture description
        expected: Expected exit code
        actual: Actual exit code
        match: Whether every check passed
        details: Verdicts, residual and the individual checks
    """
    id: str
    name: str
    expected: int
    actual: int
    match: bool
    details: Dict = field(default_factory=dict)


@dataclass
class ValidationReport:
    """
    Summary report of a validation run.

    Attributes:
        source: Manifest path
        total: Number of fixtures
        matches: Fixtures that passed
        mismatches: Fixtures that failed
        results: Individual results
        timestamp: When validation was run
    """
    source: str
    total: int
    matches: int
    mismatches: int
    results: List[ValidationResult]
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat())

    @property
    def accuracy(self) -> float:
        """Calculate accuracy percentage."""
        return (self.matches / self.total * 100) if self.total > 0 else 0.0

    @property
    def pass_rate(self) -> str:
        """Get pass rate as formatted string."""
        return f"{self.matches}/{self.total}"


# =============================================================================
# VALIDATION FUNCTIONS
# =============================================================================

def fixture_context(fixture: Dict[str, Any]) -> NumericContext:
    """NumericContext described by a manifest entry."""
    return request_context(
        fixture.get("backend", "bigfloat"),
        int(fixture.get("precision_bits", 128)),
        bool(fixture.get("escalate", False)),
    )


def _residual_within(document: Dict[str, Any], expected: str, tolerance_bits: int) -> bool:
    residual = document.get("residual")
    if residual is None:
        return False
    precision = document.get("precision_bits") or 53
    mp = bigfloat_context(max(precision, 53))
    value = to_bigfloat(scalar_from_json(residual, precision), mp)
    return abs(value - mp.mpf(expected)) <= mp.ldexp(1, -precision + tolerance_bits)


def validate_fixture(fixture: Dict[str, Any], fixtures_dir: Path) -> ValidationResult:
    """Verify one manifest entry and compare with its expectations."""
    ctx = fixture_context(fixture)
    outcome = verify_instance_file(fixtures_dir / fixture["file"], ctx)
    document = outcome.document

    checks = {"exit_code": outcome.exit_code == fixture["expected_exit"]}
    if "expected_verdict" in fixture:
        checks["verdict"] = document.get("verdict") == fixture["expected_verdict"]
    if outcome.report is not None:
        checks["trace_consistent"] = verdict_from_report_dict(document) == document["verdict"]
    if "expected_residual" in fixture:
        checks["residual"] = _residual_within(
            document, fixture["expected_residual"], int(fixture.get("tolerance_bits", 6))
        )

    details = {
        "file": fixture["file"],
        "backend": ctx.backend,
        "precision_bits": ctx.precision_bits,
        "expected_verdict": fixture.get("expected_verdict"),
        "actual_verdict": document.get("verdict"),
        "residual": document.get("residual"),
        "path": document.get("path"),
        "error": document.get("error"),
        "checks": checks,
    }
    return ValidationResult(
        id=fixture["id"],
        name=fixture.get("name", fixture["id"]),
        expected=fixture["expected_exit"],
        actual=outcome.exit_code,
        match=all(checks.values()),
        details=details,
    )


def validate_fixtures(manifest_path: Optional[Union[str, Path]] = None) -> ValidationReport:
    """
    Validate every fixture listed in the manifest.

    Args:
        manifest_path: expected.json (default: data/fixtures/expected.json)

    Returns:
        ValidationReport with detailed results

    Raises:
        InstanceParseError: manifest missing or malformed
    """
    path = Path(manifest_path) if manifest_path else FIXTURES_DIR / MANIFEST_NAME
    logger.info(f"Starting fixture validation from {path}")

    manifest = load_json(path)
    fixtures = manifest.get("fixtures") if isinstance(manifest, dict) else None
    if not isinstance(fixtures, list):
        raise InstanceParseError("expected an object with a 'fixtures' list", "$")

    results = [validate_fixture(fixture, path.parent) for fixture in fixtures]
    matches = sum(1 for r in results if r.match)

    logger.info(f"Fixture validation complete: {matches}/{len(results)} passed")

    return ValidationReport(
        source=str(path),
        total=len(results),
        matches=matches,
        mismatches=len(results) - matches,
        results=results,
    )


# =============================================================================
# REPORTING
# =============================================================================

def print_validation_report(report: ValidationReport, show_matches: bool = False, stream: Optional[TextIO] = None) -> None:
    """
    Print formatted validation report to console.

    Args:
        report: ValidationReport to print
        show_matches: Whether to show passing fixtures (default: False)
        stream: Destination (default: stdout)
    """
    out = partial(print, file=stream or sys.stdout)
    out(f"\n{'='*80}")
    out(f"{report.source} Validation Report")
    out(f"{'='*80}")
    out(f"Timestamp: {report.timestamp}")
    out(f"Results: {report.pass_rate} ({report.accuracy:.1f}% accuracy)")
    out(f"  ✓ Matches: {report.matches}")
    out(f"  ✗ Mismatches: {report.mismatches}")

    for r in report.results:
        if r.match and not show_matches:
            continue
        mark = "✓" if r.match else "✗"
        out(f"\n  {mark} {r.id}: {r.name}")
        out(f"      Exit code: expected {r.expected}, got {r.actual}")
        out(f"      Verdict: {r.details.get('actual_verdict')} (path: {r.details.get('path')})")
        failed = [name for name, ok in r.details.get("checks", {}).items() if not ok]
        if failed:
            out(f"      Failed checks: {', '.join(failed)}")
        if r.details.get("error"):
            out(f"      Error: {r.details['error']}")


def export_report_json(report: ValidationReport, filename: Union[str, Path]) -> None:
    """
    Export validation report to JSON file.

    Args:
        report: ValidationReport to export
        filename: Output filename
    """
    data = {
        "source": report.source,
        "timestamp": report.timestamp,
        "summary": {
            "total": report.total,
            "matches": report.matches,
            "mismatches": report.mismatches,
            "accuracy": report.accuracy,
        },
        "results": [
            {
                "id": r.id,
                "name": r.name,
                "expected": r.expected,
                "actual": r.actual,
                "match": r.match,
                "details": r.details,
            }
            for r in report.results
        ],
    }

    with open(filename, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)

    logger.info(f"Report exported to {filename}")


# =============================================================================
# MAIN EXECUTION
# =============================================================================

if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    report = validate_fixtures()
    print_validation_report(report, show_matches=True)
    exit(0 if report.mismatches == 0 else 1)
