"""
Identities Module
Residuals for the chord-product identity on a circle, its collinear
counterpart, the two-sided complex form, and the Lagrange interpolation
identities they rest on.

Sign convention: residual = Σ_k (−1)^k / R_k over sorted 0-based indices,
i.e. the sum over the 1st, 3rd, ... points minus the sum over the 2nd,
4th, ... points.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .arithmetic import (
    DEGENERATE,
    IDENTITY_CONSISTENT,
    VIOLATED,
    GaussianRational,
    NumericContext,
    Verdict,
    classify_trace,
    escalate_precision,
    magnitude,
    scalar_from_json,
    scalar_to_json,
    to_bigfloat,
)
from .exceptions import (
    DegenerateConfiguration,
    DuplicateNode,
    EvaluationFailed,
    OddCount,
    ParityError,
)
from .geometry import (
    ChordProducts,
    CircleConfig,
    CollinearConfig,
    chord_products,
    line_products,
    unit_parameters,
)

logger = logging.getLogger(__name__)

SIGN_CONVENTION = "odd-minus-even"


# =============================================================================
# ALTERNATING SUMS
# =============================================================================

def alternating_reciprocal_sum(products: ChordProducts):
    """Σ_k (−1)^k / R_k in the backend of the products."""
    total = 0
    for k, reciprocal in enumerate(products.reciprocals()):
        total = total + reciprocal if k % 2 == 0 else total - reciprocal
    return total


def mcdougall_residual(products: ChordProducts):
    """
    Odd-class sum minus even-class sum of 1/R_k for an even point count.

    Zero for every sorted configuration of 2n points on a circle.

    Raises:
        OddCount: odd point count (use odd_circle_control instead)

    Examples:
        >>> from .geometry import Angle, normalize_circle
        >>> square = normalize_circle([Angle.pi(k, 4) for k in range(4)])
        >>> abs(mcdougall_residual(chord_products(square))) < 1e-30
        True
    """
    if products.count % 2:
        raise OddCount(f"identity needs an even number of points, got {products.count}")
    return alternating_reciprocal_sum(products)


def odd_circle_control(config: CircleConfig, ctx: Optional[NumericContext] = None):
    """
    The same alternating sum for an odd number of circle points.

    Generically nonzero: 1/3 for the equilateral triangle on the unit circle.

    Raises:
        ParityError: even count, or fewer than three points
    """
    if config.is_even or config.count < 3:
        raise ParityError(f"odd control needs an odd count of at least 3 points, got {config.count}")
    return alternating_reciprocal_sum(chord_products(config, ctx))


def collinear_residual(config: CollinearConfig, ctx: Optional[NumericContext] = None):
    """
    Alternating sum of 1/R_k for points on a line, R_k = ∏_{j≠k} |x_j − x_k|.

    Zero for every N ≥ 2, even or odd. Sorting fixes the sign of each
    ∏_{j≠k}(x_k − x_j) as (−1)^(N−1−k), so this sum equals
    (−1)^(N−1)·power_sum_identity(positions, 0).

    Examples:
        >>> from .geometry import normalize_line
        >>> collinear_residual(normalize_line([0, 1, 2]))
        Fraction(0, 1)
    """
    return alternating_reciprocal_sum(line_products(config, ctx))


# =============================================================================
# COMPLEX FORM
# =============================================================================

def _power_of_i(exponent: int, mp):
    """(√−1)^exponent without rounding."""
    return [mp.mpc(1, 0), mp.mpc(0, 1), mp.mpc(-1, 0), mp.mpc(0, -1)][exponent % 4]


def jane_terms(config: CircleConfig, ctx: Optional[NumericContext] = None) -> List[Tuple[Any, Any]]:
    """
    Per-point terms of the complex form, before summation.

    For each sorted point k:
        left_k  = (−√−1)^(2n−1) · (−1)^k / R_k
        right_k = (∏_j u_j) · u_k^(2n−2) / ∏_{j≠k}(u_j² − u_k²)

    left_k == right_k for every k pins the sign constant relating the
    alternating sum to the rational function of the u_k.

    Raises:
        OddCount: odd point count
        DegenerateConfiguration: two u_k² coincide
    """
    ctx = (ctx or NumericContext()).with_backend("bigfloat")
    if not config.is_even:
        raise OddCount(f"complex form needs an even number of points, got {config.count}")
    n = config.count // 2
    mp = ctx.mp

    reciprocals = chord_products(config, ctx).reciprocals()
    u = unit_parameters(config, ctx).values
    squares = [value * value for value in u]
    prefactor = mp.fprod(u)
    minus_i_power = _power_of_i(3 * (2 * n - 1), mp)

    terms = []
    for k in range(config.count):
        denominator = mp.mpc(1)
        for j in range(config.count):
            if j != k:
                denominator *= squares[j] - squares[k]
        if denominator == 0:
            raise DegenerateConfiguration(f"u² values of points {k} and another coincide")
        left = minus_i_power * (reciprocals[k] if k % 2 == 0 else -reciprocals[k])
        right = prefactor * u[k] ** (2 * n - 2) / denominator
        terms.append((left, right))
    return terms


def jane_sides(config: CircleConfig, ctx: Optional[NumericContext] = None) -> Tuple[Any, Any]:
    """
    Both sides of the complex form of the identity.

    lhs = (√−1)^(2n−1) · Σ_{i=1}^{2n} (−1)^i / R_i   (1-based i)
    rhs = (∏_j u_j) · Σ_i u_i^(2n−2) / ∏_{j≠i}(u_j² − u_i²)

    Both are complex big-floats at the context precision and both vanish.
    """
    terms = jane_terms(config, ctx)
    lhs = sum((left for left, _ in terms[1:]), terms[0][0])
    rhs = sum((right for _, right in terms[1:]), terms[0][1])
    return lhs, rhs


def _as_gaussian(value: Any) -> GaussianRational:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return GaussianRational(value)
    raise TypeError(f"expected a Gaussian rational, got {type(value).__name__}")


def exact_jane_rhs(z_values: Sequence[Any], n: int) -> GaussianRational:
    """
    Σ_i z_i^(n−1) / ∏_{j≠i}(z_j − z_i) over 2n unit Gaussian rationals, exactly.

    Vanishes for every admissible input; the nonzero ∏ u_j prefactor of the
    complex form is left out.

    Raises:
        ValueError: wrong count, or some |z_i| ≠ 1
        DuplicateNode: two z_i coincide

    Examples:
        >>> from .arithmetic import rational_circle_point
        >>> exact_jane_rhs([rational_circle_point(m) for m in range(4)], 2)
        GaussianRational(0, 0)
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    z = [_as_gaussian(value) for value in z_values]
    if len(z) != 2 * n:
        raise ValueError(f"expected {2 * n} points, got {len(z)}")
    for index, value in enumerate(z):
        if value.norm() != 1:
            raise ValueError(f"z[{index}] = {value} is not on the unit circle")
    _check_distinct(z)

    total = GaussianRational(0)
    for i, z_i in enumerate(z):
        denominator = GaussianRational(1)
        for j, z_j in enumerate(z):
            if j != i:
                denominator *= z_j - z_i
        total += z_i ** (n - 1) / denominator
    return total


# =============================================================================
# INTERPOLATION
# =============================================================================

def _check_distinct(nodes: Sequence[Any]) -> None:
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if nodes[i] == nodes[j]:
                raise DuplicateNode(f"nodes {i} and {j} coincide: {nodes[i]}")


@dataclass(frozen=True)
class InterpolationProblem:
    """
    Samples of a polynomial at distinct nodes.

    Attributes:
        nodes: Pairwise-distinct z_1..z_N (Fractions, Gaussian rationals or big-floats)
        values: P(z_1)..P(z_N)
    """
    nodes: Tuple[Any, ...]
    values: Tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "values", tuple(self.values))
        if not self.nodes:
            raise ValueError("interpolation needs at least one node")
        if len(self.nodes) != len(self.values):
            raise ValueError(f"{len(self.nodes)} nodes but {len(self.values)} values")
        _check_distinct(self.nodes)


def barycentric_weights(nodes: Sequence[Any]) -> List[Any]:
    """w_i = 1 / ∏_{j≠i}(z_i − z_j)."""
    _check_distinct(nodes)
    weights = []
    for i, z_i in enumerate(nodes):
        denominator = 1
        for j, z_j in enumerate(nodes):
            if j != i:
                denominator = denominator * (z_i - z_j)
        weights.append(Fraction(1, denominator) if isinstance(denominator, int) else 1 / denominator)
    return weights


def lagrange_interpolate(problem: InterpolationProblem, z: Any):
    """
    Value at z of the degree ≤ N−1 interpolant.

    Uses Σ_i w_i·P(z_i)·∏_{k≠i}(z − z_k), which is exact over Fractions and
    Gaussian rationals and returns P(z_i) verbatim at a node.

    Examples:
        >>> problem = InterpolationProblem((0, 1, 2), (0, 1, 4))
        >>> lagrange_interpolate(problem, 3)
        Fraction(9, 1)
    """
    for node, value in zip(problem.nodes, problem.values):
        if node == z:
            return value

    weights = barycentric_weights(problem.nodes)
    total = 0
    for i, (weight, value) in enumerate(zip(weights, problem.values)):
        basis = weight
        for k, node in enumerate(problem.nodes):
            if k != i:
                basis = basis * (z - node)
        total = total + basis * value
    return total


def power_sum_identity(nodes: Sequence[Any], r: int):
    """
    Σ_i z_i^r / ∏_{j≠i}(z_i − z_j).

    0 for r ≤ N−2 and 1 for r = N−1; for r ≥ N the value is the complete
    homogeneous symmetric polynomial of degree r−N+1 in the nodes.

    Raises:
        ValueError: no nodes, or r negative
        DuplicateNode: two nodes coincide

    Examples:
        >>> power_sum_identity([1, 2, 3], 0)
        Fraction(0, 1)
        >>> power_sum_identity([1, 2, 3], 2)
        Fraction(1, 1)
    """
    if not nodes:
        raise ValueError("power sum needs at least one node")
    if isinstance(r, bool) or not isinstance(r, int) or r < 0:
        raise ValueError(f"r must be a nonnegative integer, got {r!r}")
    total = 0
    for z_i, weight in zip(nodes, barycentric_weights(nodes)):
        total = total + z_i ** r * weight
    return total


# =============================================================================
# VERIFICATION REPORTS
# =============================================================================

@dataclass
class ResidualReport:
    """
    Outcome of verify_identity.

    Attributes:
        verdict: identity-consistent | violated | degenerate
        residual: Final residual (None when degenerate)
        relative_residual: |residual| / scale
        precision_bits: Precision of the final step (None for exact backends)
        condition: min_gap, min_chord, max_reciprocal
        trace: (precision_bits, residual, relative_residual) per step
        scale: Σ_k 1/R_k
        slope: Fitted log2-decay per bit, when two or more steps ran
        backend: Backend actually used
        path: Which identity was evaluated
        convention: Sign convention of the residual
        warnings: Conditioning and fallback notes
        error: Error text for degenerate inputs
    """
    verdict: Verdict
    residual: Any = None
    relative_residual: Any = None
    precision_bits: Optional[int] = None
    condition: Dict[str, Any] = field(default_factory=dict)
    trace: List[Tuple[Optional[int], Any, Any]] = field(default_factory=list)
    scale: Any = None
    slope: Optional[float] = None
    backend: str = "bigfloat"
    path: str = ""
    convention: str = SIGN_CONVENTION
    warnings: List[str] = field(default_factory=list)
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready form; every number serialized losslessly."""

        def encode(value, precision=None):
            return None if value is None else scalar_to_json(value, precision)

        return {
            "verdict": self.verdict,
            "residual": encode(self.residual, self.precision_bits),
            "relative_residual": encode(self.relative_residual, self.precision_bits),
            "precision_bits": self.precision_bits,
            "scale": encode(self.scale),
            "slope": self.slope,
            "backend": self.backend,
            "path": self.path,
            "convention": self.convention,
            "condition": {key: encode(value) for key, value in self.condition.items()},
            "trace": [
                {
                    "precision_bits": precision,
                    "residual": encode(residual, precision),
                    "relative_residual": encode(relative, precision),
                }
                for precision, residual, relative in self.trace
            ],
            "warnings": list(self.warnings),
            "error": self.error,
        }


def verdict_from_trace(trace: Sequence[Tuple[Optional[int], Any]], scale: Any) -> Verdict:
    """
    Re-apply the decision rule to (precision, residual) pairs.

    Exact steps (precision None) decide by an exact zero test; an empty
    trace means the input never produced a residual.
    """
    if not trace:
        return DEGENERATE
    if any(precision is None for precision, _ in trace):
        return IDENTITY_CONSISTENT if all(magnitude(r) == 0 for _, r in trace) else VIOLATED
    verdict, _ = classify_trace([(precision, magnitude(r)) for precision, r in trace], scale)
    return verdict


def verdict_from_report_dict(report: Dict[str, Any]) -> Verdict:
    """Recompute the verdict of a serialized ResidualReport from its trace."""
    steps = []
    for step in report.get("trace", []):
        precision = step["precision_bits"]
        residual = scalar_from_json(step["residual"], precision or 53)
        steps.append((precision, residual))
    scale = report.get("scale")
    scale = scalar_from_json(scale) if scale is not None else 1
    return verdict_from_trace(steps, scale)


def _relative(size, scale):
    if isinstance(size, Fraction) and isinstance(scale, Fraction):
        return size / scale
    mp = scale.context if hasattr(scale, "context") else None
    if mp is None:
        return size / scale
    return to_bigfloat(size, mp) / scale


def _condition(products: ChordProducts) -> Dict[str, Any]:
    return {
        "min_gap": products.min_gap,
        "min_chord": products.min_chord,
        "max_reciprocal": products.max_reciprocal(),
    }


def _degenerate_report(exc: Exception, ctx: NumericContext, path: str, warnings: List[str]) -> ResidualReport:
    precision = getattr(exc, "precision", None)
    cause = exc.__cause__ if isinstance(exc, EvaluationFailed) else exc
    logger.warning(f"Degenerate input on path {path}: {cause}")
    return ResidualReport(
        verdict=DEGENERATE,
        precision_bits=precision if precision is not None else (None if ctx.is_exact else ctx.precision_bits),
        backend=ctx.backend,
        path=path,
        warnings=warnings,
        error=str(cause),
    )


def _exact_report(residual, scale, products: ChordProducts, ctx: NumericContext, path: str, warnings) -> ResidualReport:
    size = magnitude(residual)
    relative = _relative(size, scale)
    verdict = IDENTITY_CONSISTENT if size == 0 else VIOLATED
    return ResidualReport(
        verdict=verdict,
        residual=residual,
        relative_residual=relative,
        precision_bits=None,
        condition=_condition(products),
        trace=[(None, residual, relative)],
        scale=scale,
        backend=ctx.backend,
        path=path,
        warnings=warnings,
    )


def _escalated_report(evaluate, products_at, ctx: NumericContext, path: str, warnings) -> ResidualReport:
    first = products_at(ctx.escalation_schedule[0])
    scale = first.scale()
    if first.conditioning_warning:
        warnings.append(f"min half-angle gap {first.min_gap} below conditioning threshold")

    result = escalate_precision(evaluate, ctx, scale)
    final = result.final
    trace = [(step.precision_bits, step.residual, _relative(step.magnitude, scale)) for step in result.steps]
    return ResidualReport(
        verdict=result.verdict,
        residual=final.residual,
        relative_residual=trace[-1][2],
        precision_bits=final.precision_bits,
        condition=_condition(products_at(final.precision_bits)),
        trace=trace,
        scale=scale,
        slope=result.slope,
        backend=ctx.backend,
        path=path,
        warnings=warnings,
    )


def verify_identity(
    config: Union[CircleConfig, CollinearConfig],
    ctx: Optional[NumericContext] = None,
) -> ResidualReport:
    """
    Evaluate the identity that applies to config and classify the residual.

    Routing:
        line, exact backend      → collinear_residual once, exactly
        line, float backends     → collinear_residual under escalation
        circle with m-parameters, even, exact backend → exact_jane_rhs
        circle, exact backend otherwise → falls back to bigfloat (noted in warnings)
        circle, even             → mcdougall_residual under escalation
        circle, odd              → odd_circle_control under escalation

    Degenerate inputs return verdict "degenerate" instead of raising.

    Examples:
        >>> from .geometry import Angle, normalize_circle
        >>> square = normalize_circle([Angle.pi(k, 4) for k in range(4)])
        >>> verify_identity(square).verdict
        'identity-consistent'
    """
    ctx = ctx or NumericContext()
    warnings: List[str] = []

    if isinstance(config, CollinearConfig):
        path = "collinear"
    elif config.is_even:
        path = "mcdougall"
    else:
        path = "odd-control"

    if config.count < 2:
        exc = DegenerateConfiguration(f"a configuration needs at least two points, got {config.count}")
        return _degenerate_report(exc, ctx, path, warnings)

    if isinstance(config, CircleConfig) and ctx.is_exact:
        if config.is_even and config.m_parameters is not None:
            path = "exact-jane"
        else:
            message = f"backend {ctx.backend} has no exact chord products on a circle; using bigfloat"
            logger.warning(message)
            warnings.append(message)
            ctx = ctx.with_backend("bigfloat")

    cache: Dict[int, ChordProducts] = {}

    def products_at(precision: int) -> ChordProducts:
        if precision not in cache:
            local = ctx.at(precision)
            if isinstance(config, CollinearConfig):
                cache[precision] = line_products(config, local)
            else:
                cache[precision] = chord_products(config, local)
        return cache[precision]

    def evaluate(precision: int):
        return alternating_reciprocal_sum(products_at(precision))

    try:
        if path == "exact-jane":
            products = chord_products(config, ctx.with_backend("bigfloat"))
            residual = exact_jane_rhs(config.unit_points(), config.count // 2)
            report = _exact_report(residual, products.scale(), products, ctx, path, warnings)
        elif path == "collinear" and ctx.is_exact:
            products = line_products(config, ctx)
            residual = alternating_reciprocal_sum(products)
            report = _exact_report(residual, products.scale(), products, ctx, path, warnings)
        else:
            report = _escalated_report(evaluate, products_at, ctx, path, warnings)
    except DegenerateConfiguration as exc:
        return _degenerate_report(exc, ctx, path, warnings)
    except EvaluationFailed as exc:
        if isinstance(exc.__cause__, DegenerateConfiguration):
            return _degenerate_report(exc, ctx, path, warnings)
        raise

    logger.info(f"{path} residual on {config.count} points: {report.verdict}")
    return report
