"""
Arithmetic Backends
Exact rationals, Gaussian rationals, big-floats and outward-rounded intervals,
plus signed log-space products and the precision-escalation driver.

Backends:
- exact:     fractions.Fraction
- gaussian:  GaussianRational (pairs of Fractions)
- bigfloat:  mpmath mpf from a per-precision MPContext
- interval:  mpmath interval numbers from a per-precision MPIntervalContext

Each precision gets its own mpmath context object, so no global mpmath state
is ever mutated and values from different threads never interfere.
"""

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, List, Literal, Optional, Sequence, Tuple, Union, get_args

from mpmath.ctx_iv import MPIntervalContext
from mpmath.ctx_mp import MPContext
from mpmath.libmp import from_rational, to_str

from .exceptions import EvaluationFailed, UsageError

logger = logging.getLogger(__name__)

Backend = Literal["exact", "gaussian", "bigfloat", "interval"]
Verdict = Literal["identity-consistent", "violated", "degenerate"]

BACKENDS: Tuple[str, ...] = get_args(Backend)
EXACT_BACKENDS = ("exact", "gaussian")

IDENTITY_CONSISTENT: Verdict = "identity-consistent"
VIOLATED: Verdict = "violated"
DEGENERATE: Verdict = "degenerate"

# =============================================================================
# PRECISION POLICY
# =============================================================================

MIN_PRECISION_BITS = 24
MAX_PRECISION_BITS = 4096
DEFAULT_SCHEDULE: Tuple[int, ...] = (64, 128, 256, 512, 1024, 2048, 4096)

DECISION_SLOPE = -0.5        # log2|residual| per bit of precision
ROUNDING_SLACK_BITS = 8      # residual below 2^(-p+8)*scale counts as rounding noise
VIOLATION_FLOOR_BITS = 32    # residual above 2^(-32)*scale counts as a real violation
CLASSIFY_PRECISION = 53      # precision used for comparing residual magnitudes

ExactRational = Fraction


def _check_precision(precision_bits: int) -> int:
    if not isinstance(precision_bits, int) or isinstance(precision_bits, bool):
        raise UsageError(f"precision must be an integer number of bits, got {precision_bits!r}")
    if not MIN_PRECISION_BITS <= precision_bits <= MAX_PRECISION_BITS:
        raise UsageError(
            f"precision {precision_bits} outside [{MIN_PRECISION_BITS}, {MAX_PRECISION_BITS}] bits"
        )
    return precision_bits


@lru_cache(maxsize=None)
def bigfloat_context(precision_bits: int) -> MPContext:
    """
    Return the shared mpmath context for a precision.

    Values created through the context (ctx.mpf, ctx.sin, ...) are correctly
    rounded at that precision. The cap is not enforced here because internal
    callers use guard bits above the user-facing cap.
    """
    ctx = MPContext()
    ctx.prec = precision_bits
    return ctx


@lru_cache(maxsize=None)
def interval_context(precision_bits: int) -> MPIntervalContext:
    """Return the shared outward-rounding interval context for a precision."""
    ctx = MPIntervalContext()
    ctx.prec = precision_bits
    return ctx


# =============================================================================
# NUMERIC CONTEXT
# =============================================================================

@dataclass(frozen=True)
class NumericContext:
    """
    Backend selector and precision policy.

    Attributes:
        backend: exact | gaussian | bigfloat | interval
        precision_bits: Working precision for bigfloat/interval evaluation
        escalation_schedule: Strictly increasing precisions for escalation
    """
    backend: Backend = "bigfloat"
    precision_bits: int = 128
    escalation_schedule: Tuple[int, ...] = DEFAULT_SCHEDULE

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise UsageError(f"unknown backend '{self.backend}' (expected one of {', '.join(BACKENDS)})")
        _check_precision(self.precision_bits)
        schedule = tuple(self.escalation_schedule)
        if not schedule:
            raise UsageError("escalation schedule must not be empty")
        for bits in schedule:
            _check_precision(bits)
        if any(a >= b for a, b in zip(schedule, schedule[1:])):
            raise UsageError(f"escalation schedule must be strictly increasing: {schedule}")
        object.__setattr__(self, "escalation_schedule", schedule)

    @property
    def is_exact(self) -> bool:
        return self.backend in EXACT_BACKENDS

    @property
    def mp(self) -> MPContext:
        """Big-float context at this precision."""
        return bigfloat_context(self.precision_bits)

    @property
    def iv(self) -> MPIntervalContext:
        """Interval context at this precision."""
        return interval_context(self.precision_bits)

    def at(self, precision_bits: int) -> "NumericContext":
        """Same backend and schedule, different working precision."""
        return replace(self, precision_bits=precision_bits)

    def fixed(self, precision_bits: Optional[int] = None) -> "NumericContext":
        """Context that evaluates once, at a single precision."""
        bits = self.precision_bits if precision_bits is None else precision_bits
        return replace(self, precision_bits=bits, escalation_schedule=(bits,))

    def with_backend(self, backend: Backend) -> "NumericContext":
        return replace(self, backend=backend)


# =============================================================================
# CONVERSIONS
# =============================================================================

def to_bigfloat(value: Any, ctx: MPContext):
    """
    Convert an int, Fraction, float, decimal string, GaussianRational or
    mpmath number to ctx, rounding once at the context precision.
    """
    if isinstance(value, Fraction):
        return ctx.make_mpf(from_rational(value.numerator, value.denominator, ctx.prec, "n"))
    if isinstance(value, GaussianRational):
        return ctx.mpc(to_bigfloat(value.re, ctx), to_bigfloat(value.im, ctx))
    if hasattr(value, "_mpc_") or isinstance(value, complex):
        return ctx.mpc(value)
    if hasattr(value, "_mpi_"):
        lo, hi = interval_bounds(value)
        return ctx.mpf(lo + hi) / 2
    return ctx.mpf(value)


def to_interval(value: Any, ctx: MPIntervalContext):
    """Convert a real scalar to an interval that encloses it."""
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    if hasattr(value, "_mpi_"):
        lo, hi = interval_bounds(value)
        return ctx.mpf([lo, hi])
    return ctx.mpf(value)


def interval_bounds(value) -> Tuple[Any, Any]:
    """
    Exact endpoints of an interval number as big-floats.

    The endpoints are wrapped without re-rounding, so they are the interval's
    own binary values.
    """
    lo_raw, hi_raw = value._mpi_
    bits = max(lo_raw[3], hi_raw[3], MIN_PRECISION_BITS)
    ctx = bigfloat_context(bits)
    return ctx.make_mpf(lo_raw), ctx.make_mpf(hi_raw)


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """
    Parse "3", "-0.25", "1e-6" or "2/7" exactly.

    Examples:
        >>> parse_rational("0.3")
        Fraction(3, 10)
    """
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    return Fraction(text)


# =============================================================================
# GAUSSIAN RATIONALS
# =============================================================================

@dataclass(frozen=True, eq=False)
class GaussianRational:
    """
    Complex number re + im*i with exact rational parts.

    Mixed arithmetic with int and Fraction is supported; dividing by the zero
    element raises ZeroDivisionError.
    """
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @staticmethod
    def _coerce(other) -> Optional["GaussianRational"]:
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return GaussianRational(other)
        return None

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        """Squared modulus re² + im², exact."""
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by the zero Gaussian rational")
        return GaussianRational(self.re / n, -self.im / n)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __pos__(self) -> "GaussianRational":
        return self

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, exponent: int) -> "GaussianRational":
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = GaussianRational(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        return f"GaussianRational({self.re}, {self.im})"


def rational_circle_point(m: Union[int, Fraction, str]) -> GaussianRational:
    """
    Exact point on the unit circle from the rational parameter m.

    z = ((1 − m²) + 2m·i) / (1 + m²), so |z| = 1 exactly and z = e^(2i·atan m).

    Examples:
        >>> rational_circle_point(0)
        GaussianRational(1, 0)
        >>> rational_circle_point(2)
        GaussianRational(-3/5, 4/5)
    """
    m = parse_rational(m)
    denominator = 1 + m * m
    return GaussianRational((1 - m * m) / denominator, 2 * m / denominator)


# =============================================================================
# SIGNED LOG-SPACE PRODUCTS
# =============================================================================

@dataclass(frozen=True)
class SignedLogValue:
    """
    sign·exp(log_magnitude), with an explicit zero state (sign 0).

    Attributes:
        sign: -1, 0 or +1
        log_magnitude: Natural log of |value| as a big-float; None when sign is 0
    """
    sign: int
    log_magnitude: Any = None

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")
        if (self.sign == 0) != (self.log_magnitude is None):
            raise ValueError("log_magnitude must be None exactly when sign is 0")

    @classmethod
    def zero(cls) -> "SignedLogValue":
        return cls(0, None)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if not isinstance(other, SignedLogValue):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return SignedLogValue.zero()
        return SignedLogValue(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    def reciprocal(self) -> "SignedLogValue":
        if self.is_zero:
            raise ZeroDivisionError("reciprocal of a zero SignedLogValue")
        return SignedLogValue(self.sign, -self.log_magnitude)

    def to_bigfloat(self, ctx: MPContext):
        """Exponentiate once at the precision of ctx."""
        if self.is_zero:
            return ctx.mpf(0)
        return self.sign * ctx.exp(to_bigfloat(self.log_magnitude, ctx))


def signed_log_product(factors: Sequence[Any], ctx: Optional[NumericContext] = None) -> SignedLogValue:
    """
    Product of signed scalars as sign plus sum of logs.

    Args:
        factors: Nonempty list of finite ints, Fractions, floats or big-floats
        ctx: Precision for the logarithms (default: bigfloat at 128 bits)

    Returns:
        SignedLogValue; the zero representation if any factor is zero

    Examples:
        >>> signed_log_product([2, 2]).sign
        1
        >>> signed_log_product([-1, 3, 0]).is_zero
        True
    """
    if not factors:
        raise ValueError("signed_log_product needs at least one factor")
    mp = (ctx or NumericContext()).mp

    sign = 1
    log_sum = mp.mpf(0)
    for index, factor in enumerate(factors):
        x = to_bigfloat(factor, mp)
        if not mp.isfinite(x):
            raise ValueError(f"factor {index} is not finite: {factor!r}")
        if x == 0:
            return SignedLogValue.zero()
        if x < 0:
            sign = -sign
        log_sum += mp.log(abs(x))
    return SignedLogValue(sign, log_sum)


# =============================================================================
# MAGNITUDES & SERIALIZATION
# =============================================================================

def magnitude(value: Any):
    """
    Nonnegative size of a residual.

    Fractions stay exact; Gaussian rationals use max(|re|, |im|); intervals
    use the bound max(|lo|, |hi|); big-floats use abs().
    """
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return abs(Fraction(value))
    if isinstance(value, GaussianRational):
        return max(abs(value.re), abs(value.im))
    if hasattr(value, "_mpi_"):
        lo, hi = interval_bounds(value)
        return max(abs(lo), abs(hi))
    if isinstance(value, float):
        return abs(Fraction(value))
    return abs(value)


def rational_to_json(value: Fraction) -> dict:
    value = Fraction(value)
    return {"num": str(value.numerator), "den": str(value.denominator)}


def rational_from_json(obj: Any) -> Fraction:
    """Accept {"num","den"}, a decimal/fraction string, or an int."""
    if isinstance(obj, dict):
        if set(obj) != {"num", "den"}:
            raise ValueError(f"rational object needs exactly 'num' and 'den', got {sorted(obj)}")
        den = int(obj["den"])
        if den <= 0:
            raise ValueError(f"denominator must be positive, got {den}")
        return Fraction(int(obj["num"]), den)
    if isinstance(obj, (str, int)) and not isinstance(obj, bool):
        return parse_rational(obj)
    raise ValueError(f"not a rational: {obj!r}")


def _decimal_digits(precision_bits: int) -> int:
    return math.ceil(precision_bits * math.log10(2)) + 1


def bigfloat_to_str(value, precision_bits: Optional[int] = None) -> str:
    """
    Scientific notation with enough digits to round-trip exactly.

    Always carries an exponent, e.g. "5.00000000e+0" for 5 at 24 bits.
    """
    raw = value._mpf_
    bits = max(precision_bits or 0, raw[3], MIN_PRECISION_BITS)
    return to_str(
        raw,
        _decimal_digits(bits),
        strip_zeros=False,
        min_fixed=0,
        max_fixed=0,
        show_zero_exponent=True,
    )


def scalar_to_json(value: Any, precision_bits: Optional[int] = None) -> Any:
    """Lossless JSON form of any backend scalar."""
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return rational_to_json(value)
    if isinstance(value, GaussianRational):
        return {"re": rational_to_json(value.re), "im": rational_to_json(value.im)}
    if hasattr(value, "_mpi_"):
        lo, hi = interval_bounds(value)
        return {"lo": bigfloat_to_str(lo, precision_bits), "hi": bigfloat_to_str(hi, precision_bits)}
    if hasattr(value, "_mpc_"):
        return {
            "re": bigfloat_to_str(value.real, precision_bits),
            "im": bigfloat_to_str(value.imag, precision_bits),
        }
    if hasattr(value, "_mpf_"):
        return bigfloat_to_str(value, precision_bits)
    if isinstance(value, float):
        return repr(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def scalar_from_json(obj: Any, precision_bits: int = CLASSIFY_PRECISION) -> Any:
    """Inverse of scalar_to_json; float strings parse at precision_bits."""
    if isinstance(obj, dict):
        keys = set(obj)
        if keys == {"num", "den"}:
            return rational_from_json(obj)
        if keys == {"lo", "hi"}:
            ctx = interval_context(precision_bits)
            return ctx.mpf([obj["lo"], obj["hi"]])
        if keys == {"re", "im"}:
            if isinstance(obj["re"], dict):
                return GaussianRational(rational_from_json(obj["re"]), rational_from_json(obj["im"]))
            ctx = bigfloat_context(precision_bits)
            return ctx.mpc(ctx.mpf(obj["re"]), ctx.mpf(obj["im"]))
        raise ValueError(f"unrecognized scalar object with keys {sorted(keys)}")
    if isinstance(obj, str):
        return bigfloat_context(precision_bits).mpf(obj)
    raise ValueError(f"unrecognized scalar: {obj!r}")


# =============================================================================
# PRECISION ESCALATION
# =============================================================================

@dataclass(frozen=True)
class EscalationStep:
    """One evaluation of a residual at a given precision."""
    precision_bits: int
    residual: Any
    magnitude: Any


@dataclass(frozen=True)
class EscalationResult:
    """
    Outcome of escalate_precision.

    Attributes:
        steps: Evaluations in schedule order (may stop early)
        verdict: identity-consistent or violated
        slope: Fitted d(log2|residual|)/d(precision), None if not fitted
        scale: Magnitude scale the thresholds were relative to
    """
    steps: Tuple[EscalationStep, ...]
    verdict: Verdict
    slope: Optional[float]
    scale: Any

    @property
    def final(self) -> EscalationStep:
        return self.steps[-1]

    @property
    def trace(self) -> List[Tuple[int, Any]]:
        return [(s.precision_bits, s.residual) for s in self.steps]


def _as_classify_float(value):
    return to_bigfloat(value, bigfloat_context(CLASSIFY_PRECISION))


def _log2(value) -> float:
    ctx = bigfloat_context(CLASSIFY_PRECISION)
    return float(ctx.log(_as_classify_float(value), 2))


def _threshold(scale, exponent: int):
    ctx = bigfloat_context(CLASSIFY_PRECISION)
    return ctx.ldexp(_as_classify_float(scale), exponent)


def below_rounding_level(magnitude_value, precision_bits: int, scale) -> bool:
    """True when magnitude ≤ 2^(−p+8)·scale."""
    return _as_classify_float(magnitude_value) <= _threshold(scale, -precision_bits + ROUNDING_SLACK_BITS)


def above_violation_floor(magnitude_value, scale) -> bool:
    """True when magnitude > 2^(−32)·scale."""
    return _as_classify_float(magnitude_value) > _threshold(scale, -VIOLATION_FLOOR_BITS)


def fit_slope(points: Sequence[Tuple[int, Any]]) -> Optional[float]:
    """
    Least-squares slope of log2|residual| against precision.

    Returns None with fewer than two distinct precisions or any zero magnitude.
    """
    if len(points) < 2 or any(m == 0 for _, m in points):
        return None
    xs = [float(p) for p, _ in points]
    ys = [_log2(m) for _, m in points]
    x_mean = sum(xs) / len(xs)
    y_mean = sum(ys) / len(ys)
    sxx = sum((x - x_mean) ** 2 for x in xs)
    if sxx == 0:
        return None
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    return sxy / sxx


def classify_trace(points: Sequence[Tuple[int, Any]], scale) -> Tuple[Verdict, Optional[float]]:
    """
    Decision rule over (precision, |residual|) pairs.

    - any residual exactly 0 → identity-consistent
    - one point: identity-consistent iff |residual| ≤ 2^(−p+8)·scale
    - otherwise: identity-consistent iff fitted slope ≤ −0.5 per bit

    Args:
        points: (precision_bits, magnitude) in schedule order
        scale: Σ 1/R_i, or 1 when no natural scale exists

    Returns:
        (verdict, slope or None)
    """
    if not points:
        raise ValueError("cannot classify an empty trace")
    if any(m == 0 for _, m in points):
        return IDENTITY_CONSISTENT, None
    if len(points) == 1:
        precision, value = points[0]
        verdict = IDENTITY_CONSISTENT if below_rounding_level(value, precision, scale) else VIOLATED
        return verdict, None
    slope = fit_slope(points)
    if slope is not None and slope <= DECISION_SLOPE:
        return IDENTITY_CONSISTENT, slope
    return VIOLATED, slope


def _should_stop(points: List[Tuple[int, Any]], scale) -> bool:
    precision, value = points[-1]
    if value == 0:
        return True
    if len(points) >= 2:
        tail = points[-2:]
        slope = fit_slope(tail)
        if (
            slope is not None
            and slope <= DECISION_SLOPE
            and all(below_rounding_level(m, p, scale) for p, m in tail)
        ):
            return True
    if len(points) >= 3:
        tail = points[-3:]
        slope = fit_slope(tail)
        if all(above_violation_floor(m, scale) for _, m in tail) and (slope is None or slope > DECISION_SLOPE):
            return True
    return False


def escalate_precision(
    evaluator: Callable[[int], Any],
    ctx: NumericContext,
    scale: Any = 1,
) -> EscalationResult:
    """
    Evaluate a residual along ctx.escalation_schedule and classify its decay.

    Stops early after an exact zero, after two consecutive rounding-level
    residuals that decay, or after three consecutive non-decaying residuals
    above 2^(−32)·scale.

    Args:
        evaluator: Deterministic function precision_bits -> residual
        ctx: Supplies the schedule
        scale: Magnitude scale for the thresholds

    Returns:
        EscalationResult

    Raises:
        EvaluationFailed: evaluator raised; the precision is recorded and the
            original exception chained

    Examples:
        >>> escalate_precision(lambda p: 0, NumericContext()).verdict
        'identity-consistent'
    """
    steps: List[EscalationStep] = []
    points: List[Tuple[int, Any]] = []

    for precision in ctx.escalation_schedule:
        try:
            residual = evaluator(precision)
        except Exception as exc:
            raise EvaluationFailed(precision, exc) from exc

        size = magnitude(residual)
        steps.append(EscalationStep(precision, residual, size))
        points.append((precision, size))
        logger.debug(f"escalation step {precision} bits: |residual| = {_as_classify_float(size)}")

        if _should_stop(points, scale):
            break

    verdict, slope = classify_trace(points, scale)
    logger.debug(f"escalation verdict {verdict} after {len(steps)} step(s), slope={slope}")
    return EscalationResult(tuple(steps), verdict, slope, scale)
