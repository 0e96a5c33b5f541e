"""
Geometry Module
Point configurations on a circle or a line: chords, signed chords, unit
parameters u_i and the chord products R_i.

A circle point is stored by its half-angle t ∈ [0, π): the point itself is
(ρ·cos 2t, ρ·sin 2t). With half-angles sorted, every gap t_j − t_i (i < j)
lies in (0, π), so the chord 2ρ·sin(t_j − t_i) is positive. All identity
checks run on this sorted (circular) order; the original labeling survives
only as the recorded permutation.

Indices are 0-based throughout, so the "odd" points of the theorem
(1st, 3rd, ...) are the even indices here.
"""

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple, Union

from .arithmetic import (
    GaussianRational,
    NumericContext,
    SignedLogValue,
    bigfloat_context,
    interval_bounds,
    interval_context,
    magnitude,
    parse_rational,
    rational_circle_point,
    to_bigfloat,
    to_interval,
)
from .exceptions import DegenerateConfiguration, SamePoint

logger = logging.getLogger(__name__)

# Extra bits used when sorting and reducing half-angles
GUARD_BITS = 64


# =============================================================================
# ANGLES
# =============================================================================

@dataclass(frozen=True)
class Angle:
    """
    Exact half-angle: pi_multiple·π + offset + atan(atan_of).

    Attributes:
        pi_multiple: Rational multiple of π (regular polygons, uniform grids)
        offset: Rational radians (decimal strings and floats land here)
        atan_of: Pythagorean parameter m, contributing atan(m); None if absent
    """
    pi_multiple: Fraction = Fraction(0)
    offset: Fraction = Fraction(0)
    atan_of: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "pi_multiple", Fraction(self.pi_multiple))
        object.__setattr__(self, "offset", Fraction(self.offset))
        if self.atan_of is not None:
            object.__setattr__(self, "atan_of", Fraction(self.atan_of))

    @classmethod
    def from_raw(cls, value: Any) -> "Angle":
        """
        Coerce an Angle, int, Fraction, finite float or decimal string.

        Examples:
            >>> Angle.from_raw("0.1")
            Angle(pi_multiple=Fraction(0, 1), offset=Fraction(1, 10), atan_of=None)
        """
        if isinstance(value, Angle):
            return value
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(f"half-angle must be finite, got {value}")
            return cls(offset=Fraction(value))
        return cls(offset=parse_rational(value))

    @classmethod
    def pi(cls, numerator: int, denominator: int = 1) -> "Angle":
        return cls(pi_multiple=Fraction(numerator, denominator))

    @property
    def is_pi_multiple(self) -> bool:
        return self.offset == 0 and self.atan_of is None

    def __add__(self, other: "Angle") -> "Angle":
        if not isinstance(other, Angle):
            return NotImplemented
        if self.atan_of is not None and other.atan_of is not None:
            raise ValueError("cannot add two arctangent angles exactly")
        return Angle(
            self.pi_multiple + other.pi_multiple,
            self.offset + other.offset,
            self.atan_of if self.atan_of is not None else other.atan_of,
        )

    def shifted(self, turns: int) -> "Angle":
        """Same point on the circle, moved by turns·π in half-angle."""
        return replace(self, pi_multiple=self.pi_multiple + turns)

    def cancellation_bits(self) -> int:
        """
        Bits lost when the π-multiple and the offset cancel.

        Mod-π reduction of a large offset leaves both terms large with a small
        sum; evaluating them needs this many extra bits.
        """
        if not (self.pi_multiple and self.offset):
            return 0
        size = 4 * abs(self.pi_multiple) + abs(self.offset)
        return math.ceil(size).bit_length()

    def _evaluate_at(self, mp):
        value = mp.mpf(0)
        if self.pi_multiple:
            value += mp.pi * to_bigfloat(self.pi_multiple, mp)
        if self.offset:
            value += to_bigfloat(self.offset, mp)
        if self.atan_of is not None:
            value += mp.atan(to_bigfloat(self.atan_of, mp))
        return value

    def evaluate(self, mp):
        """Value in radians as a big-float of context mp."""
        extra = self.cancellation_bits()
        if extra:
            return mp.mpf(self._evaluate_at(bigfloat_context(mp.prec + extra + GUARD_BITS)))
        return self._evaluate_at(mp)

    def evaluate_interval(self, iv):
        """Enclosure in radians. Arctangent angles have no interval form here."""
        if self.atan_of is not None:
            raise ValueError("arctangent half-angles are evaluated through exact chords, not intervals")
        extra = self.cancellation_bits()
        if extra:
            wide = interval_context(iv.prec + extra + GUARD_BITS)
            return to_interval(self._enclose_at(wide), iv)
        return self._enclose_at(iv)

    def _enclose_at(self, iv):
        value = iv.mpf(0)
        if self.pi_multiple:
            value += iv.pi * to_interval(self.pi_multiple, iv)
        if self.offset:
            value += to_interval(self.offset, iv)
        return value


def _reduce_mod_pi(angle: Angle, mp) -> Angle:
    if angle.is_pi_multiple:
        return angle.shifted(-math.floor(angle.pi_multiple))
    # the quotient needs every bit of the offset's integer part
    work = bigfloat_context(mp.prec + angle.cancellation_bits() + math.ceil(abs(angle.offset)).bit_length())
    turns = int(work.floor(angle.evaluate(work) / work.pi))
    reduced = angle.shifted(-turns)
    value = reduced.evaluate(mp)
    if value < 0:
        reduced = reduced.shifted(1)
    elif value >= mp.pi:
        reduced = reduced.shifted(-1)
    return reduced


# =============================================================================
# CONFIGURATIONS
# =============================================================================

@dataclass(frozen=True)
class CircleConfig:
    """
    Points on a circle of radius ρ, sorted by half-angle.

    Attributes:
        half_angles: Sorted exact half-angles in [0, π)
        radius: Circle radius ρ > 0
        permutation: permutation[k] is the input index of sorted point k
        m_parameters: Pythagorean parameters in sorted order, when the points
            are exact rational points (z_k = rational_circle_point(m_k))
    """
    half_angles: Tuple[Angle, ...]
    radius: Fraction = Fraction(1)
    permutation: Tuple[int, ...] = ()
    m_parameters: Optional[Tuple[Fraction, ...]] = None

    @property
    def count(self) -> int:
        return len(self.half_angles)

    @property
    def is_even(self) -> bool:
        return self.count % 2 == 0

    def half_angle_values(self, mp) -> List[Any]:
        return [angle.evaluate(mp) for angle in self.half_angles]

    def unit_points(self) -> Tuple[GaussianRational, ...]:
        """Exact z_k = u_k² for Pythagorean configs."""
        if self.m_parameters is None:
            raise ValueError("config carries no Pythagorean parameters")
        return tuple(rational_circle_point(m) for m in self.m_parameters)


@dataclass(frozen=True)
class CollinearConfig:
    """
    Sorted, pairwise-distinct positions on a line (the R = ∞ case).

    Attributes:
        positions: Exact positions x_1 < ... < x_N
        permutation: permutation[k] is the input index of sorted position k
    """
    positions: Tuple[Fraction, ...]
    permutation: Tuple[int, ...] = ()

    @property
    def count(self) -> int:
        return len(self.positions)


def _parse_radius(radius: Any) -> Fraction:
    if isinstance(radius, float):
        if not math.isfinite(radius):
            raise ValueError(f"radius must be finite, got {radius}")
        radius = Fraction(radius)
    value = parse_rational(radius)
    if value <= 0:
        raise ValueError(f"radius must be positive, got {value}")
    return value


def _degenerate_gap(precision_bits: int, mp):
    return mp.ldexp(1, -(precision_bits // 2))


def _warning_gap(precision_bits: int, mp):
    return mp.ldexp(1, -(precision_bits // 4))


def circular_gaps(values: Sequence[Any], mp) -> List[Any]:
    """
    Gaps between consecutive sorted half-angles, plus the wrap-around gap
    (first + π − last). Empty for fewer than two points.
    """
    if len(values) < 2:
        return []
    gaps = [b - a for a, b in zip(values, values[1:])]
    gaps.append(values[0] + mp.pi - values[-1])
    return gaps


def normalize_circle(
    raw_half_angles: Sequence[Any],
    radius: Any = 1,
    ctx: Optional[NumericContext] = None,
    m_parameters: Optional[Sequence[Any]] = None,
) -> CircleConfig:
    """
    Reduce half-angles mod π into [0, π), sort them, and validate.

    Args:
        raw_half_angles: Angles, numbers or decimal strings (nonempty)
        radius: Circle radius ρ > 0
        ctx: Sets the coincidence threshold 2^(−p/2) (default: bigfloat 128)
        m_parameters: Pythagorean parameters aligned with raw_half_angles

    Returns:
        CircleConfig in sorted order with the applied permutation

    Raises:
        DegenerateConfiguration: two reduced half-angles coincide or are
            closer than the backend can resolve

    Examples:
        >>> cfg = normalize_circle([0.3 + math.pi, 0.1])
        >>> cfg.permutation
        (1, 0)
    """
    if not raw_half_angles:
        raise ValueError("at least one half-angle is required")
    ctx = ctx or NumericContext()
    rho = _parse_radius(radius)
    if m_parameters is not None and len(m_parameters) != len(raw_half_angles):
        raise ValueError("m_parameters must align with half-angles")

    work = bigfloat_context(ctx.precision_bits + GUARD_BITS)
    reduced = [_reduce_mod_pi(Angle.from_raw(raw), work) for raw in raw_half_angles]
    values = [angle.evaluate(work) for angle in reduced]
    order = sorted(range(len(reduced)), key=lambda k: values[k])

    angles = tuple(reduced[k] for k in order)
    sorted_values = [values[k] for k in order]

    for a, b in zip(angles, angles[1:]):
        if a == b:
            raise DegenerateConfiguration(f"coincident half-angles: {a}")
    if len(sorted_values) >= 2:
        smallest = min(circular_gaps(sorted_values, work))
        if smallest < _degenerate_gap(ctx.precision_bits, work):
            raise DegenerateConfiguration(
                f"half-angle gap {work.nstr(smallest, 5)} below resolution at {ctx.precision_bits} bits"
            )

    ms = None
    if m_parameters is not None:
        ms = tuple(parse_rational(m_parameters[k]) for k in order)

    return CircleConfig(half_angles=angles, radius=rho, permutation=tuple(order), m_parameters=ms)


def circle_from_m_parameters(
    m_parameters: Sequence[Any],
    radius: Any = 1,
    ctx: Optional[NumericContext] = None,
) -> CircleConfig:
    """Circle config whose points are the exact rational points z = rational_circle_point(m)."""
    ms = [parse_rational(m) for m in m_parameters]
    return normalize_circle([Angle(atan_of=m) for m in ms], radius, ctx, m_parameters=ms)


def normalize_line(raw_positions: Sequence[Any]) -> CollinearConfig:
    """
    Sort positions on a line and validate them.

    Raises:
        DegenerateConfiguration: duplicate positions
    """
    if len(raw_positions) < 2:
        raise ValueError("a collinear configuration needs at least two points")
    values = []
    for raw in raw_positions:
        if isinstance(raw, float):
            if not math.isfinite(raw):
                raise ValueError(f"position must be finite, got {raw}")
            raw = Fraction(raw)
        values.append(parse_rational(raw))
    order = sorted(range(len(values)), key=lambda k: values[k])
    positions = tuple(values[k] for k in order)
    for a, b in zip(positions, positions[1:]):
        if a == b:
            raise DegenerateConfiguration(f"duplicate position {a}")
    return CollinearConfig(positions=positions, permutation=tuple(order))


def rotate_circle(config: CircleConfig, phi: Any, ctx: Optional[NumericContext] = None) -> CircleConfig:
    """
    Add phi to every half-angle and re-normalize.

    The result carries no Pythagorean parameters, since a rotated rational
    point is in general no longer rational.
    """
    shift = Angle.from_raw(phi)
    return normalize_circle([angle + shift for angle in config.half_angles], config.radius, ctx)


def scale_circle(config: CircleConfig, factor: Any) -> CircleConfig:
    """Same half-angles on a circle of radius factor·ρ."""
    return replace(config, radius=config.radius * _parse_radius(factor))


# =============================================================================
# CHORDS
# =============================================================================

def _check_pair(config: Union[CircleConfig, CollinearConfig], i: int, j: int) -> None:
    n = config.count
    for index in (i, j):
        if not 0 <= index < n:
            raise IndexError(f"point index {index} out of range for {n} points")
    if i == j:
        raise SamePoint(f"chord from point {i} to itself")


def _signed_chord_value(config: CircleConfig, i: int, j: int, ctx: NumericContext):
    """2ρ·sin(t_j − t_i) in the backend of ctx (bigfloat for exact backends)."""
    if ctx.backend == "interval":
        field = ctx.iv
        convert = to_interval
    else:
        field = ctx.mp
        convert = to_bigfloat
    rho = convert(config.radius, field)

    if config.m_parameters is not None:
        z = config.unit_points()
        squared = (z[j] - z[i]).norm()
        chord = rho * field.sqrt(convert(squared, field))
        return chord if i < j else -chord

    if ctx.backend == "interval":
        t_i = config.half_angles[i].evaluate_interval(field)
        t_j = config.half_angles[j].evaluate_interval(field)
    else:
        t_i = config.half_angles[i].evaluate(field)
        t_j = config.half_angles[j].evaluate(field)
    return 2 * rho * field.sin(t_j - t_i)


def chord_distance(
    config: CircleConfig,
    i: int,
    j: int,
    ctx: Optional[NumericContext] = None,
):
    """
    Chord length d_ij = 2ρ·sin(|t_j − t_i|).

    Exact and Gaussian backends evaluate chords as big-floats at the context
    precision, since chords are irrational in general.

    Raises:
        IndexError: index out of range
        SamePoint: i == j

    Examples:
        >>> ctx = NumericContext(precision_bits=53)
        >>> cfg = normalize_circle([Angle.pi(0), Angle.pi(1, 2)])
        >>> float(chord_distance(cfg, 0, 1, ctx))
        2.0
    """
    _check_pair(config, i, j)
    ctx = ctx or NumericContext()
    return abs(_signed_chord_value(config, i, j, ctx))


def signed_chord(
    config: CircleConfig,
    i: int,
    j: int,
    ctx: Optional[NumericContext] = None,
):
    """
    Signed chord 2ρ·sin(t_j − t_i): positive for i < j, antisymmetric.

    Raises:
        IndexError: index out of range
        SamePoint: i == j
    """
    _check_pair(config, i, j)
    ctx = ctx or NumericContext()
    return _signed_chord_value(config, i, j, ctx)


@dataclass(frozen=True)
class UnitParameters:
    """u_k = e^(i·t_k) as complex big-floats."""
    values: Tuple[Any, ...]
    precision_bits: int

    @property
    def count(self) -> int:
        return len(self.values)


def unit_parameters(config: CircleConfig, ctx: Optional[NumericContext] = None) -> UnitParameters:
    """
    Unit parameters u_k = e^(i·t_k).

    Always computed as complex big-floats at the context precision; the
    interval backend has no complex transcendental path here.
    """
    ctx = ctx or NumericContext()
    mp = ctx.mp
    values = tuple(mp.expj(t) for t in config.half_angle_values(mp))
    return UnitParameters(values=values, precision_bits=ctx.precision_bits)


# =============================================================================
# CHORD PRODUCTS
# =============================================================================

@dataclass(frozen=True)
class ChordProducts:
    """
    R_k = ∏_{j≠k} d_kj for every point, with conditioning metadata.

    Attributes:
        products: SignedLogValue (bigfloat), interval (interval) or
            Fraction (exact, collinear only), one per point in sorted order
        min_chord: Smallest pairwise distance (lower bound for intervals)
        min_gap: Smallest circular half-angle gap (smallest position gap on a line)
        context: Backend and precision the products were computed in
        conditioning_warning: min_gap below 2^(−p/4)
    """
    products: Tuple[Any, ...]
    min_chord: Any
    min_gap: Any
    context: NumericContext
    conditioning_warning: bool = False

    @property
    def count(self) -> int:
        return len(self.products)

    def product_value(self, k: int):
        """R_k as a backend scalar."""
        product = self.products[k]
        if isinstance(product, SignedLogValue):
            return product.to_bigfloat(self.context.mp)
        return product

    def reciprocals(self) -> List[Any]:
        """1/R_k per point; log-space products are exponentiated once per term."""
        result = []
        for product in self.products:
            if isinstance(product, SignedLogValue):
                result.append(product.reciprocal().to_bigfloat(self.context.mp))
            elif isinstance(product, Fraction):
                result.append(1 / product)
            else:
                result.append(1 / product)
        return result

    def max_reciprocal(self):
        return max(magnitude(r) for r in self.reciprocals())

    def scale(self):
        """Σ_k 1/R_k, the magnitude scale of the alternating sum."""
        total = None
        for r in self.reciprocals():
            size = magnitude(r)
            total = size if total is None else total + size
        return total


def _interval_lower(value):
    lo, _ = interval_bounds(value)
    return lo


def chord_products(config: CircleConfig, ctx: Optional[NumericContext] = None) -> ChordProducts:
    """
    Chord products R_k for a circle configuration.

    Bigfloat (and exact, which falls back to bigfloat for chords) accumulates
    log|d_kj| per pair and sums in log space; interval multiplies enclosures
    directly.

    Raises:
        ValueError: fewer than two points
        DegenerateConfiguration: a chord is zero or a gap is below 2^(−p/2)

    Examples:
        >>> square = normalize_circle([Angle.pi(k, 4) for k in range(4)])
        >>> round(float(chord_products(square).product_value(0)), 12)
        4.0
    """
    ctx = ctx or NumericContext()
    n = config.count
    if n < 2:
        raise ValueError("chord products need at least two points")

    p = ctx.precision_bits
    work = bigfloat_context(p + GUARD_BITS)
    gaps = circular_gaps(config.half_angle_values(work), work)
    min_gap = ctx.mp.mpf(min(gaps))
    if min_gap < _degenerate_gap(p, work):
        raise DegenerateConfiguration(f"half-angle gap {ctx.mp.nstr(min_gap, 5)} below resolution at {p} bits")
    warning = bool(min_gap < _warning_gap(p, work))
    if warning:
        logger.warning(f"Ill-conditioned configuration: min half-angle gap {ctx.mp.nstr(min_gap, 5)} at {p} bits")

    if ctx.backend == "interval":
        iv = ctx.iv
        products = [iv.mpf(1) for _ in range(n)]
        min_chord = None
        for i in range(n):
            for j in range(i + 1, n):
                d = _signed_chord_value(config, i, j, ctx)
                lower = _interval_lower(d)
                if lower <= 0:
                    raise DegenerateConfiguration(f"chord ({i}, {j}) not bounded away from zero")
                products[i] *= d
                products[j] *= d
                min_chord = lower if min_chord is None else min(min_chord, lower)
        return ChordProducts(tuple(products), min_chord, min_gap, ctx, warning)

    mp = ctx.mp
    logs = [mp.mpf(0) for _ in range(n)]
    min_chord = None
    for i in range(n):
        for j in range(i + 1, n):
            d = _signed_chord_value(config, i, j, ctx.with_backend("bigfloat"))
            if d <= 0:
                raise DegenerateConfiguration(f"chord ({i}, {j}) is not positive")
            log_d = mp.log(d)
            logs[i] += log_d
            logs[j] += log_d
            min_chord = d if min_chord is None else min(min_chord, d)
    products = tuple(SignedLogValue(1, value) for value in logs)
    return ChordProducts(products, min_chord, min_gap, ctx, warning)


def line_products(config: CollinearConfig, ctx: Optional[NumericContext] = None) -> ChordProducts:
    """
    R_k = ∏_{j≠k} |x_j − x_k| on a line.

    Differences are formed exactly before conversion, so every factor is
    correctly rounded in the float backends. Exact backends return Fractions.
    """
    ctx = ctx or NumericContext(backend="exact")
    n = config.count
    if n < 2:
        raise ValueError("line products need at least two points")
    x = config.positions

    gaps = [b - a for a, b in zip(x, x[1:])]
    min_gap = min(gaps)
    if min_gap <= 0:
        raise DegenerateConfiguration("positions are not strictly increasing")
    span = x[-1] - x[0]

    if ctx.is_exact:
        products = []
        for k in range(n):
            product = Fraction(1)
            for j in range(n):
                if j != k:
                    product *= abs(x[j] - x[k])
            products.append(product)
        return ChordProducts(tuple(products), min_gap, min_gap, ctx, False)

    mp = ctx.mp
    relative_gap = to_bigfloat(min_gap / span, mp)
    warning = bool(relative_gap < _warning_gap(ctx.precision_bits, mp))
    if warning:
        logger.warning(f"Ill-conditioned line: relative min gap {mp.nstr(relative_gap, 5)}")

    if ctx.backend == "interval":
        iv = ctx.iv
        products = []
        for k in range(n):
            product = iv.mpf(1)
            for j in range(n):
                if j != k:
                    product *= to_interval(abs(x[j] - x[k]), iv)
            products.append(product)
        return ChordProducts(tuple(products), to_bigfloat(min_gap, mp), to_bigfloat(min_gap, mp), ctx, warning)

    logs = [mp.mpf(0) for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            log_d = mp.log(to_bigfloat(x[j] - x[i], mp))
            logs[i] += log_d
            logs[j] += log_d
    products = tuple(SignedLogValue(1, value) for value in logs)
    return ChordProducts(products, to_bigfloat(min_gap, mp), to_bigfloat(min_gap, mp), ctx, warning)
