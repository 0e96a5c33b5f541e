"""
Instance Generator
Deterministic random configurations for verification runs and sweeps.

Distributions:
- circle: uniform, clustered, regular, pythagorean
- line:   uniform-line, rational-line

The same (kind, n, distribution, seed, parameters) always produces the same
instance. Random streams are not meant to match across languages; the
instance file is what gets shared.
"""

import logging
import math
import random
from fractions import Fraction
from typing import Any, Dict, List, Optional

from .arithmetic import NumericContext, parse_rational
from .data_loader import Instance
from .exceptions import UsageError
from .geometry import Angle, circular_gaps

logger = logging.getLogger(__name__)

CIRCLE_DISTRIBUTIONS = ("uniform", "clustered", "regular", "pythagorean")
LINE_DISTRIBUTIONS = ("uniform-line", "rational-line")
DISTRIBUTIONS = CIRCLE_DISTRIBUTIONS + LINE_DISTRIBUTIONS

# Uniform half-angles are k·π/ANGLE_GRID for integer k
ANGLE_GRID = 10 ** 15
LINE_GRID = 10 ** 9

DEFAULT_CLUSTER_GAP = "1e-6"
DEFAULT_M_BOUND = 50
DEFAULT_LINE_NUMERATOR = 50
DEFAULT_LINE_DENOMINATOR = 20


# =============================================================================
# PARAMETER HELPERS
# =============================================================================

def _radians(value: Any, name: str) -> Fraction:
    try:
        result = parse_rational(str(value) if isinstance(value, float) else value)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise UsageError(f"parameter {name} must be a number, got {value!r}") from e
    if result < 0:
        raise UsageError(f"parameter {name} must be nonnegative, got {value}")
    return result


def _positive_int(value: Any, name: str) -> int:
    try:
        result = int(value)
    except (ValueError, TypeError) as e:
        raise UsageError(f"parameter {name} must be an integer, got {value!r}") from e
    if result < 1:
        raise UsageError(f"parameter {name} must be positive, got {result}")
    return result


def _grid_steps(radians: Fraction) -> int:
    """Smallest number of grid steps spanning at least `radians`."""
    # a lower bound for π rounds the step count up
    return math.ceil(radians * ANGLE_GRID / Fraction(314159265358979, 10 ** 14))


def _spaced_grid_points(rng: random.Random, n: int, spacing: int) -> List[int]:
    """
    n sorted grid indices in [0, ANGLE_GRID) with every circular gap ≥ spacing.

    Draw n distinct values from a shortened range, sort, then spread the
    k-th value by k·spacing.
    """
    span = ANGLE_GRID - n * spacing
    if span < n:
        raise UsageError(f"cannot place {n} points with the requested minimum gap")
    draws = sorted(rng.sample(range(span), n))
    return [value + k * spacing for k, value in enumerate(draws)]


# =============================================================================
# DISTRIBUTIONS
# =============================================================================

def _uniform(rng: random.Random, n: int, params: Dict[str, Any]) -> Dict[str, Any]:
    min_gap = _radians(params.get("min_gap", 0), "min_gap")
    points = _spaced_grid_points(rng, n, _grid_steps(min_gap))
    return {"half_angles": [Angle.pi(k, ANGLE_GRID) for k in points]}


def _clustered(rng: random.Random, n: int, params: Dict[str, Any]) -> Dict[str, Any]:
    gap = _radians(params.get("gap", DEFAULT_CLUSTER_GAP), "gap")
    if gap == 0:
        raise UsageError("parameter gap must be positive")
    if n < 2:
        raise UsageError("clustered needs at least two points")
    # keep the other points well clear of the cluster
    points = _spaced_grid_points(rng, n - 1, _grid_steps(4 * gap) + 1)
    anchor = rng.randrange(n - 1)
    angles = [Angle.pi(k, ANGLE_GRID) for k in points]
    angles.insert(anchor + 1, Angle(pi_multiple=Fraction(points[anchor], ANGLE_GRID), offset=gap))
    return {"half_angles": angles}


def _regular(rng: random.Random, n: int, params: Dict[str, Any]) -> Dict[str, Any]:
    return {"half_angles": [Angle.pi(k, n) for k in range(n)]}


def _pythagorean(rng: random.Random, n: int, params: Dict[str, Any]) -> Dict[str, Any]:
    bound = _positive_int(params.get("bound", DEFAULT_M_BOUND), "bound")
    if n > (2 * bound + 1) * bound // 2:
        raise UsageError(f"bound {bound} is too small for {n} distinct parameters")
    ms = set()
    while len(ms) < n:
        ms.add(Fraction(rng.randint(-bound, bound), rng.randint(1, bound)))
    # atan(m) + π for m < 0 puts negative parameters after the nonnegative ones
    return {"m_parameters": sorted(ms, key=lambda m: (m < 0, m))}


def _uniform_line(rng: random.Random, n: int, params: Dict[str, Any]) -> Dict[str, Any]:
    draws = sorted(rng.sample(range(-LINE_GRID, LINE_GRID), n))
    return {"positions": [Fraction(k, LINE_GRID) for k in draws]}


def _rational_line(rng: random.Random, n: int, params: Dict[str, Any]) -> Dict[str, Any]:
    numerator = _positive_int(params.get("numerator", DEFAULT_LINE_NUMERATOR), "numerator")
    denominator = _positive_int(params.get("denominator", DEFAULT_LINE_DENOMINATOR), "denominator")
    if n > 2 * numerator + 1:
        raise UsageError(f"numerator bound {numerator} is too small for {n} distinct positions")
    positions = set()
    while len(positions) < n:
        positions.add(Fraction(rng.randint(-numerator, numerator), rng.randint(1, denominator)))
    return {"positions": sorted(positions)}


_BUILDERS = {
    "uniform": _uniform,
    "clustered": _clustered,
    "regular": _regular,
    "pythagorean": _pythagorean,
    "uniform-line": _uniform_line,
    "rational-line": _rational_line,
}


def _json_params(params: Dict[str, Any]) -> Dict[str, Any]:
    return {key: (str(value) if isinstance(value, (Fraction, float)) else value) for key, value in sorted(params.items())}


def _min_gap_text(instance: Instance) -> str:
    if instance.kind == "line":
        gap = min(b - a for a, b in zip(instance.positions, instance.positions[1:]))
        return str(gap)
    ctx = NumericContext(precision_bits=64)
    config = instance.to_config(ctx)
    mp = ctx.mp
    return mp.nstr(min(circular_gaps(config.half_angle_values(mp), mp)), 17)


def generate_instance(
    kind: str,
    n: int,
    distribution: str,
    seed: int,
    params: Optional[Dict[str, Any]] = None,
    radius: Any = 1,
) -> Instance:
    """
    Generate a sorted instance of n points.

    Args:
        kind: circle or line
        n: Number of points (≥ 2)
        distribution: One of DISTRIBUTIONS, matching kind
        seed: Integer seed
        params: Distribution parameters (min_gap, gap, bound, numerator, denominator)
        radius: Circle radius

    Returns:
        Instance with generator metadata {distribution, seed, parameters, min_gap}

    Raises:
        UsageError: invalid kind/distribution combination or parameters

    Examples:
        >>> inst = generate_instance("circle", 4, "regular", seed=0)
        >>> [a.pi_multiple for a in inst.half_angles]
        [Fraction(0, 1), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
    """
    params = dict(params or {})
    if kind not in ("circle", "line"):
        raise UsageError(f"unknown kind {kind!r}")
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise UsageError(f"n must be an integer ≥ 2, got {n!r}")
    if distribution not in _BUILDERS:
        raise UsageError(f"unknown distribution {distribution!r} (expected one of {', '.join(DISTRIBUTIONS)})")
    allowed = CIRCLE_DISTRIBUTIONS if kind == "circle" else LINE_DISTRIBUTIONS
    if distribution not in allowed:
        raise UsageError(f"distribution {distribution} does not apply to kind {kind}")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise UsageError(f"seed must be an integer, got {seed!r}")

    rng = random.Random(seed)
    fields = _BUILDERS[distribution](rng, n, params)
    generator = {"distribution": distribution, "seed": seed, "parameters": _json_params(params)}

    if kind == "circle":
        rho = _radians(radius, "radius")
        if rho == 0:
            raise UsageError("radius must be positive")
        instance = Instance(kind="circle", radius=rho, generator=generator, **fields)
    else:
        instance = Instance(kind="line", generator=generator, **fields)

    instance.generator["min_gap"] = _min_gap_text(instance)
    logger.debug(f"Generated {kind}/{distribution} instance: n={n}, seed={seed}")
    return instance
