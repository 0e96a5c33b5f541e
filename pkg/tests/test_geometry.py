"""
Geometry tests: normalization, chords, unit parameters and chord products.
"""

import math
import random
import sys
import os
from fractions import Fraction

import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.arithmetic import NumericContext, bigfloat_context, interval_bounds
from src.exceptions import DegenerateConfiguration, SamePoint
from src.generator import generate_instance
from src.geometry import (
    Angle,
    chord_distance,
    chord_products,
    circle_from_m_parameters,
    circular_gaps,
    line_products,
    normalize_circle,
    normalize_line,
    rotate_circle,
    scale_circle,
    signed_chord,
    unit_parameters,
)


def random_circle(n, seed, ctx=None, min_gap="0.01"):
    instance = generate_instance("circle", n, "uniform", seed, {"min_gap": min_gap})
    return instance.to_config(ctx)


def close(a, b, mp, bits):
    """|a − b| ≤ 2^(−bits)·max(1, |b|)."""
    return abs(a - b) <= mp.ldexp(1, -bits) * max(1, abs(b))


# =============================================================================
# NORMALIZATION
# =============================================================================

def test_normalize_sorts_and_reduces_mod_pi():
    cfg = normalize_circle([0.3 + math.pi, 0.1])
    assert cfg.permutation == (1, 0)
    mp = bigfloat_context(128)
    values = cfg.half_angle_values(mp)
    assert abs(values[0] - mp.mpf(0.1)) < mp.mpf(10) ** -30
    assert abs(values[1] - mp.mpf("0.3")) < 1e-15


def test_normalize_keeps_pi_multiples_exact():
    cfg = normalize_circle([Angle.pi(7, 4), Angle.pi(-1, 3), Angle.pi(0)])
    assert [a.pi_multiple for a in cfg.half_angles] == [0, Fraction(2, 3), Fraction(3, 4)]
    assert cfg.permutation == (2, 1, 0)
    assert all(a.is_pi_multiple for a in cfg.half_angles)


def reduced_reference(text, bits=1000):
    mp = bigfloat_context(bits)
    value = mp.mpf(text)
    return value - mp.floor(value / mp.pi) * mp.pi


@pytest.mark.parametrize("huge, position", [("1e60", 3), ("1e30", 0)])
def test_normalize_reduces_huge_half_angles(huge, position):
    cfg = normalize_circle([huge, "0.1", "0.2", "0.3"], ctx=NumericContext(precision_bits=128))
    assert cfg.permutation[position] == 0
    mp = bigfloat_context(128)
    expected = reduced_reference(huge)
    assert close(cfg.half_angle_values(mp)[position], expected, mp, 120)

    other = 1 if position == 0 else 0
    reference = bigfloat_context(1000)
    true_chord = 2 * abs(reference.sin(expected - cfg.half_angles[other].evaluate(reference)))
    assert close(chord_distance(cfg, position, other), true_chord, mp, 110)

    iv = NumericContext(backend="interval", precision_bits=128).iv
    lo, hi = interval_bounds(cfg.half_angles[position].evaluate_interval(iv))
    assert lo <= expected <= hi
    assert hi - lo < mp.ldexp(1, -100)


@pytest.mark.parametrize("raw", [
    [0, 0],
    [Angle.pi(1, 4), Angle.pi(5, 4)],
    [Fraction(0), Fraction(1, 2 ** 80)],
    [Angle.pi(0), Angle(pi_multiple=1, offset=Fraction(-1, 2 ** 90))],
])
def test_normalize_rejects_coincident_points(raw):
    with pytest.raises(DegenerateConfiguration):
        normalize_circle(raw)


def test_normalize_resolution_depends_on_precision():
    raw = [Fraction(0), Fraction(1, 2 ** 80), Fraction(1)]
    with pytest.raises(DegenerateConfiguration):
        normalize_circle(raw, ctx=NumericContext(precision_bits=128))
    cfg = normalize_circle(raw, ctx=NumericContext(precision_bits=256))
    assert cfg.count == 3


@pytest.mark.parametrize("raw, radius", [
    ([], 1),
    ([0, 1], 0),
    ([0, 1], "-2"),
    ([0, float("nan")], 1),
])
def test_normalize_rejects_bad_input(raw, radius):
    with pytest.raises(ValueError):
        normalize_circle(raw, radius)


def test_single_point_circle_is_allowed():
    cfg = normalize_circle([Angle.pi(1, 2)])
    assert cfg.count == 1
    assert not cfg.is_even


def test_circular_gaps_include_wrap_around():
    mp = bigfloat_context(64)
    cfg = normalize_circle([Angle.pi(k, 4) for k in range(4)])
    gaps = circular_gaps(cfg.half_angle_values(mp), mp)
    assert len(gaps) == 4
    for gap in gaps:
        assert close(gap, mp.pi / 4, mp, 60)


def test_normalize_line():
    cfg = normalize_line(["3", Fraction(-1, 2), 0, 0.25])
    assert cfg.positions == (Fraction(-1, 2), 0, Fraction(1, 4), 3)
    assert cfg.permutation == (1, 2, 3, 0)
    with pytest.raises(DegenerateConfiguration):
        normalize_line([1, "2/2"])
    with pytest.raises(ValueError):
        normalize_line([1])


# =============================================================================
# CHORDS
# =============================================================================

@pytest.mark.parametrize("angles, radius, expected", [
    ([Angle.pi(0), Angle.pi(1, 4)], 1, math.sqrt(2)),
    ([Angle.pi(0), Angle.pi(1, 2)], 1, 2.0),
    ([Angle.pi(0), Angle.pi(1, 6)], 3, 3.0),
])
def test_chord_distance_examples(angles, radius, expected):
    cfg = normalize_circle(angles, radius)
    ctx = NumericContext(precision_bits=128)
    assert float(chord_distance(cfg, 0, 1, ctx)) == pytest.approx(expected, rel=1e-15)
    assert chord_distance(cfg, 0, 1, ctx) == chord_distance(cfg, 1, 0, ctx)


def test_chord_rejects_bad_indices():
    cfg = normalize_circle([Angle.pi(k, 3) for k in range(3)])
    with pytest.raises(SamePoint):
        chord_distance(cfg, 1, 1)
    with pytest.raises(IndexError):
        chord_distance(cfg, 0, 3)
    with pytest.raises(IndexError):
        signed_chord(cfg, -1, 0)


def test_signed_chord_is_antisymmetric():
    ctx = NumericContext(precision_bits=128)
    mp = ctx.mp
    cfg = random_circle(7, seed=3, ctx=ctx)
    for i in range(cfg.count):
        for j in range(cfg.count):
            if i != j:
                forward = signed_chord(cfg, i, j, ctx)
                assert abs(forward + signed_chord(cfg, j, i, ctx)) <= abs(forward) * mp.ldexp(1, -120)
                assert (forward > 0) == (i < j)


@pytest.mark.parametrize("seed", range(5))
def test_signed_chord_products_carry_alternating_sign(seed):
    ctx = NumericContext(precision_bits=128)
    mp = ctx.mp
    n = 4 + seed
    cfg = random_circle(n, seed, ctx)
    products = chord_products(cfg, ctx)
    for k in range(n):
        signed = mp.fprod(signed_chord(cfg, k, j, ctx) for j in range(n) if j != k)
        expected = (-1) ** k * products.product_value(k)
        assert abs(signed - expected) <= abs(expected) * mp.ldexp(1, -110)


def test_ptolemy_on_sorted_quadrilaterals():
    ctx = NumericContext(precision_bits=128)
    mp = ctx.mp
    for seed in range(20):
        cfg = random_circle(4, seed, ctx)
        d = lambda i, j: chord_distance(cfg, i, j, ctx)
        lhs = d(0, 2) * d(1, 3)
        rhs = d(0, 1) * d(2, 3) + d(0, 3) * d(1, 2)
        assert abs(lhs - rhs) <= lhs * mp.ldexp(1, -115)


def test_pythagorean_chords_match_sine_route():
    ctx = NumericContext(precision_bits=128)
    mp = ctx.mp
    exact_points = circle_from_m_parameters([0, "1/2", 3, -2], ctx=ctx)
    sine_only = normalize_circle([Angle(atan_of=m) for m in (0, Fraction(1, 2), 3, -2)], ctx=ctx)
    assert exact_points.permutation == sine_only.permutation
    for i in range(4):
        for j in range(i + 1, 4):
            a = chord_distance(exact_points, i, j, ctx)
            b = chord_distance(sine_only, i, j, ctx)
            assert abs(a - b) <= b * mp.ldexp(1, -118)


# =============================================================================
# UNIT PARAMETERS
# =============================================================================

def test_unit_parameter_examples():
    ctx = NumericContext(precision_bits=128)
    mp = ctx.mp
    cfg = normalize_circle([Angle.pi(0), Angle.pi(1, 2)])
    u = unit_parameters(cfg, ctx).values
    assert abs(u[0] - 1) <= mp.ldexp(1, -120)
    assert abs(u[1] - mp.mpc(0, 1)) <= mp.ldexp(1, -120)


def test_unit_parameters_lie_on_circle_and_recover_chords():
    ctx = NumericContext(precision_bits=128)
    mp = ctx.mp
    minus_i = mp.mpc(0, -1)
    cfg = random_circle(6, seed=9, ctx=ctx)
    u = unit_parameters(cfg, ctx).values
    for value in u:
        assert abs(abs(value) - 1) <= mp.ldexp(1, -124)
    for i in range(6):
        for j in range(i + 1, 6):
            recovered = minus_i * (u[j] ** 2 - u[i] ** 2) / (u[i] * u[j])
            chord = signed_chord(cfg, i, j, ctx)
            assert abs(recovered.imag) <= mp.ldexp(1, -115)
            assert abs(recovered.real - chord) <= mp.ldexp(1, -115)


# =============================================================================
# CHORD PRODUCTS
# =============================================================================

def test_square_chord_products():
    ctx = NumericContext(precision_bits=128)
    mp = ctx.mp
    square = normalize_circle([Angle.pi(k, 4) for k in range(4)])
    products = chord_products(square, ctx)
    assert products.count == 4
    for k in range(4):
        assert abs(products.product_value(k) - 4) <= mp.ldexp(1, -124)
    assert not products.conditioning_warning


@pytest.mark.parametrize("n", [2, 3, 4, 6, 8, 12, 33])
def test_regular_polygon_products_equal_n(n):
    ctx = NumericContext(precision_bits=64)
    cfg = normalize_circle([Angle.pi(k, n) for k in range(n)], ctx=ctx)
    products = chord_products(cfg, ctx)
    for k in range(n):
        assert float(products.product_value(k)) == pytest.approx(n, rel=1e-12)


def test_chord_products_need_two_points():
    with pytest.raises(ValueError):
        chord_products(normalize_circle([0]))


def test_chord_products_flag_small_gaps():
    ctx = NumericContext(precision_bits=256)
    cfg = normalize_circle([Fraction(0), Fraction(1, 2 ** 80), Fraction(1)], ctx=ctx)
    assert chord_products(cfg, ctx).conditioning_warning
    with pytest.raises(DegenerateConfiguration):
        chord_products(cfg, ctx.at(128))


def test_interval_products_enclose_reference():
    ctx = NumericContext(backend="interval", precision_bits=128)
    oracle = NumericContext(precision_bits=512)
    for seed in range(5):
        cfg = random_circle(6, seed)
        enclosures = chord_products(cfg, ctx)
        reference = chord_products(cfg, oracle)
        for k in range(6):
            lo, hi = interval_bounds(enclosures.product_value(k))
            assert lo <= reference.product_value(k) <= hi
            assert hi - lo <= hi * oracle.mp.ldexp(1, -110)


def test_rotation_preserves_chords():
    ctx = NumericContext(precision_bits=128)
    mp = ctx.mp
    for seed in range(10):
        cfg = random_circle(6, seed, ctx)
        rotated = rotate_circle(cfg, "0.7", ctx)
        perm = rotated.permutation
        for a in range(6):
            for b in range(a + 1, 6):
                before = chord_distance(cfg, perm[a], perm[b], ctx)
                after = chord_distance(rotated, a, b, ctx)
                assert abs(after - before) <= before * mp.ldexp(1, -118)


def test_scaling_multiplies_chords_and_products():
    ctx = NumericContext(precision_bits=128)
    mp = ctx.mp
    cfg = random_circle(5, seed=4, ctx=ctx)
    scaled = scale_circle(cfg, "3")
    assert scaled.radius == 3
    assert abs(chord_distance(scaled, 0, 2, ctx) - 3 * chord_distance(cfg, 0, 2, ctx)) <= mp.ldexp(1, -118)
    before = chord_products(cfg, ctx)
    after = chord_products(scaled, ctx)
    for k in range(5):
        expected = 3 ** 4 * before.product_value(k)
        assert abs(after.product_value(k) - expected) <= expected * mp.ldexp(1, -115)


# =============================================================================
# LINE PRODUCTS
# =============================================================================

def test_line_products_exact():
    cfg = normalize_line([0, 1, 3])
    products = line_products(cfg)
    assert products.products == (3, 2, 6)
    assert products.scale() == Fraction(1, 3) + Fraction(1, 2) + Fraction(1, 6)


def test_line_products_scale_exactly():
    rng = random.Random(2)
    for _ in range(20):
        positions = list({Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for _ in range(6)})
        rho = Fraction(rng.randint(1, 20), rng.randint(1, 20))
        base = line_products(normalize_line(positions))
        scaled = line_products(normalize_line([rho * x for x in positions]))
        n = len(positions)
        assert scaled.products == tuple(rho ** (n - 1) * r for r in base.products)


def test_line_products_float_backends_agree_with_exact():
    cfg = normalize_line(["-2", "0", "1/2", "7/3", "3"])
    exact = line_products(cfg)
    bigfloat = line_products(cfg, NumericContext(precision_bits=128))
    interval = line_products(cfg, NumericContext(backend="interval", precision_bits=128))
    mp = bigfloat_context(128)
    for k in range(cfg.count):
        truth = exact.products[k]
        value = bigfloat.product_value(k)
        assert abs(value - mp.mpf(truth.numerator) / truth.denominator) <= value * mp.ldexp(1, -120)
        lo, hi = interval_bounds(interval.product_value(k))
        assert lo <= mp.mpf(truth.numerator) / truth.denominator <= hi
