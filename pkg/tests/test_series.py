import math
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdir import analysis, series
from mdir.analysis import AlphaVector, GrowthBound
from mdir.core import ArithFunction, Box, BUILTINS, add, builtin, identity, invert
from mdir.errors import GrowthBoundViolated, InputError, NotAUnit, OutOfRegion

STAR22 = 7 * math.pi**4 / 360
UNIT2 = GrowthBound(1.0, (0.0, 0.0))


def star_reference(s1, s2):
    """zeta*(s1, s2) = sum_n n^-s2 * H_n(s1), with H_n(s1) = zeta(s1) - zeta(s1, n + 1)."""
    with mpmath.workdps(20):
        z = mpmath.zeta(s1)
        return complex(mpmath.nsum(lambda n: n ** (-s2) * (z - mpmath.zeta(s1, n + 1)), [1, mpmath.inf]))


def naive_sum(f, s):
    """Direct mpmath sum of the materialized terms."""
    with mpmath.workdps(30):
        tot = mpmath.mpc(0)
        for n, v in f.items():
            term = mpmath.mpf(v.numerator) / v.denominator
            for x, z in zip(n, s):
                term *= mpmath.power(x, -mpmath.mpc(z.real, z.imag))
            tot += term
        return complex(tot)


# ------------------------------------------------------------ evaluation


def test_identity_evaluates_to_one():
    I = identity(Box.cube(3, 5))
    assert series.eval_truncated(I, (9 + 3j, 7 - 2j, 0.1)) == 1
    r = series.eval_certified(I, GrowthBound(0.0, (0, 0, 0)), (9 + 3j, 7 - 2j, 4), 5)
    assert r.value == 1 and r.tail_radius == 0


def test_zeta2_partial_sum():
    v = series.eval_truncated(builtin("ones", 1, Box.cube(1, 10_000)), (2,))
    assert abs(v - 1.6448340718480652) < 1e-13


@settings(max_examples=20, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=6, allow_nan=False, allow_infinity=False), min_size=2, max_size=2))
def test_truncated_matches_mpmath(s):
    rng = random.Random(str(s))
    box = Box.cube(2, 12)
    f = ArithFunction(box, {n: rng.randint(-4, 4) for n in box.indices()})
    got = series.eval_truncated(f, s)
    ref = naive_sum(f, s)
    _, rounding = series._evaluate(f, series.point(s))
    assert abs(got - ref) <= rounding + 1e-300


def test_rounding_bound_covers_error():
    f = builtin("u_star", 2, Box.cube(2, 60))
    s = (2.5 + 7j, 3 - 4j)
    value, rounding = series._evaluate(f, s)
    assert abs(value - naive_sum(f, s)) <= rounding


def test_point_validation():
    with pytest.raises(InputError):
        series.point([float("nan")])
    with pytest.raises(InputError):
        series.eval_truncated(builtin("ones", 2), (2,))


# ------------------------------------------------------------- tail radius


def test_tail_radius_example():
    r = series.tail_radius(GrowthBound(1.0, (0.0,)), (2,), 1000)
    assert 0.0009 <= r <= 0.0012


def test_tail_radius_decreasing():
    radii = [series.tail_radius(UNIT2, (2, 2.5), T) for T in (25, 50, 100, 200, 400, 800)]
    assert all(b < a for a, b in zip(radii, radii[1:]))


def test_tail_radius_guard():
    with pytest.raises(OutOfRegion):
        series.tail_radius(GrowthBound(1.0, (0.5,)), (1.5,), 10)


def test_chain_tail_allows_small_first_coordinate():
    with pytest.raises(OutOfRegion):
        series.tail_radius(UNIT2, (0.5, 2.6), 100)
    assert series.tail_radius(UNIT2, (0.5, 2.6), 100, "chain") < 1


# -------------------------------------------------------- certified values


@pytest.mark.parametrize("T", [100, 1000, 10_000])
def test_zeta2_certified_containment(T):
    r = series.eval_certified(builtin("ones", 1, Box.cube(1, T)), GrowthBound(1.0, (0.0,)), (2,), T)
    assert r.contains(math.pi**2 / 6)


@pytest.mark.parametrize("support", ["full", "chain"])
def test_star_at_2_2(support):
    assert abs(star_reference(2, 2) - STAR22) < 1e-12
    r = series.eval_certified(builtin("u_star", 2, Box.cube(2, 400)), UNIT2, (2, 2), 400, support)
    assert r.contains(STAR22) and r.tail_radius < 0.02


@pytest.mark.parametrize("s", [(2, 3 + 1j), (1.5, 2), (0.5 + 2j, 2.6)])
def test_certified_contains_mpmath_reference(s):
    r = series.eval_certified(builtin("u_star", 2, Box.cube(2, 300)), UNIT2, s, 300, "chain")
    assert abs(r.value - star_reference(*s)) <= r.tail_radius


def test_certified_inverse_value_is_finite():
    alpha = analysis.find_alpha(UNIT2, 1.0)
    inv = invert(builtin("u_star", 2, Box.cube(2, 200)))
    r = series.eval_certified(inv, GrowthBound(1.0, alpha.alpha), (4.5, 4.5), 200)
    assert math.isfinite(r.value.real) and 0 < r.tail_radius < 0.01


def test_product_box_evaluation_adds_tail():
    inv = invert(builtin("u_star", 2, Box.product(2, 30)))
    r = series.eval_certified(inv, GrowthBound(1.0, (2.4, 2.4)), (4.5, 4.5), 200)
    exact = 1 / star_reference(4.5, 4.5)
    assert r.contains(exact)


def test_growth_bound_violation_reported():
    with pytest.raises(GrowthBoundViolated):
        series.eval_certified(builtin("u_star", 2, Box.cube(2, 10)), GrowthBound(0.5, (0, 0)), (3, 3), 10)


def test_conjugate_symmetry():
    for name in BUILTINS:
        f = builtin(name, 3, Box.cube(3, 15))
        s = (3 + 2j, 2.5 - 7j, 4 + 0.5j)
        a = series.eval_truncated(f, s)
        b = series.eval_truncated(f, [z.conjugate() for z in s])
        assert abs(a.conjugate() - b) <= 1e-14


# -------------------------------------------------------------- reciprocal


def test_reciprocal_identity_trivial():
    rep = series.reciprocal_check(identity(Box.cube(2, 10)), GrowthBound(0, (0, 0)), AlphaVector((0.5, 0.5)), (3, 3), 10)
    assert rep.product == 1 and rep.passed


@pytest.mark.parametrize(
    "k,T,points",
    [(1, 2000, [(4,), (3 + 5j,), (6,)]), (2, 150, [(4.5, 4.5), (4 - 1j, 5), (6, 3.6)]),
     (3, 30, [(5, 5, 5), (4 + 2j, 5, 6), (6, 6, 4)])],
)
def test_reciprocal_star(k, T, points):
    alpha = analysis.find_alpha(GrowthBound(1.0, (0.0,) * k), 1.0)
    f = builtin("u_star", k, Box.cube(k, T))
    for s in points:
        rep = series.reciprocal_check(f, GrowthBound(1.0, (0.0,) * k), alpha, s, T)
        assert rep.passed, s


def test_reciprocal_ez_plus_identity():
    alpha = analysis.find_alpha(UNIT2, 1.0)
    box = Box.cube(2, 150)
    f = add(builtin("u_EZ", 2, box), identity(box))
    for s in [(4.5, 4.5), (4, 5 + 3j), (5, 3.5)]:
        assert series.reciprocal_check(f, UNIT2, alpha, s, 150).passed


def test_reciprocal_zfr2_region():
    alpha = analysis.find_alpha(UNIT2, 1.0)
    f = builtin("u_star", 2, Box.cube(2, 150))
    # inside the suffix-sum region but outside the coordinatewise one
    s = (2.0, 6.0)
    assert analysis.in_region_zfr2(s, alpha) and not analysis.in_region_zfr(s, alpha)
    assert series.reciprocal_check(f, UNIT2, alpha, s, 150, region="zfr2").passed


def test_reciprocal_errors():
    alpha = AlphaVector((2.4, 2.4))
    with pytest.raises(NotAUnit):
        series.reciprocal_check(builtin("u_EZ", 2), UNIT2, alpha, (5, 5), 8)
    with pytest.raises(OutOfRegion):
        series.reciprocal_check(builtin("u_star", 2), UNIT2, alpha, (3, 5), 8)
    with pytest.raises(InputError):
        series.reciprocal_check(builtin("ones", 2), UNIT2, alpha, (5, 5), 8, region="zfr2")


# ----------------------------------------------------------- decomposition


@pytest.mark.parametrize("s,T", [((2, 2), 200), ((0.5, 2.6), 400), ((3, 4), 200)])
def test_star_decomposition(s, T):
    rep = series.star_decomposition_check(s, T)
    assert rep.passed
    if s == (2, 2):
        assert abs(rep.lhs - 1.894) < 0.01 and abs(rep.rhs - 1.894) < 0.01


def test_star_decomposition_out_of_region():
    with pytest.raises(OutOfRegion):
        series.star_decomposition_check((1.5, 0.5), 50)


# ------------------------------------------------------------ homomorphism


def test_homomorphism_random_pairs():
    rng = random.Random(8)
    box = Box.cube(2, 40)
    idx = list(box.indices())
    for _ in range(5):
        f = ArithFunction(box, {n: rng.randint(-6, 6) for n in rng.sample(idx, 150)} | {(1, 1): 1})
        g = ArithFunction(box, {n: rng.randint(-6, 6) for n in rng.sample(idx, 150)} | {(1, 1): 2})
        b = GrowthBound(6.0, (0.0, 0.0))
        rep = series.homomorphism_check(f, g, b, b, (6, 6), 40)
        assert rep.passed


def test_cross_truncation_slack_dominates():
    # ones * ones leaves the cube through pairs whose product escapes it
    T, s = 20, (3.0, 3.0)
    n = np.arange(1, T + 1)
    w = n.astype(float) ** -3
    escaped = sum(w[a - 1] * w[b - 1] for a in n for b in n if a * b > T)
    slack = series.cross_truncation_slack(GrowthBound(1, (0,)), GrowthBound(1, (0,)), s[:1], T)
    assert slack >= escaped


# ------------------------------------------------------------------ region S'


def test_s_prime_examples():
    assert series.s_prime_membership((2, 2)).status == series.Membership.INSIDE
    assert series.s_prime_membership((4, 4)).status == series.Membership.INSIDE
    assert series.s_prime_membership((1.02, 1.05), 100).status in (series.Membership.OUTSIDE, series.Membership.UNCERTAIN)
    with pytest.raises(OutOfRegion):
        series.s_prime_membership((1.5, 0.5))


def test_s_prime_uncertain_near_two():
    # zeta(a) = 2 near a = 1.7286; a crude truncation cannot decide
    rep = series.s_prime_membership((1.7286,), 50)
    assert rep.status == series.Membership.UNCERTAIN and rep.lower < 2 < rep.upper
