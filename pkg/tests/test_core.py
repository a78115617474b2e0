import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from mdir import core
from mdir.core import ArithFunction, Box, add, builtin, convolve, identity, invert, scale
from mdir.errors import ArityMismatch, InputError, NotAUnit


def trial_divisors(m):
    return [d for d in range(1, m + 1) if m % d == 0]


def brute_inverse(f):
    """Solve f*h = I on the box as a dense rational linear system (Gauss-Jordan)."""
    idx = list(f.box.indices())
    pos = {n: i for i, n in enumerate(idx)}
    m = len(idx)
    A = [[Fraction(0)] * (m + 1) for _ in range(m)]
    for row, n in enumerate(idx):
        for a in itertools.product(*(trial_divisors(x) for x in n)):
            b = tuple(x // y for x, y in zip(n, a))
            A[row][pos[b]] += f.get(a)
        A[row][m] = Fraction(int(n == f.box.one))
    for c in range(m):
        p = next(r for r in range(c, m) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [v / piv for v in A[c]]
        for r in range(m):
            if r != c and A[r][c]:
                fac = A[r][c]
                A[r] = [x - fac * y for x, y in zip(A[r], A[c])]
    return {n: A[pos[n]][m] for n in idx}


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def functions(draw, box, unit=False):
    vals = {}
    for n in box.indices():
        if draw(st.booleans()):
            vals[n] = draw(rationals)
    if unit:
        vals[box.one] = draw(rationals.filter(bool))
    return ArithFunction(box, vals)


SMALL = Box.cube(2, 5)


# -------------------------------------------------------------------- boxes


def test_box_modes_and_membership():
    assert (3, 3) in Box.cube(2, 3)
    assert (4, 1) not in Box.cube(2, 3)
    assert (6, 5) in Box.product(2, 30) and (6, 6) not in Box.product(2, 30)
    assert Box.product(2, 6).size == sum(1 for _ in Box.product(2, 6).indices())
    assert Box.parse("product:12", 3) == Box.product(3, 12)
    with pytest.raises(InputError):
        Box.parse("sphere:3", 2)


@pytest.mark.parametrize("box", [Box.cube(2, 6), Box.product(3, 24)])
def test_boxes_are_divisor_closed(box):
    for n in box.indices():
        for a, b in core.divisor_pairs(n):
            assert a in box and b in box


def test_box_indices_lexicographic():
    idx = list(Box.product(2, 10).indices())
    assert idx == sorted(idx)


# ------------------------------------------------------------ divisor pairs


def test_divisor_pairs_examples():
    assert core.divisor_pairs((1, 1)) == [((1, 1), (1, 1))]
    assert [a for a, _ in core.divisor_pairs((2, 3))] == [(1, 1), (1, 3), (2, 1), (2, 3)]
    assert [a[0] for a, _ in core.divisor_pairs((12,))] == trial_divisors(12)


@given(st.integers(1, 3000))
def test_divisors_match_trial_division(m):
    assert list(core.divisors(m)) == trial_divisors(m)


# ----------------------------------------------------------------- builtins


def test_builtin_values():
    star = builtin("u_star", 2)
    assert star[(2, 1)] == 0 and star[(1, 2)] == 1
    assert builtin("u_EZ", 2)[(1, 1)] == 0
    mt = builtin("u_MT", 3)
    assert mt[(1, 2, 3)] == 1 and mt[(2, 2, 3)] == 0
    av = builtin("u_AV", 3)
    assert av[(1, 2, 3)] == 1 and av[(2, 1, 3)] == 0


@pytest.mark.parametrize("name", core.BUILTINS)
@pytest.mark.parametrize("k", [2, 3])
def test_builtin_dense_matches_product_box(name, k):
    cube = builtin(name, k, Box.cube(k, 6))
    prod = builtin(name, k, Box.product(k, 6**k))
    for n in cube.box.indices():
        assert cube[n] == prod[n]


def test_builtin_errors():
    with pytest.raises(InputError):
        builtin("zeta", 2)
    with pytest.raises(InputError):
        builtin("u_MT", 1)
    with pytest.raises(ArityMismatch):
        builtin("ones", 2, Box.cube(3, 4))


def test_lookup_outside_box_raises():
    with pytest.raises(IndexError):
        builtin("ones", 2, Box.cube(2, 3))[(4, 1)]


# -------------------------------------------------------------- convolution


def test_convolve_examples():
    ones = builtin("ones", 1, Box.cube(1, 10))
    assert convolve(ones, ones)[(6,)] == 4
    star = builtin("u_star", 2)
    assert convolve(star, star)[(2, 2)] == 2


def test_add_and_scale_examples():
    f = add(builtin("u_EZ", 2), identity(Box.cube(2, 8)))
    assert f[(1, 1)] == 1 and core.is_unit(f)
    three = scale(3, identity(Box.cube(3, 4)))
    assert three[(1, 1, 1)] == 3 and three.nnz == 1
    g = builtin("u_star", 2)
    assert add(g, core.zero(g.box)) == g


def test_convolve_arity_mismatch():
    with pytest.raises(ArityMismatch):
        convolve(builtin("ones", 2), builtin("ones", 3))


def test_convolve_box_not_covered():
    with pytest.raises(InputError):
        convolve(builtin("ones", 2, Box.cube(2, 4)), builtin("ones", 2, Box.cube(2, 4)), Box.cube(2, 8))


@settings(max_examples=25, deadline=None)
@given(functions(SMALL), functions(SMALL))
def test_commutative(f, g):
    assert convolve(f, g) == convolve(g, f)


@settings(max_examples=15, deadline=None)
@given(functions(SMALL), functions(SMALL), functions(SMALL))
def test_associative_and_distributive(f, g, h):
    assert convolve(f, convolve(g, h)) == convolve(convolve(f, g), h)
    assert convolve(f, add(g, h)) == add(convolve(f, g), convolve(f, h))


@settings(max_examples=25, deadline=None)
@given(functions(Box.product(2, 24)))
def test_identity_law(f):
    assert convolve(identity(f.box), f) == f


def test_integer_kernel_matches_exact_path():
    box = Box.cube(2, 160)  # above the kernel threshold
    rng = np.random.default_rng(3)
    f = ArithFunction(box, dense=rng.integers(-3, 4, size=(160, 160)).astype(np.int64))
    g = builtin("u_star", 2, box)
    fast = convolve(f, g, method="integer")
    small = Box.cube(2, 40)
    slow = convolve(f.restrict(small), g.restrict(small), method="exact")
    assert fast.restrict(small) == slow


# ---------------------------------------------------------------- inversion


def test_invert_examples():
    inv = invert(builtin("u_star", 2))
    assert inv[(1, 1)] == 1 and inv[(2, 2)] == -1 and inv[(1, 2)] == -1 and inv[(2, 1)] == 0
    mu = invert(builtin("ones", 1, Box.cube(1, 30)))
    assert mu[(30,)] == -1 and mu[(12,)] == 0


def test_invert_not_unit():
    with pytest.raises(NotAUnit):
        invert(builtin("u_EZ", 2))


def test_mobius_up_to_1000():
    mu = invert(builtin("ones", 1, Box.cube(1, 1000)))
    assert all(mu[(n,)] == sympy.mobius(n) for n in range(1, 1001))


@pytest.mark.parametrize("box", [Box.cube(2, 4), Box.product(2, 12), Box.product(3, 8)])
def test_invert_matches_linear_solve(box):
    rng = np.random.default_rng(box.T)
    vals = {n: Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) for n in box.indices()}
    vals[box.one] = Fraction(2, 3)
    f = ArithFunction(box, vals)
    inv = invert(f)
    for n, v in brute_inverse(f).items():
        assert inv[n] == v


@settings(max_examples=30, deadline=None)
@given(functions(Box.product(2, 30), unit=True))
def test_inverse_round_trip(f):
    assert convolve(f, invert(f)) == identity(f.box)


def test_integer_inverse_kernel_matches_exact():
    box = Box.cube(3, 30)
    f = builtin("u_star", 3, box)
    fast = invert(f, method="integer")
    slow = invert(f.restrict(Box.cube(3, 10)), method="exact")
    assert fast.restrict(Box.cube(3, 10)) == slow


def test_inversion_order_refines_divisibility():
    order = core.inversion_order(Box.product(2, 20))
    seen = set()
    for n in order:
        for a, _ in core.divisor_pairs(n):
            assert a == n or a in seen
        seen.add(n)
    assert order[0] == (1, 1)
