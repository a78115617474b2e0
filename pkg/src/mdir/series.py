"""Truncated multiple Dirichlet series with certified error radii.

A series ``F(s; f) = sum f(n) n_1^{-s_1} ... n_k^{-s_k}`` is evaluated over
the indices where f is materialized.  The certified radius adds

* a tail bound for every index outside the truncation region, derived from a
  growth bound on f (coordinatewise region, or the chain region for functions
  supported on n_1 <= ... <= n_k), and
* a floating-point rounding bound for the evaluated sum itself.

Terms are reduced with ``math.fsum`` (exactly rounded), so results do not
depend on summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analysis import (
    EPS,
    INFLATION,
    AlphaVector,
    GrowthBound,
    chain_tail,
    cube_tail,
    in_region_abs_EZ,
    in_region_zfr,
    in_region_zfr2,
    product_tail,
    up,
    verify_growth_bound,
)
from .core import ArithFunction, Box, add, builtin, invert, is_unit
from .errors import GrowthBoundViolated, InputError, NotAUnit, OutOfRegion
from .ufd import subring_membership

SUPPORTS = ("full", "chain")
CHAIN_BUILTINS = ("identity_I", "u_star", "u_EZ", "u_AV")
_CHUNK = 1 << 20


def point(s: Sequence) -> tuple[complex, ...]:
    out = tuple(complex(x) for x in s)
    if not out or not all(math.isfinite(z.real) and math.isfinite(z.imag) for z in out):
        raise InputError(f"series point must have finite components, got {s!r}")
    return out


def default_support(f: ArithFunction) -> str:
    return "chain" if f.name in CHAIN_BUILTINS else "full"


@dataclass(frozen=True)
class EvalResult:
    value: complex
    tail_radius: float  # tail bound plus rounding bound
    T: int
    rounding: float = 0.0

    def contains(self, z: complex) -> bool:
        return abs(z - self.value) <= self.tail_radius

    def to_json(self, s=None, region_checks=None) -> dict:
        out = {}
        if s is not None:
            out["s"] = [[z.real, z.imag] for z in s]
        out |= {
            "T": self.T,
            "value": [self.value.real, self.value.imag],
            "tail_radius": self.tail_radius,
        }
        if region_checks is not None:
            out["region_checks"] = region_checks
        return out


def _evaluate(f: ArithFunction, s: tuple[complex, ...], box: Box | None = None):
    """Return (value, rounding_bound) of the sum over f's support in ``box``."""
    if len(s) != f.k:
        raise InputError(f"point has {len(s)} coordinates, function has arity {f.k}")
    idx, coef, conv = f.support_arrays()
    if box is not None and not box.covers(f.box):
        if box.mode == "cube":
            keep = np.all(idx <= box.T, axis=1)
        else:
            keep = np.prod(idx.astype(np.float64), axis=1) <= box.T
        idx, coef, conv = idx[keep], coef[keep], conv[keep]
    if len(idx) == 0:
        return 0j, 0.0
    sv = np.asarray(s, dtype=np.complex128)
    sabs = np.abs(sv)
    top = int(idx.max())
    logtab = np.log(np.arange(1, top + 1, dtype=np.float64))
    re_parts, im_parts, slack = [], [], []
    for lo in range(0, len(idx), _CHUNK):
        block = idx[lo : lo + _CHUNK]
        c = coef[lo : lo + _CHUNK]
        logs = logtab[block - 1]
        expo = logs @ sv
        spread = logs @ sabs
        terms = c * np.exp(-expo)
        mag = np.abs(c) * np.exp(-expo.real)
        # n = (1,...,1) has exponent exactly 0 and an exact power of 1
        rel = np.where(spread > 0, INFLATION * (4 + spread), 0.0)
        slack.append(math.fsum(mag * rel) + math.fsum(conv[lo : lo + _CHUNK] * np.exp(-expo.real) * 2))
        re_parts.extend(terms.real.tolist())
        im_parts.extend(terms.imag.tolist())
    value = complex(math.fsum(re_parts), math.fsum(im_parts))
    rounding = math.fsum(slack)
    if len(re_parts) > 1:
        rounding += EPS * (abs(value.real) + abs(value.imag))
    return value, (up(rounding) if rounding else 0.0)


def eval_truncated(f: ArithFunction, s: Sequence, box: Box | None = None) -> complex:
    """``sum_{n in box} f(n) prod n_j^{-s_j}`` over the materialized values."""
    return _evaluate(f, point(s), box)[0]


def _tau(b: GrowthBound, s):
    return [z.real - r for z, r in zip(s, b.r)]


def tail_radius(b: GrowthBound, s: Sequence, T: int, support: str = "full") -> float:
    """Bound on ``sum |f(n) n^{-s}|`` over n outside the cube {1..T}^k.

    ``support='full'`` needs Re(s_j) > 1 + r_j for all j.  ``support='chain'``
    assumes f vanishes off n_1 <= ... <= n_k and only needs the suffix-sum
    region; the smaller of the available bounds is returned.
    """
    s = point(s)
    if len(s) != b.k:
        raise InputError("point and growth bound differ in arity")
    if support not in SUPPORTS:
        raise InputError(f"support must be one of {SUPPORTS}")
    if b.C == 0:
        return 0.0
    tau = _tau(b, s)
    if support == "chain":
        t = chain_tail(tau, T)
    else:
        if any(not x > 1 for x in tau):
            raise OutOfRegion(f"Re(s_j) must exceed 1 + r_j; got tau = {tau}")
        t = cube_tail(tau, T)
    return up(b.C * t)


def _region_tail(f: ArithFunction, b: GrowthBound, s, T: int, support: str) -> float:
    """Tail bound for the region ``f.box`` intersected with the cube of side T."""
    box = f.box
    if box.mode == "cube":
        return tail_radius(b, s, min(T, box.T), support)
    if box.T >= T**box.k:
        return tail_radius(b, s, T, support)
    if b.C == 0:
        return 0.0
    # indices lost to the product bound are outside {n : prod n <= box.T}
    return up(tail_radius(b, s, T, support) + b.C * product_tail(_tau(b, s), box.T, chain=support == "chain"))


def eval_certified(
    f: ArithFunction,
    b: GrowthBound,
    s: Sequence,
    T: int,
    support: str = "full",
    *,
    check_bound: bool = True,
) -> EvalResult:
    """Truncated value plus a radius that contains the full series value.

    The sum runs over ``f.box`` intersected with the cube {1..T}^k.  The radius
    is valid when ``b`` holds for f on all of N^k (checked here on the box).
    """
    s = point(s)
    if check_bound and not verify_growth_bound(f, b):
        raise GrowthBoundViolated(f"growth bound C={b.C}, r={b.r} fails on {f.box}")
    tail = _region_tail(f, b, s, T, support)
    value, rounding = _evaluate(f, s, Box.cube(f.k, T))
    radius = tail + rounding
    return EvalResult(value, up(radius) if radius else 0.0, T, rounding)


def _product_radius(a: EvalResult, b: EvalResult) -> float:
    ra, rb = a.tail_radius, b.tail_radius
    prod = abs(a.value) * abs(b.value)
    # |ab - AB| <= |a| r_b + |b| r_a + r_a r_b, plus rounding of the product
    return up(abs(a.value) * rb + abs(b.value) * ra + ra * rb + 4 * EPS * prod, 4)


@dataclass(frozen=True)
class ReciprocalReport:
    value_f: complex
    value_finv: complex
    product: complex
    combined_radius: float
    passed: bool
    radius_f: float = 0.0
    radius_finv: float = 0.0

    def to_json(self) -> dict:
        return {
            "value_f": [self.value_f.real, self.value_f.imag],
            "value_finv": [self.value_finv.real, self.value_finv.imag],
            "product": [self.product.real, self.product.imag],
            "combined_radius": self.combined_radius,
            "radius_f": self.radius_f,
            "radius_finv": self.radius_finv,
            "pass": self.passed,
        }


def reciprocal_check(
    f: ArithFunction,
    b_f: GrowthBound,
    alpha: AlphaVector,
    s: Sequence,
    T: int,
    region: str = "zfr",
    support: str | None = None,
) -> ReciprocalReport:
    """Certify ``F(s; f) * F(s; f^{-1}) = 1`` at one point.

    The inverse is bounded by ``|f^{-1}(n)| <= prod n_j^{alpha_j} / |f(1)|``,
    which holds when alpha satisfies the zeta-product condition for ``b_f``.
    ``region='zfr'`` uses the coordinatewise region Re(s_j) > 1 + alpha_j;
    ``region='zfr2'`` the suffix-sum region, for f supported on the chain.
    """
    s = point(s)
    if not is_unit(f):
        raise NotAUnit("reciprocal check needs f(1,...,1) != 0")
    if region == "zfr":
        ok = in_region_zfr(s, alpha)
    elif region == "zfr2":
        if not subring_membership(f, "star"):
            raise InputError("the suffix-sum region applies to functions in Omega* only")
        ok = in_region_zfr2(s, alpha)
        support = "chain"
    else:
        raise InputError(f"unknown region {region!r}")
    if not ok:
        raise OutOfRegion(f"{s} is outside the {region} region for alpha={alpha.alpha}")
    if support is None:
        support = default_support(f)
    cube = Box.cube(f.k, T)
    inv_box = cube if f.box.covers(cube) else f.box
    finv = invert(f, inv_box)
    b_inv = GrowthBound(up(1.0 / float(abs(f.at_one()))), alpha.alpha)
    ev_f = eval_certified(f, b_f, s, T, support)
    ev_g = eval_certified(finv, b_inv, s, T, support)
    product = ev_f.value * ev_g.value
    radius = _product_radius(ev_f, ev_g)
    return ReciprocalReport(
        ev_f.value,
        ev_g.value,
        product,
        radius,
        abs(product - 1) <= radius,
        ev_f.tail_radius,
        ev_g.tail_radius,
    )


@dataclass(frozen=True)
class DecompositionReport:
    lhs: complex
    rhs: complex
    delta: float
    slack: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "delta": self.delta,
            "slack": self.slack,
            "pass": self.passed,
        }


def star_decomposition_check(s: Sequence, T: int) -> DecompositionReport:
    """Compare the star series with Euler-Zagier plus Riemann zeta, k = 2.

    The one-variable series at s_1 + s_2 is truncated at T^2; the slack is the
    sum of the three certified radii.
    """
    s = point(s)
    if len(s) != 2:
        raise InputError("the decomposition check is for k = 2")
    if not in_region_abs_EZ(s):
        raise OutOfRegion(f"{s} is outside the absolute convergence region")
    cube = Box.cube(2, T)
    unit = GrowthBound(1.0, (0.0, 0.0))
    lhs = eval_certified(builtin("u_star", 2, cube), unit, s, T, "chain")
    ez = eval_certified(builtin("u_EZ", 2, cube), unit, s, T, "chain")
    T1 = T * T
    z = eval_certified(builtin("ones", 1, Box.cube(1, T1)), GrowthBound(1.0, (0.0,)), (s[0] + s[1],), T1)
    rhs = ez.value + z.value
    delta = abs(lhs.value - rhs)
    slack = up(lhs.tail_radius + ez.tail_radius + z.tail_radius + 4 * EPS * (abs(lhs.value) + abs(rhs)))
    return DecompositionReport(lhs.value, rhs, delta, slack, delta <= slack)


@dataclass(frozen=True)
class HomomorphismReport:
    add_delta: float
    add_slack: float
    mul_delta: float
    mul_slack: float

    @property
    def passed(self) -> bool:
        return self.add_delta <= self.add_slack and self.mul_delta <= self.mul_slack


def cross_truncation_slack(bf: GrowthBound, bg: GrowthBound, s: Sequence, T: int) -> float:
    """Bound on ``sum f(a) g(b) (a.b)^{-s}`` over a, b in the cube with a.b outside it."""
    s = point(s)
    n = np.arange(1, T + 1, dtype=np.float64)
    full = 1.0
    inner = 1.0
    for z, rf, rg in zip(s, bf.r, bg.r):
        wf = n ** (rf - z.real)
        wg = n ** (rg - z.real)
        cg = np.concatenate(([0.0], np.cumsum(wg)))
        P = math.fsum(wf) * math.fsum(wg)
        Q = math.fsum(wf * cg[T // np.arange(1, T + 1)])
        full = up(full * up(P, 8))
        inner = inner * Q * (1 - INFLATION * 8)
    return up(bf.C * bg.C * max(full - inner, 0.0), 4) if bf.C and bg.C else 0.0


def homomorphism_check(
    f: ArithFunction, g: ArithFunction, bf: GrowthBound, bg: GrowthBound, s: Sequence, T: int
) -> HomomorphismReport:
    """Truncated forms of F(f) + F(g) = F(f + g) and F(f) F(g) = F(f * g).

    ``f * g`` is computed on the cube, so the two sides of the product identity
    differ exactly by pairs (a, b) in the cube whose product leaves it.
    """
    from .core import convolve

    s = point(s)
    cube = Box.cube(f.k, T)
    f, g = f.restrict(cube), g.restrict(cube)
    vf, rf = _evaluate(f, s)
    vg, rg = _evaluate(g, s)
    vs, rs = _evaluate(add(f, g), s)
    vp, rp = _evaluate(convolve(f, g, cube), s)
    add_delta = abs(vf + vg - vs)
    add_slack = up(rf + rg + rs + 2 * EPS * (abs(vf) + abs(vg)))
    mul_delta = abs(vf * vg - vp)
    mul_slack = up(
        cross_truncation_slack(bf, bg, s, T) + rf * abs(vg) + rg * abs(vf) + rf * rg + rp
        + 4 * EPS * abs(vf) * abs(vg)
    )
    return HomomorphismReport(add_delta, add_slack, mul_delta, mul_slack)


class Membership:
    INSIDE = "Inside"
    OUTSIDE = "Outside"
    UNCERTAIN = "Uncertain"


@dataclass(frozen=True)
class SPrimeReport:
    status: str
    lower: float
    upper: float
    T: int


def s_prime_membership(s: Sequence, T: int = 400) -> SPrimeReport:
    """Decide whether the star series at the real parts of s is below 2.

    The point must satisfy the absolute convergence conditions.  The partial
    sum of nonnegative terms is itself a lower bound for the full value.
    """
    s = point(s)
    real = tuple(complex(z.real) for z in s)
    if not in_region_abs_EZ(real):
        raise OutOfRegion(f"{s} fails the absolute convergence conditions")
    k = len(s)
    cube = Box.cube(k, T)
    res = eval_certified(builtin("u_star", k, cube), GrowthBound(1.0, (0.0,) * k), real, T, "chain")
    lower = res.value.real - res.rounding
    upper = res.value.real + res.tail_radius
    if upper < 2:
        status = Membership.INSIDE
    elif lower >= 2:
        status = Membership.OUTSIDE
    else:
        status = Membership.UNCERTAIN
    return SPrimeReport(status, lower, upper, T)
