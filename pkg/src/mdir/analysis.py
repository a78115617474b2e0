"""Certified real-analytic helpers.

Riemann zeta enclosures from partial sums plus integral tails, the divisor
power-sum bound, the exponent search for inverse growth bounds, growth-bound
checks, convergence/zero-free region predicates, and the tail bounds used to
certify truncated multiple Dirichlet series.

Rounding: float results are pushed outward by a single relative inflation
constant ``INFLATION`` (see :func:`up` and :func:`down`).  It covers the
few-ulp error of ``pow``/``exp``/``log`` and of correctly rounded ``fsum``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .core import ArithFunction, Box, divisors, invert, is_unit
from .errors import InputError, NotAUnit, OutOfRegion, PoleGuard, Unsatisfiable

EPS = np.finfo(float).eps
INFLATION = 16 * EPS
POLE_GUARD = 1e-6
ALPHA_GRID = 1e-6
ALPHA_T_MAX = 64.0
ZETA_TERMS = 10_000


def up(x: float, scale: float = 1.0) -> float:
    """Round outward toward +inf by ``scale`` inflation units."""
    return math.nextafter(x + abs(x) * INFLATION * scale, math.inf)


def down(x: float, scale: float = 1.0) -> float:
    return math.nextafter(x - abs(x) * INFLATION * scale, -math.inf)


@dataclass(frozen=True)
class Enclosure:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"empty enclosure [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    __contains__ = contains


@dataclass(frozen=True)
class GrowthBound:
    """``|f(n)| <= C * prod n_j^{r_j}`` for every n other than (1, ..., 1).

    ``C = 0`` is accepted and certifies a function supported on (1, ..., 1).
    """

    C: float
    r: tuple[float, ...]

    def __post_init__(self):
        if not (self.C >= 0 and math.isfinite(self.C)):
            raise InputError(f"growth constant must be finite and >= 0, got {self.C}")
        object.__setattr__(self, "r", tuple(float(x) for x in self.r))

    @property
    def k(self) -> int:
        return len(self.r)


@dataclass(frozen=True)
class AlphaVector:
    alpha: tuple[float, ...]
    # search record, filled in by find_alpha
    offset: float | None = None
    product_upper: float | None = None
    threshold: float | None = None

    @property
    def k(self) -> int:
        return len(self.alpha)


# ------------------------------------------------------------------- zeta


@lru_cache(maxsize=4096)
def partial_zeta(a: float, T: int) -> Enclosure:
    """Enclosure of ``sum_{n <= T} n^{-a}`` for real ``a``."""
    # the n = 1 term is exactly 1 and the rest are positive, so 1 is a floor
    rest = math.fsum(np.arange(2, T + 1, dtype=np.float64) ** (-a))
    lo = max(1.0, math.nextafter(1.0 + down(rest), -math.inf))
    return Enclosure(lo, math.nextafter(1.0 + up(rest), math.inf))


def integral_tail(a: float, T: float) -> float:
    """``T^{1-a}/(a-1)``, the integral of x^{-a} over [T, inf); a > 1."""
    return T ** (1.0 - a) / (a - 1.0)


def zeta_enclosure(a: float, T: int = ZETA_TERMS) -> Enclosure:
    """Certified enclosure of the Riemann zeta value at real ``a > 1``.

    ``sum_{n>T} n^{-a}`` lies between the integrals of x^{-a} over
    [T+1, inf) and [T, inf), which gives both ends.
    """
    if not a > 1 + POLE_GUARD:
        raise PoleGuard(f"zeta argument {a} is within {POLE_GUARD} of the pole")
    part = partial_zeta(float(a), int(T))
    lo = max(1.0, math.nextafter(part.lower + down(integral_tail(a, T + 1), 4), -math.inf))
    hi = math.nextafter(part.upper + up(integral_tail(a, T), 4), math.inf)
    return Enclosure(lo, hi)


def zeta_upper(a: float, T: int = ZETA_TERMS) -> float:
    return zeta_enclosure(a, T).upper


def divisor_power_sum(n: int, a: float) -> float:
    return math.fsum(float(d) ** a for d in divisors(n))


def divisor_sum_bound_holds(n: int, a: float, T: int = ZETA_TERMS) -> bool:
    """Check ``sum_{d|n} d^a <= zeta(a) n^a`` with the certified zeta upper bound."""
    lhs = down(divisor_power_sum(n, a), 4)
    return lhs <= up(zeta_upper(a, T) * float(n) ** a, 4)


# ---------------------------------------------------------- growth bounds


def _bound_values(idx: np.ndarray, b: GrowthBound) -> np.ndarray:
    """Upward-rounded ``C * prod n_j^{r_j}`` per row of ``idx``."""
    logs = np.log(idx.astype(np.float64))
    expo = logs @ np.asarray(b.r, dtype=np.float64)
    spread = np.abs(logs) @ np.abs(np.asarray(b.r, dtype=np.float64))
    vals = b.C * np.exp(expo)
    return np.nextafter(vals * (1 + INFLATION * (4 + spread)), np.inf)


def verify_growth_bound(f: ArithFunction, b: GrowthBound) -> bool:
    """Exhaustive check of the growth bound at every box index except (1,...,1)."""
    if b.k != f.k:
        raise InputError(f"bound arity {b.k} vs function arity {f.k}")
    idx, coef, conv = f.support_arrays()
    keep = np.any(idx != 1, axis=1)
    idx, coef, conv = idx[keep], coef[keep], conv[keep]
    if len(idx) == 0:
        return True
    absval = np.nextafter(np.abs(coef) + conv, np.inf)
    return bool(np.all(absval <= _bound_values(idx, b)))


def find_alpha(
    b: GrowthBound,
    f1_abs: float,
    mode: str = "uniform",
    *,
    terms: int = ZETA_TERMS,
    grid: float = ALPHA_GRID,
    t_max: float = ALPHA_T_MAX,
) -> AlphaVector:
    """Smallest uniform offset t with ``prod_j zeta(t) <= 1 + |f(1)|/C``.

    Returns ``alpha_j = r_j + t``.  Each zeta value is replaced by its certified
    upper bound, so the returned vector satisfies the condition rigorously.
    """
    if mode != "uniform":
        raise InputError("only the uniform offset search is available")
    if not f1_abs > 0:
        raise InputError("|f(1)| must be positive (f must be a unit)")
    if not b.C > 0:
        raise InputError("find_alpha needs a growth constant C > 0")
    threshold = down(1.0 + f1_abs / b.C, 2)

    def product_upper(t: float) -> float:
        # certify the alpha actually returned: (r + t) - r can differ from t
        p = 1.0
        for r in b.r:
            p = up(p * zeta_upper((r + t) - r, terms))
        return p

    lo_i = math.floor((1 + POLE_GUARD) / grid) + 1
    hi_i = math.floor(t_max / grid)
    while lo_i * grid <= 1 + POLE_GUARD:
        lo_i += 1
    if not product_upper(hi_i * grid) <= threshold:
        raise Unsatisfiable(f"zeta product exceeds {threshold} even at offset {t_max}")
    if product_upper(lo_i * grid) <= threshold:
        hi_i = lo_i
    else:
        while hi_i - lo_i > 1:  # invariant: lo fails, hi passes
            mid = (lo_i + hi_i) // 2
            if product_upper(mid * grid) <= threshold:
                hi_i = mid
            else:
                lo_i = mid
    t = hi_i * grid
    return AlphaVector(
        tuple(r + t for r in b.r), offset=t, product_upper=product_upper(t), threshold=threshold
    )


def alpha_condition_holds(b: GrowthBound, alpha: AlphaVector, f1_abs: float, terms: int = ZETA_TERMS) -> bool:
    """Re-check ``alpha_j > 1 + r_j`` and the certified zeta-product inequality."""
    if any(not a > 1 + r for a, r in zip(alpha.alpha, b.r)):
        return False
    p = 1.0
    for a, r in zip(alpha.alpha, b.r):
        p = up(p * zeta_upper(a - r, terms))
    return p <= down(1.0 + f1_abs / b.C, 2)


def inverse_bound_violations(f: ArithFunction, alpha: AlphaVector, box: Box | None = None) -> list:
    """Indices where ``|f^{-1}(n)| > prod n_j^{alpha_j} / |f(1)|`` on the box."""
    if not is_unit(f):
        raise NotAUnit("f(1,...,1) = 0")
    if alpha.k != f.k:
        raise InputError(f"alpha arity {alpha.k} vs function arity {f.k}")
    g = invert(f, box)
    f1 = abs(f.at_one())
    bound = GrowthBound(1.0, alpha.alpha)
    idx, coef, conv = g.support_arrays()
    if len(idx) == 0:
        return []
    rhs = _bound_values(idx, bound)
    # compare |g| * |f(1)| <= prod n^alpha, exactly on the left
    bad = []
    scaled = np.abs(coef) * float(f1)
    suspect = np.nextafter(scaled * (1 + 4 * EPS) + conv * float(f1), np.inf) > rhs
    for i in np.flatnonzero(suspect):
        n = tuple(int(x) for x in idx[i])
        if abs(g[n]) * f1 > Fraction(float(rhs[i])):
            bad.append(n)
    return bad


def inverse_bound_check(f: ArithFunction, alpha: AlphaVector, box: Box | None = None) -> bool:
    """Check ``|f^{-1}(n)| <= n_1^{alpha_1} ... n_k^{alpha_k} / |f(1)|`` on every box index."""
    return not inverse_bound_violations(f, alpha, box)


# ------------------------------------------------------------------ regions


def _as_complex(s: Sequence) -> tuple[complex, ...]:
    return tuple(complex(x) for x in s)


def _real_sum(s, js) -> Fraction:
    return sum((Fraction(s[j].real) for j in js), Fraction(0))


def in_region_zfr(s: Sequence, alpha: AlphaVector) -> bool:
    """``Re(s_j) > 1 + alpha_j`` for every j (boundary excluded)."""
    s = _as_complex(s)
    if len(s) != alpha.k:
        raise InputError("point and alpha differ in arity")
    return all(Fraction(x.real) > 1 + Fraction(a) for x, a in zip(s, alpha.alpha))


def _suffix_region(s, offsets) -> bool:
    k = len(s)
    for l in range(1, k + 1):
        js = range(k - l, k)
        if not _real_sum(s, js) > l + sum((Fraction(offsets[j]) for j in js), Fraction(0)):
            return False
    return True


def in_region_zfr2(s: Sequence, alpha: AlphaVector) -> bool:
    """``Re(s_{k-l+1} + ... + s_k) > l + alpha_{k-l+1} + ... + alpha_k`` for l = 1..k."""
    s = _as_complex(s)
    if len(s) != alpha.k:
        raise InputError("point and alpha differ in arity")
    return _suffix_region(s, alpha.alpha)


def in_region_abs_EZ(s: Sequence) -> bool:
    """Absolute convergence region of the Euler-Zagier and star series."""
    s = _as_complex(s)
    return _suffix_region(s, (0.0,) * len(s))


# ------------------------------------------------------------- tail bounds
#
# All bounds below dominate sums of prod n_j^{-tau_j} over index sets that
# lie outside a truncation region, where tau_j = Re(s_j) - r_j.


def cube_tail(tau: Sequence[float], T: int) -> float:
    """Sum over n outside {1..T}^k; needs every tau_j > 1."""
    if any(not t > 1 for t in tau):
        raise OutOfRegion(f"exponents {tuple(tau)} not all > 1")
    full = 1.0
    part = 1.0
    for t in tau:
        if t > 1 + POLE_GUARD:
            z = zeta_upper(t, T)
        else:
            z = math.inf
        full = up(full * z)
        part = down(part * partial_zeta(float(t), int(T)).lower)
    return up(full - part)


def _suffix_excess(tau):
    k = len(tau)
    return [math.fsum(tau[j:]) - (k - j) for j in range(k)]


def _shifted_exponents(tau, lam):
    """Exponents after moving weight up the chain n_1 <= ... <= n_k.

    On the chain, n_i^{-tau_i} <= n_i^{-(tau_i+theta_i)} n_{i+1}^{theta_i} for
    theta_i >= 0.  theta is chosen from the suffix excesses so every shifted
    exponent exceeds 1; results are rounded down, which only loosens the bound.
    """
    k = len(tau)
    excess = _suffix_excess(tau)
    m = min(excess)
    eta = [0.0] * k
    for j in range(1, k):
        eta[j] = lam * m * (k - j) / (k - 1)
    theta = [max(0.0, excess[j] - eta[j]) for j in range(1, k)] + [0.0]
    shifted = []
    prev = 0.0
    for i in range(k):
        shifted.append(down(tau[i] + theta[i] - prev, 2))
        prev = theta[i]
    return shifted


_LAMBDAS = tuple(i / 40 for i in range(1, 40))
_CHAIN_TERMS = 2_000


def chain_tail(tau: Sequence[float], T: int) -> float:
    """Sum over the chain n_1 <= ... <= n_k with n_k > T.

    Valid on the suffix-sum region tau_j + ... + tau_k > k - j + 1.  Covers
    any function supported on the weak chain (Omega*), hence also Omega_EZ.
    """
    tau = [float(t) for t in tau]
    if any(e <= 0 for e in _suffix_excess(tau)):
        raise OutOfRegion(f"exponents {tuple(tau)} outside the chain convergence region")
    k = len(tau)
    if k == 1:
        return up(integral_tail(tau[0], T), 4)
    best = math.inf
    for lam in _LAMBDAS:
        sh = _shifted_exponents(tau, lam)
        if any(x <= 1 + POLE_GUARD for x in sh):
            continue
        bound = up(integral_tail(sh[-1], T), 4)
        for x in sh[:-1]:
            bound = up(bound * zeta_upper(x, _CHAIN_TERMS))
        best = min(best, bound)
    if all(t > 1 for t in tau):
        best = min(best, cube_tail(tau, T))
    if not math.isfinite(best):
        raise OutOfRegion(f"exponents {tuple(tau)} too close to the region boundary")
    return best


def chain_full(tau: Sequence[float]) -> float:
    """Upper bound for the full chain sum, by the same weight shift."""
    tau = [float(t) for t in tau]
    if any(e <= 0 for e in _suffix_excess(tau)):
        raise OutOfRegion(f"exponents {tuple(tau)} outside the chain convergence region")
    k = len(tau)
    if k == 1:
        return zeta_upper(tau[0], _CHAIN_TERMS)
    best = math.inf
    for lam in _LAMBDAS:
        sh = _shifted_exponents(tau, lam)
        if any(x <= 1 + POLE_GUARD for x in sh):
            continue
        bound = 1.0
        for x in sh:
            bound = up(bound * zeta_upper(x, _CHAIN_TERMS))
        best = min(best, bound)
    return best


def product_tail(tau: Sequence[float], N: int, chain: bool = False) -> float:
    """Sum over n with n_1 ... n_k > N (optionally only on the chain).

    Rankin's trick: 1 < (n_1...n_k / N)^delta on that set, so the sum is at
    most N^{-delta} times the full sum at tau - delta.
    """
    tau = [float(t) for t in tau]
    if chain:
        room = min(_suffix_excess(tau)[j] / (len(tau) - j) for j in range(len(tau)))
    else:
        room = min(t - 1 for t in tau)
    if not room > 0:
        raise OutOfRegion(f"exponents {tuple(tau)} outside the convergence region")
    best = math.inf
    for lam in _LAMBDAS:
        delta = lam * room
        shifted = [t - delta for t in tau]
        try:
            if chain:
                full = chain_full(shifted)
            else:
                full = 1.0
                for t in shifted:
                    full = up(full * zeta_upper(t, _CHAIN_TERMS))
        except (OutOfRegion, PoleGuard):
            continue
        best = min(best, up(full * float(N) ** (-delta), 4))
    if not math.isfinite(best):
        raise OutOfRegion(f"exponents {tuple(tau)} too close to the region boundary")
    return best
