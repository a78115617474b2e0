"""Ring structure: norm, divisibility on a box, prime certificates, subrings,
and the prime-position encoding into power series in countably many variables.

Divisibility and equivalence are decided from the equations on a finite box.
``Inconsistent`` is a global disproof because every box equation is a
necessary condition; ``SolvableOnBox`` only says the box equations admit a
solution and is not a proof of global divisibility.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy

from .core import (
    ArithFunction,
    Box,
    MultiIndex,
    _check_same_arity,
    _operation_box,
    check_index,
    convolve,
    divisors,
    invert,
    is_unit,
)
from .errors import DomainError, InputError, NotAUnit
from .io import format_rational

__all__ = [
    "norm",
    "norm_is_box_limited",
    "is_unit",
    "divide_by_unit",
    "divides_on_box",
    "SolvableOnBox",
    "Inconsistent",
    "equivalent_on_box",
    "Equivalence",
    "PrimeCertificate",
    "norm_prime_certificate",
    "subring_membership",
    "PrimePositionBasis",
    "ExponentVector",
    "alpha_exponents",
    "TruncatedSeries",
    "encode_R",
    "decode_R",
    "series_mul",
]


# -------------------------------------------------------------------- norm


def norm(f: ArithFunction) -> int:
    """Smallest coordinate product over the support; 0 if f vanishes on its box."""
    if f.is_dense:
        idx, _, _ = f.support_arrays()
        return int(idx.prod(axis=1).min()) if len(idx) else 0
    return min((math.prod(n) for n, _ in f.items()), default=0)


def norm_is_box_limited(f: ArithFunction) -> bool:
    """True when the norm 0 only reflects the box: f may be nonzero beyond it."""
    return f.nnz == 0


# ------------------------------------------------------------ divisibility


def divide_by_unit(g: ArithFunction, f: ArithFunction, box: Box | None = None) -> ArithFunction:
    """``h = f^{-1} * g``, so that ``f * h = g`` on the box."""
    box = _operation_box(box, f, g)
    if not is_unit(f):
        raise NotAUnit("divisor is not a unit")
    return convolve(invert(f, box), g, box)


@dataclass(frozen=True)
class SolvableOnBox:
    witness: ArithFunction

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Inconsistent:
    index: MultiIndex  # equation that reduced to 0 = c with c != 0

    def __bool__(self):
        return False


def _key(n):
    return (sum(n), n)


def divides_on_box(f: ArithFunction, g: ArithFunction, box: Box | None = None):
    """Solve ``g(n) = sum_{a.b=n} f(a) h(b)`` exactly for h on the box.

    Free unknowns are set to zero.  Returns :class:`SolvableOnBox` carrying the
    particular solution, or :class:`Inconsistent` naming the failing equation.
    """
    _check_same_arity(f, g)
    box = _operation_box(box, f, g)
    order = sorted(box.indices(), key=_key)
    pivots: dict[MultiIndex, tuple[dict, Fraction]] = {}
    created: list[MultiIndex] = []
    for n in order:
        row: dict[MultiIndex, Fraction] = {}
        for d in _divisor_tuples(n):
            fa = f.get(d)
            if fa:
                b = tuple(x // y for x, y in zip(n, d))
                row[b] = row.get(b, 0) + fa
        rhs = g.get(n)
        # reduce against existing pivots until no pivot variable remains
        pending = [v for v in row if v in pivots]
        while pending:
            v = pending.pop()
            c = row.pop(v, 0)
            if not c:
                continue
            prow, prhs = pivots[v]
            rhs -= c * prhs
            for w, cw in prow.items():
                nv = row.get(w, 0) - c * cw
                if nv:
                    row[w] = nv
                    if w in pivots:
                        pending.append(w)
                else:
                    row.pop(w, None)
        row = {v: c for v, c in row.items() if c}
        if not row:
            if rhs:
                return Inconsistent(n)
            continue
        pv = max(row, key=_key)
        c = row.pop(pv)
        pivots[pv] = ({w: cw / c for w, cw in row.items()}, rhs / c)
        created.append(pv)
    h: dict[MultiIndex, Fraction] = {}
    for pv in reversed(created):
        prow, prhs = pivots[pv]
        val = prhs - sum((cw * h.get(w, 0) for w, cw in prow.items()), Fraction(0))
        if val:
            h[pv] = val
    return SolvableOnBox(ArithFunction(box, h))


def _divisor_tuples(n):
    return itertools.product(*(divisors(x) for x in n))


@dataclass(frozen=True)
class Equivalence:
    equivalent: bool
    witness: ArithFunction | None = None  # unit eps with f = eps * g on the box

    def __bool__(self):
        return self.equivalent


def equivalent_on_box(f: ArithFunction, g: ArithFunction, box: Box | None = None) -> Equivalence:
    box = _operation_box(box, f, g)
    if is_unit(f) and is_unit(g):
        return Equivalence(True, convolve(f, invert(g, box), box))
    f_by_g = divides_on_box(g, f, box)  # f = g * eps
    if not f_by_g:
        return Equivalence(False)
    if not divides_on_box(f, g, box):
        return Equivalence(False)
    eps = f_by_g.witness
    return Equivalence(True, eps if is_unit(eps) else None)


# ------------------------------------------------------------------ primes


class PrimeCertificate(enum.Enum):
    CERTIFIED_PRIME = "CertifiedPrime"
    UNKNOWN = "Unknown"


def norm_prime_certificate(f: ArithFunction) -> PrimeCertificate:
    """Prime if the norm is a rational prime; otherwise undecided.

    The criterion is sufficient only, so a composite norm gives ``UNKNOWN``.
    """
    if f.nnz == 0:
        raise DomainError("primality is undefined for the zero function")
    if is_unit(f):
        raise DomainError("primality is undefined for units")
    if sympy.isprime(norm(f)):
        return PrimeCertificate.CERTIFIED_PRIME
    return PrimeCertificate.UNKNOWN


# ---------------------------------------------------------------- subrings

SUBRINGS = ("EZ", "star", "MT", "AV")


def _support_violations(idx: np.ndarray, which: str) -> np.ndarray:
    k = idx.shape[1]
    if which == "star":
        return ~np.all(idx[:, :-1] <= idx[:, 1:], axis=1) if k > 1 else np.zeros(len(idx), bool)
    if which == "EZ":
        return ~np.all(idx[:, :-1] < idx[:, 1:], axis=1) if k > 1 else np.zeros(len(idx), bool)
    if which == "MT":
        return idx[:, -1] < idx[:, :-1].sum(axis=1)
    if which == "AV":
        return _support_violations(idx, "EZ") | _support_violations(idx, "MT")
    raise InputError(f"unknown subring {which!r}; choose from {', '.join(SUBRINGS)}")


def subring_membership(f: ArithFunction, which: str) -> bool:
    """Check the support condition of Omega_EZ, Omega*, Omega_MT or Omega_AV on the box."""
    idx, _, _ = f.support_arrays()
    if len(idx) == 0:
        _support_violations(np.ones((1, f.k), np.int64), which)  # validates `which`
        return True
    return not bool(_support_violations(idx, which).any())


# ---------------------------------------------------------- R-map encoding


@dataclass(frozen=True)
class PrimePositionBasis:
    """Enumeration of the prime-position tuples (1,..,p,..,1).

    Slot ``m = k*(i-1) + j`` holds the i-th prime at position j (1-based).
    """

    k: int

    def slot(self, p: int, j: int) -> int:
        if not sympy.isprime(p) or not 1 <= j <= self.k:
            raise InputError(f"({p}, {j}) is not a prime position for k={self.k}")
        return self.k * (sympy.sieve.search(p)[0] - 1) + j

    def position(self, m: int) -> tuple[int, int]:
        if m < 1:
            raise InputError("slots start at 1")
        i, j = divmod(m - 1, self.k)
        return int(sympy.sieve[i + 1]), j + 1

    def index_of(self, m: int) -> MultiIndex:
        p, j = self.position(m)
        return tuple(p if t == j else 1 for t in range(1, self.k + 1))


@dataclass(frozen=True, order=True)
class ExponentVector:
    """Finite-support exponents, stored as sorted ``(slot, power)`` pairs."""

    pairs: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_dict(cls, d) -> "ExponentVector":
        return cls(tuple(sorted((m, e) for m, e in d.items() if e)))

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def __add__(self, other: "ExponentVector") -> "ExponentVector":
        d = self.as_dict()
        for m, e in other.pairs:
            d[m] = d.get(m, 0) + e
        return ExponentVector.from_dict(d)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.pairs)


def alpha_exponents(n, basis: PrimePositionBasis) -> ExponentVector:
    n = check_index(n, basis.k)
    d = {}
    for j, x in enumerate(n, start=1):
        for p, e in sympy.factorint(x).items():
            d[basis.slot(p, j)] = e
    return ExponentVector.from_dict(d)


def index_from_exponents(e: ExponentVector, basis: PrimePositionBasis) -> MultiIndex:
    n = [1] * basis.k
    for m, power in e.pairs:
        p, j = basis.position(m)
        n[j - 1] *= p**power
    return tuple(n)


@dataclass
class TruncatedSeries:
    """Coefficient table over monomials, truncated to the image of a box."""

    basis: PrimePositionBasis
    box: Box
    coeffs: dict[ExponentVector, Fraction] = field(default_factory=dict)

    def allowed(self) -> set[ExponentVector]:
        return _box_image(self.box, self.basis)

    def to_json(self) -> dict:
        return {
            "monomials": [
                {"exp": [list(p) for p in e.pairs], "coef": format_rational(c)}
                for e, c in sorted(self.coeffs.items())
            ]
        }

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.basis == other.basis and self.box == other.box and self.coeffs == other.coeffs


@lru_cache(maxsize=32)
def _box_image(box, basis):
    return frozenset(alpha_exponents(n, basis) for n in box.indices())


def encode_R(f: ArithFunction, basis: PrimePositionBasis | None = None) -> TruncatedSeries:
    basis = basis or PrimePositionBasis(f.k)
    if basis.k != f.k:
        raise InputError(f"basis arity {basis.k} vs function arity {f.k}")
    coeffs = {alpha_exponents(n, basis): v for n, v in f.items()}
    return TruncatedSeries(basis, f.box, coeffs)


def decode_R(A: TruncatedSeries) -> ArithFunction:
    return ArithFunction(A.box, {index_from_exponents(e, A.basis): c for e, c in A.coeffs.items()})


def series_mul(A: TruncatedSeries, B: TruncatedSeries) -> TruncatedSeries:
    """Product of truncated series, dropping monomials outside the box image."""
    if A.basis != B.basis or A.box != B.box:
        raise InputError("series must share basis and box")
    allowed = A.allowed()
    out: dict[ExponentVector, Fraction] = {}
    for ea, ca in A.coeffs.items():
        for eb, cb in B.coeffs.items():
            e = ea + eb
            if e in allowed:
                out[e] = out.get(e, 0) + ca * cb
    return TruncatedSeries(A.basis, A.box, {e: c for e, c in out.items() if c})
