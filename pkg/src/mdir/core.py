"""Exact arithmetic in the ring of k-tuple arithmetic functions.

Functions are materialized on a finite *box*: either the cube
``{1..T}^k`` or the product-bounded set ``n_1 * ... * n_k <= T``.  Both are
closed under componentwise divisors, so the convolution and the recursive
inverse computed on a box coincide with the global objects restricted to it.
(Divisibility certificates in :mod:`mdir.ufd` are box-local only.)

Values are exact rationals.  Two storage layouts exist behind one interface:
a sparse ``dict`` (absent key means zero) and, for integer-valued functions on
cube boxes, a dense ``numpy`` integer array used by the compiled kernels.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

import numpy as np
import sympy

from .errors import ArityMismatch, InputError, NotAUnit

MultiIndex = tuple[int, ...]

BUILTINS = ("identity_I", "ones", "u_EZ", "u_star", "u_MT", "u_AV")

# Boxes at least this large go to the compiled integer kernels when eligible.
KERNEL_MIN_SIZE = 20_000


def check_index(n: Iterable[int], k: int | None = None) -> MultiIndex:
    n = tuple(n)
    if not n:
        raise InputError("multi-index must have at least one entry")
    if k is not None and len(n) != k:
        raise ArityMismatch(f"index {n} has arity {len(n)}, expected {k}")
    for x in n:
        if not isinstance(x, (int, np.integer)) or isinstance(x, bool) or x < 1:
            raise InputError(f"index entries must be positive integers, got {n}")
    return tuple(int(x) for x in n)


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return Fraction(int(v))
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {v!r}") from exc
    raise InputError(f"values must be exact rationals, got {type(v).__name__}")


@lru_cache(maxsize=None)
def divisors(m: int) -> tuple[int, ...]:
    return tuple(sympy.divisors(m))


def divisor_pairs(n: Iterable[int]) -> list[tuple[MultiIndex, MultiIndex]]:
    """All ``(a, b)`` with ``a * b == n`` componentwise, lexicographic in ``a``."""
    n = check_index(n)
    return [
        (a, tuple(x // y for x, y in zip(n, a)))
        for a in itertools.product(*(divisors(x) for x in n))
    ]


@dataclass(frozen=True)
class Box:
    """Finite truncation of N^k: ``cube`` is {1..T}^k, ``product`` is prod(n) <= T."""

    k: int
    T: int
    mode: str = "cube"

    def __post_init__(self):
        if self.k < 1:
            raise InputError("arity k must be >= 1")
        if self.T < 1:
            raise InputError("box limit T must be >= 1")
        if self.mode not in ("cube", "product"):
            raise InputError(f"unknown box mode {self.mode!r}")

    @classmethod
    def cube(cls, k: int, T: int) -> "Box":
        return cls(k, T, "cube")

    @classmethod
    def product(cls, k: int, T: int) -> "Box":
        return cls(k, T, "product")

    @classmethod
    def parse(cls, text: str, k: int) -> "Box":
        """Parse ``"cube:8"`` or ``"product:30"``."""
        try:
            mode, limit = text.split(":")
            return cls(k, int(limit), mode.strip())
        except ValueError as exc:
            raise InputError(f"bad box {text!r}, expected cube:T or product:T") from exc

    def __str__(self):
        return f"{self.mode}:{self.T}"

    @property
    def one(self) -> MultiIndex:
        return (1,) * self.k

    def contains(self, n: MultiIndex) -> bool:
        if len(n) != self.k or min(n) < 1:
            return False
        if self.mode == "cube":
            return max(n) <= self.T
        return math.prod(n) <= self.T

    __contains__ = contains

    def indices(self) -> Iterator[MultiIndex]:
        """Every index of the box in lexicographic order."""
        if self.mode == "cube":
            yield from itertools.product(range(1, self.T + 1), repeat=self.k)
        else:
            yield from _product_indices(self.k, self.T)

    @property
    def size(self) -> int:
        if self.mode == "cube":
            return self.T**self.k
        return _product_count(self.k, self.T)

    def covers(self, other: "Box") -> bool:
        if self.k != other.k:
            return False
        if self.mode == other.mode:
            return other.T <= self.T
        if self.mode == "cube":  # other is product-bounded
            return other.T <= self.T
        return other.T**other.k <= self.T

    def intersect(self, other: "Box") -> "Box":
        if self.k != other.k:
            raise ArityMismatch(f"arity {self.k} vs {other.k}")
        if self.covers(other):
            return other
        if other.covers(self):
            return self
        raise InputError(f"intersection of {self} and {other} is not a box")

    def to_json(self) -> dict:
        return {"mode": self.mode, "T": self.T}


def _product_indices(k: int, T: int) -> Iterator[MultiIndex]:
    if k == 1:
        for x in range(1, T + 1):
            yield (x,)
        return
    for x in range(1, T + 1):
        for rest in _product_indices(k - 1, T // x):
            yield (x,) + rest


@lru_cache(maxsize=None)
def _product_count(k: int, T: int) -> int:
    if k == 1:
        return T
    return sum(_product_count(k - 1, T // x) for x in range(1, T + 1))


class ArithFunction:
    """A k-tuple arithmetic function restricted to a box.

    Values are read with ``f[n]`` (absent means zero).  Instances are treated
    as immutable; operations always build new objects.
    """

    __slots__ = ("box", "name", "_values", "_dense")

    def __init__(
        self,
        box: Box,
        values: Mapping | None = None,
        name: str | None = None,
        *,
        dense: np.ndarray | None = None,
    ):
        self.box = box
        self.name = name
        self._dense = None
        self._values = None
        if dense is not None:
            if box.mode != "cube" or dense.shape != (box.T,) * box.k:
                raise InputError("dense storage needs a cube box of matching shape")
            if dense.dtype.kind != "i":
                raise InputError("dense storage holds integers only")
            self._dense = dense
            self._dense.setflags(write=False)
            return
        table = {}
        for n, v in (values or {}).items():
            n = check_index(n, box.k)
            if n not in box:
                raise InputError(f"index {n} lies outside box {box}")
            v = to_fraction(v)
            if v:
                table[n] = v
        self._values = table

    @property
    def k(self) -> int:
        return self.box.k

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    def _table(self) -> dict[MultiIndex, Fraction]:
        if self._values is None:
            nz = np.nonzero(self._dense)
            vals = self._dense[nz].tolist()
            coords = zip(*(c + 1 for c in nz))
            self._values = {
                tuple(int(x) for x in n): Fraction(v) for n, v in zip(coords, vals)
            }
        return self._values

    def __getitem__(self, n) -> Fraction:
        n = tuple(n)
        if n not in self.box:
            raise IndexError(f"{n} is outside box {self.box}")
        if self._values is None:
            return Fraction(int(self._dense[tuple(x - 1 for x in n)]))
        return self._values.get(n, Fraction(0))

    def get(self, n) -> Fraction:
        """Like ``f[n]`` without the box check; internal hot paths only."""
        if self._values is None:
            return Fraction(int(self._dense[tuple(x - 1 for x in n)]))
        return self._values.get(n, Fraction(0))

    def items(self) -> list[tuple[MultiIndex, Fraction]]:
        """Nonzero entries in lexicographic order."""
        return sorted(self._table().items())

    def support(self) -> list[MultiIndex]:
        return [n for n, _ in self.items()]

    @property
    def nnz(self) -> int:
        if self._values is None:
            return int(np.count_nonzero(self._dense))
        return len(self._values)

    def at_one(self) -> Fraction:
        return self.get(self.box.one)

    def is_integral(self) -> bool:
        if self._dense is not None:
            return True
        return all(v.denominator == 1 for v in self._values.values())

    def support_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Nonzero entries as arrays for numeric work.

        Returns ``(idx, coef, conv_err)``: 1-based indices of shape (m, k), the
        coefficients rounded to float64, and a bound on each rounding error.
        """
        if self._values is None:
            nz = np.nonzero(self._dense)
            idx = np.stack([c + 1 for c in nz], axis=1).astype(np.int64)
            raw = self._dense[nz]
            coef = raw.astype(np.float64)
            big = np.abs(raw) > 2**53
            conv = np.where(big, np.abs(coef) * np.finfo(float).eps, 0.0)
            return idx, coef, conv
        items = self.items()
        if not items:
            return np.zeros((0, self.k), np.int64), np.zeros(0), np.zeros(0)
        idx = np.array([n for n, _ in items], dtype=np.int64)
        coef = np.array([float(v) for _, v in items])
        conv = np.array(
            [0.0 if Fraction(c) == v else abs(c) * np.finfo(float).eps for c, (_, v) in zip(coef, items)]
        )
        return idx, coef, conv

    def dense_int(self) -> np.ndarray | None:
        """Dense int64 copy on a cube box, or None when not representable."""
        if self.box.mode != "cube":
            return None
        if self._dense is not None:
            return self._dense
        if not self.is_integral():
            return None
        if any(abs(v.numerator) >= 2**62 for v in self._values.values()):
            return None
        arr = np.zeros((self.box.T,) * self.k, dtype=np.int64)
        for n, v in self._values.items():
            arr[tuple(x - 1 for x in n)] = v.numerator
        return arr

    def restrict(self, box: Box) -> "ArithFunction":
        if not self.box.covers(box):
            raise InputError(f"{box} is not inside {self.box}")
        if box == self.box:
            return self
        if self._dense is not None and box.mode == "cube":
            sl = (slice(0, box.T),) * self.k
            return ArithFunction(box, name=self.name, dense=np.ascontiguousarray(self._dense[sl]))
        return ArithFunction(box, {n: v for n, v in self._table().items() if n in box}, self.name)

    def __eq__(self, other):
        if not isinstance(other, ArithFunction):
            return NotImplemented
        if self.box != other.box:
            return False
        if self._dense is not None and other._dense is not None:
            return bool(np.array_equal(self._dense, other._dense))
        return self._table() == other._table()

    __hash__ = None

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<ArithFunction{label} k={self.k} box={self.box} nnz={self.nnz}>"


def function_from_callable(fn, box: Box, name: str | None = None) -> ArithFunction:
    return ArithFunction(box, {n: fn(n) for n in box.indices()}, name)


def zero(box: Box) -> ArithFunction:
    return ArithFunction(box, {})


def identity(box: Box) -> ArithFunction:
    return builtin("identity_I", box.k, box)


def _check_same_arity(*fs: ArithFunction) -> int:
    ks = {f.k for f in fs}
    if len(ks) != 1:
        raise ArityMismatch(f"arity mismatch: {sorted(ks)}")
    return ks.pop()


def _operation_box(box: Box | None, *fs: ArithFunction) -> Box:
    if box is None:
        box = fs[0].box
        for f in fs[1:]:
            box = box.intersect(f.box)
    for f in fs:
        if f.k != box.k:
            raise ArityMismatch(f"arity {f.k} vs box arity {box.k}")
        if not f.box.covers(box):
            raise InputError(f"operand defined on {f.box} does not cover {box}")
    return box


def add(f: ArithFunction, g: ArithFunction) -> ArithFunction:
    _check_same_arity(f, g)
    box = f.box.intersect(g.box)
    if f.is_dense and g.is_dense and box.mode == "cube":
        sl = (slice(0, box.T),) * box.k
        a = f._dense[sl].astype(np.int64)
        b = g._dense[sl].astype(np.int64)
        return ArithFunction(box, dense=a + b)
    ft = f.restrict(box)._table()
    gt = g.restrict(box)._table()
    out = dict(ft)
    for n, v in gt.items():
        out[n] = out.get(n, 0) + v
    return ArithFunction(box, out)


def scale(c, f: ArithFunction) -> ArithFunction:
    c = to_fraction(c)
    if f.is_dense and c.denominator == 1:
        return ArithFunction(f.box, dense=f._dense.astype(np.int64) * c.numerator)
    return ArithFunction(f.box, {n: c * v for n, v in f._table().items()})


def negate(f: ArithFunction) -> ArithFunction:
    return scale(-1, f)


# ---------------------------------------------------------------- builtins


def _indicator(name: str, k: int):
    if name == "identity_I":
        return lambda n: all(x == 1 for x in n)
    if name == "ones":
        return lambda n: True
    if name == "u_EZ":
        return lambda n: all(n[i] < n[i + 1] for i in range(k - 1))
    if name == "u_star":
        return lambda n: all(n[i] <= n[i + 1] for i in range(k - 1))
    if name == "u_MT":
        return lambda n: n[-1] == sum(n[:-1])
    if name == "u_AV":
        return lambda n: n[-1] == sum(n[:-1]) and all(n[i] < n[i + 1] for i in range(k - 2))
    raise InputError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")


def _indicator_dense(name: str, k: int, T: int) -> np.ndarray:
    axes = [np.arange(1, T + 1).reshape((1,) * j + (T,) + (1,) * (k - j - 1)) for j in range(k)]
    mask = np.ones((T,) * k, dtype=bool)
    if name == "identity_I":
        mask[:] = False
        mask[(0,) * k] = True
    elif name in ("u_EZ", "u_star"):
        for j in range(k - 1):
            mask &= (axes[j] < axes[j + 1]) if name == "u_EZ" else (axes[j] <= axes[j + 1])
    elif name in ("u_MT", "u_AV"):
        mask &= axes[-1] == sum(axes[:-1])
        if name == "u_AV":
            for j in range(k - 2):
                mask &= axes[j] < axes[j + 1]
    return mask.astype(np.int8)


def builtin(name: str, k: int, box: Box | None = None) -> ArithFunction:
    """Indicator functions: ``identity_I``, ``ones``, ``u_EZ``, ``u_star``, ``u_MT``, ``u_AV``.

    ``u_MT`` and ``u_AV`` take the total arity: the last coordinate plays the
    role of the sum variable, so they need ``k >= 2``.
    """
    pred = _indicator(name, k)
    if k < 1 or (name in ("u_MT", "u_AV") and k < 2):
        raise InputError(f"builtin {name} does not support arity {k}")
    if box is None:
        box = Box.cube(k, 8)
    if box.k != k:
        raise ArityMismatch(f"box arity {box.k} vs k={k}")
    if box.mode == "cube":
        return ArithFunction(box, name=name, dense=_indicator_dense(name, k, box.T))
    return ArithFunction(box, {n: 1 for n in box.indices() if pred(n)}, name)


# ------------------------------------------------------------- convolution


def _kernels():
    try:
        from . import _kernels
    except ImportError:  # numba missing
        return None
    return _kernels


def convolve(
    f: ArithFunction, g: ArithFunction, box: Box | None = None, *, method: str = "auto"
) -> ArithFunction:
    """Multiple Dirichlet product ``(f*g)(n) = sum_{a.b=n} f(a) g(b)`` on ``box``."""
    _check_same_arity(f, g)
    box = _operation_box(box, f, g)
    if method not in ("auto", "exact", "integer"):
        raise InputError(f"unknown method {method!r}")
    if method == "integer" or (method == "auto" and box.mode == "cube" and box.size >= KERNEL_MIN_SIZE):
        out = _convolve_integer(f, g, box)
        if out is not None:
            return out
        if method == "integer":
            raise InputError("integer kernel not applicable to these operands")
    return _convolve_exact(f, g, box)


def _convolve_exact(f, g, box):
    # Output-indexed: each n reads divisor pairs only, no scatter.
    fget, gget = f.get, g.get
    out = {}
    for n in box.indices():
        acc = 0
        for a in itertools.product(*(divisors(x) for x in n)):
            fa = fget(a)
            if fa:
                gb = gget(tuple(x // y for x, y in zip(n, a)))
                if gb:
                    acc += fa * gb
        if acc:
            out[n] = acc
    return ArithFunction(box, out)


def _convolve_integer(f, g, box):
    kern = _kernels()
    if kern is None or box.mode != "cube":
        return None
    fd, gd = f.restrict(box).dense_int(), g.restrict(box).dense_int()
    if fd is None or gd is None:
        return None
    res = kern.convolve_dense(fd, gd, box.T, box.k)
    if res is None:
        return None
    return ArithFunction(box, dense=res)


# ----------------------------------------------------------------- inverse


def is_unit(f: ArithFunction) -> bool:
    return f.at_one() != 0


def inversion_order(box: Box) -> list[MultiIndex]:
    """Ascending coordinate sum, ties broken lexicographically."""
    return sorted(box.indices(), key=lambda n: (sum(n), n))


def invert(f: ArithFunction, box: Box | None = None, *, method: str = "auto") -> ArithFunction:
    """Inverse of a unit under the multiple Dirichlet product, on ``box``.

    Uses the recursion ``g(1) = 1/f(1)`` and
    ``g(n) = -(1/f(1)) * sum_{a.b=n, b != n} f(a) g(b)``.  The recursion only
    reads divisors of ``n``, so the result is the global inverse restricted to
    the box.  Integer functions with ``f(1) = +-1`` on large cubes run through
    a compiled exact int64 kernel (with an overflow guard that falls back to
    the rational path).
    """
    box = _operation_box(box, f)
    f1 = f.at_one()
    if f1 == 0:
        raise NotAUnit("f(1,...,1) = 0, so f has no inverse")
    if method not in ("auto", "exact", "integer"):
        raise InputError(f"unknown method {method!r}")
    if method == "integer" or (method == "auto" and box.mode == "cube" and box.size >= KERNEL_MIN_SIZE):
        out = _invert_integer(f, box)
        if out is not None:
            return out
        if method == "integer":
            raise InputError("integer kernel not applicable to this function")
    return _invert_exact(f, box, f1)


def _invert_exact(f, box, f1):
    one = box.one
    fget = f.get
    g: dict[MultiIndex, Fraction] = {}
    inv_f1 = 1 / f1
    for n in inversion_order(box):
        if n == one:
            g[n] = inv_f1
            continue
        acc = 0
        for a in itertools.product(*(divisors(x) for x in n)):
            if a == one:
                continue
            fa = fget(a)
            if fa:
                gb = g.get(tuple(x // y for x, y in zip(n, a)))
                if gb:
                    acc += fa * gb
        if acc:
            g[n] = -acc * inv_f1
    return ArithFunction(box, g)


def _invert_integer(f, box):
    kern = _kernels()
    if kern is None or box.mode != "cube":
        return None
    if abs(f.at_one()) != 1:
        return None
    fd = f.restrict(box).dense_int()
    if fd is None:
        return None
    res = kern.invert_dense(fd, box.T, box.k)
    if res is None:
        return None
    return ArithFunction(box, dense=res)
