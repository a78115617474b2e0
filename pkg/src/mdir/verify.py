"""Seeded property suites behind ``mdir verify``.

Every property runs a fixed number of cases drawn from ``random.Random(seed)``
and records failures as rows ``(suite, property, case, detail)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import analysis, core, series, ufd
from .analysis import GrowthBound
from .core import ArithFunction, Box
from .errors import MdirError
from .io import dumps_function, function_from_json, read_function

SUITES = ("core", "ufd", "analysis", "series")


@dataclass
class PropertyResult:
    suite: str
    name: str
    passed: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return len(self.failures)


@dataclass
class Report:
    results: list[PropertyResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.failed == 0 for r in self.results)

    def summary(self) -> str:
        width = max((len(f"{r.suite}.{r.name}") for r in self.results), default=10)
        lines = [f"{'property':<{width}}  pass  fail"]
        for r in self.results:
            lines.append(f"{r.suite + '.' + r.name:<{width}}  {r.passed:>4}  {r.failed:>4}")
        total_fail = sum(r.failed for r in self.results)
        lines.append(f"{len(self.results)} properties, {total_fail} failing cases")
        return "\n".join(lines)

    def failures_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "property", "case", "detail"])
        for r in self.results:
            for case, detail in r.failures:
                w.writerow([r.suite, r.name, case, detail])
        return buf.getvalue()


def random_function(rng: random.Random, box: Box, density: float = 0.3, unit: bool = True, span: int = 5):
    values = {}
    for n in box.indices():
        if rng.random() < density:
            values[n] = Fraction(rng.randint(-span, span), rng.randint(1, span))
    if unit:
        values[box.one] = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
    return ArithFunction(box, values)


def random_sparse(rng: random.Random, box: Box, count: int, unit: bool = False):
    idx = list(box.indices())
    values = {n: Fraction(rng.randint(1, 9) * rng.choice([-1, 1]), rng.randint(1, 4)) for n in rng.sample(idx, count)}
    if unit:
        values[box.one] = Fraction(1)
    return ArithFunction(box, values)


def _run(report: Report, suite: str, name: str, cases, check: Callable) -> None:
    res = PropertyResult(suite, name)
    for label, case in cases:
        try:
            detail = check(case)
        except MdirError as exc:
            detail = f"{type(exc).__name__}: {exc}"
        if detail in (None, True):
            res.passed += 1
        else:
            res.failures.append((label, "check returned false" if detail is False else str(detail)))
    report.results.append(res)


# ------------------------------------------------------------------ suites


def suite_core(report: Report, rng: random.Random) -> None:
    box = Box.product(2, 30)

    def inverse(f):
        return core.convolve(f, core.invert(f)) == core.identity(f.box)

    _run(report, "core", "inverse_round_trip",
         [(f"f{i}", random_function(rng, box)) for i in range(20)], inverse)

    def assoc(t):
        f, g, h = t
        return core.convolve(core.convolve(f, g), h) == core.convolve(f, core.convolve(g, h))

    small = Box.cube(2, 6)
    _run(report, "core", "associativity",
         [(f"t{i}", tuple(random_function(rng, small, unit=False) for _ in range(3))) for i in range(10)], assoc)

    def comm(t):
        f, g = t
        return core.convolve(f, g) == core.convolve(g, f)

    _run(report, "core", "commutativity",
         [(f"p{i}", (random_function(rng, small, unit=False), random_function(rng, small, unit=False))) for i in range(10)],
         comm)

    def distrib(t):
        f, g, h = t
        return core.convolve(f, core.add(g, h)) == core.add(core.convolve(f, g), core.convolve(f, h))

    _run(report, "core", "distributivity",
         [(f"t{i}", tuple(random_function(rng, small, unit=False) for _ in range(3))) for i in range(10)], distrib)

    def mobius(T):
        inv = core.invert(core.builtin("ones", 1, Box.cube(1, T)))
        return all(inv[(n,)] == _mobius(n) for n in range(1, T + 1)) or "mismatch"

    _run(report, "core", "mobius_oracle", [("T=500", 500)], mobius)

    def round_trip(f):
        return function_from_json(json.loads(dumps_function(f))) == f

    _run(report, "core", "file_round_trip", [(f"f{i}", random_function(rng, box)) for i in range(10)], round_trip)


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


def suite_ufd(report: Report, rng: random.Random) -> None:
    box = Box.product(2, 60)

    def norm_mult(t):
        f, g = t
        lhs, rhs = ufd.norm(core.convolve(f, g)), ufd.norm(f) * ufd.norm(g)
        return lhs == rhs or f"N(f*g)={lhs}, N(f)N(g)={rhs}"

    pairs = []
    for i in range(30):
        f, g = random_sparse(rng, box, 4), random_sparse(rng, box, 4)
        if ufd.norm(f) * ufd.norm(g) <= 60:
            pairs.append((f"p{i}", (f, g)))
    _run(report, "ufd", "norm_multiplicative", pairs, norm_mult)

    cube = Box.cube(3, 9)
    for which, name in (("star", "u_star"), ("EZ", "u_EZ"), ("MT", "u_MT")):
        base = core.builtin(name, 3, cube)

        def closed(t, which=which):
            return ufd.subring_membership(core.convolve(*t), which)

        cases = [(f"p{i}", (_masked(rng, base), _masked(rng, base))) for i in range(8)]
        _run(report, "ufd", f"closure_{which}", cases, closed)

    star = core.builtin("u_star", 3, cube)

    def inv_closed(f):
        return ufd.subring_membership(core.invert(f), "star")

    _run(report, "ufd", "inverse_closure_star",
         [(f"u{i}", _masked(rng, star, unit=True)) for i in range(5)], inv_closed)

    rbox = Box.product(2, 30)
    basis = ufd.PrimePositionBasis(2)

    def rmap(t):
        f, g = t
        return ufd.encode_R(core.convolve(f, g)) == ufd.series_mul(ufd.encode_R(f, basis), ufd.encode_R(g, basis))

    _run(report, "ufd", "rmap_homomorphism",
         [(f"p{i}", (random_function(rng, rbox, 0.2, False), random_function(rng, rbox, 0.2, False))) for i in range(5)],
         rmap)


def _masked(rng, base: ArithFunction, unit: bool = False) -> ArithFunction:
    """Random rational values on a random part of ``base``'s support."""
    values = {n: Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for n, _ in base.items() if rng.random() < 0.4}
    if unit:
        values[base.box.one] = Fraction(rng.choice([1, 2, -1]))
    return ArithFunction(base.box, values)


def suite_analysis(report: Report, rng: random.Random) -> None:
    refs = {2: math.pi**2 / 6, 3: 1.2020569031595942, 4: math.pi**4 / 90}

    def contains(a):
        return analysis.zeta_enclosure(a).contains(refs[a])

    _run(report, "analysis", "zeta_contains_reference", [(f"a={a}", a) for a in refs], contains)

    grid = sorted(rng.uniform(1.1, 6.0) for _ in range(10))

    def monotone(pair):
        a, b = pair
        return analysis.zeta_upper(b) <= analysis.zeta_upper(a)

    _run(report, "analysis", "zeta_monotone", [(f"{a:.4f}<{b:.4f}", (a, b)) for a, b in zip(grid, grid[1:])], monotone)

    def divisor_bound(t):
        n, a = t
        return analysis.divisor_sum_bound_holds(n, a)

    _run(report, "analysis", "divisor_sum_bound",
         [(f"n={n},a={a}", (n, a)) for a in (1.5, 2.0, 3.0) for n in rng.sample(range(1, 10_001), 50)], divisor_bound)

    def inverse_bound(t):
        f, T = t
        mags = [abs(v) for n, v in f.items() if n != f.box.one]
        b = GrowthBound(float(max(mags, default=Fraction(1))), (0.0,) * f.k)
        alpha = analysis.find_alpha(b, float(abs(f.at_one())))
        if not analysis.alpha_condition_holds(b, alpha, float(abs(f.at_one()))):
            return "alpha fails re-check"
        return analysis.inverse_bound_check(f, alpha, Box.cube(f.k, T))

    cases = [("u_star", (core.builtin("u_star", 2, Box.cube(2, 14)), 14)),
             ("u_EZ+I", (core.add(core.builtin("u_EZ", 2, Box.cube(2, 14)), core.identity(Box.cube(2, 14))), 14))]
    cases += [(f"rand{i}", (random_function(rng, Box.cube(2, 10), 0.3), 10)) for i in range(5)]
    _run(report, "analysis", "inverse_growth_bound", cases, inverse_bound)

    def k1_agree(t):
        s, a = t
        alpha = analysis.AlphaVector((a,))
        return analysis.in_region_zfr((s,), alpha) == analysis.in_region_zfr2((s,), alpha)

    _run(report, "analysis", "zfr_k1_agree",
         [(f"s={s:.3f}", (s, 1.5)) for s in [2.5, *(rng.uniform(1, 4) for _ in range(20))]], k1_agree)


def suite_series(report: Report, rng: random.Random) -> None:
    one = GrowthBound(1.0, (0.0,))

    def containment(T):
        r = series.eval_certified(core.builtin("ones", 1, Box.cube(1, T)), one, (2,), T)
        return r.contains(math.pi**2 / 6)

    _run(report, "series", "zeta2_containment", [(f"T={T}", T) for T in (100, 1000, 10_000)], containment)

    def refine(T):
        b = GrowthBound(1.0, (0.0, 0.0))
        return series.tail_radius(b, (2, 2), 2 * T) < series.tail_radius(b, (2, 2), T)

    _run(report, "series", "tail_refinement", [(f"T={T}", T) for T in (50, 100, 200, 400)], refine)

    def reciprocal(t):
        f, s = t
        k = f.k
        alpha = analysis.find_alpha(GrowthBound(1.0, (0.0,) * k), 1.0)
        return series.reciprocal_check(f, GrowthBound(1.0, (0.0,) * k), alpha, s, f.box.T).passed

    pts = {1: [(4,), (3.5,), (5 + 2j,)], 2: [(4.5, 4.5), (4, 5 - 1j), (6, 4)], 3: [(5, 5, 5), (4.5, 5, 6), (6 + 1j, 5, 5)]}
    cases = []
    for k, T in ((1, 1000), (2, 120), (3, 30)):
        for s in pts[k]:
            cases.append((f"u_star k={k} s={s}", (core.builtin("u_star", k, Box.cube(k, T)), s)))
    ez = core.add(core.builtin("u_EZ", 2, Box.cube(2, 120)), core.identity(Box.cube(2, 120)))
    cases += [(f"u_EZ+I s={s}", (ez, s)) for s in pts[2]]
    _run(report, "series", "reciprocal_identity", cases, reciprocal)

    def decomposition(s):
        return series.star_decomposition_check(s, 200).passed

    _run(report, "series", "star_decomposition", [(str(s), s) for s in [(2, 2), (0.5, 2.6), (3, 4)]], decomposition)

    cube = Box.cube(2, 40)

    def homomorphism(t):
        f, g = t
        bf = GrowthBound(float(max(abs(v) for _, v in f.items())), (0.0, 0.0))
        bg = GrowthBound(float(max(abs(v) for _, v in g.items())), (0.0, 0.0))
        rep = series.homomorphism_check(f, g, bf, bg, (6, 6), 40)
        return rep.passed or f"add {rep.add_delta:.3g}/{rep.add_slack:.3g} mul {rep.mul_delta:.3g}/{rep.mul_slack:.3g}"

    _run(report, "series", "homomorphism",
         [(f"p{i}", (random_sparse(rng, cube, 200, True), random_sparse(rng, cube, 200, True))) for i in range(5)],
         homomorphism)

    def conjugate(t):
        name, k, s = t
        f = core.builtin(name, k, Box.cube(k, 20))
        a = series.eval_truncated(f, s)
        b = series.eval_truncated(f, [complex(z).conjugate() for z in s])
        return abs(a.conjugate() - b) <= 4 * analysis.EPS * max(1.0, abs(a))

    cases = [(f"{name} k={k}", (name, k, [complex(rng.uniform(2, 5), rng.uniform(-9, 9)) for _ in range(k)]))
             for name in core.BUILTINS for k in (2, 3)]
    _run(report, "series", "conjugate_symmetry", cases, conjugate)


SUITE_FUNCS = {"core": suite_core, "ufd": suite_ufd, "analysis": suite_analysis, "series": suite_series}


def check_fixtures(report: Report, paths) -> None:
    """Each fixture must parse and survive a write/read round trip."""

    def load(path):
        f = read_function(path)
        return function_from_json(json.loads(dumps_function(f))) == f

    _run(report, "fixtures", "function_file", [(str(p), p) for p in paths], load)


def fixture_paths(target) -> list[Path]:
    p = Path(target)
    if p.is_dir():
        return sorted(p.glob("*.json"))
    return [p]


def run(suite: str = "all", seed: int = 0, fixtures=()) -> Report:
    names = SUITES if suite == "all" else (suite,)
    report = Report()
    for name in names:
        # each suite gets its own stream so results do not depend on which ran first
        SUITE_FUNCS[name](report, random.Random(f"{seed}:{name}"))
    if fixtures:
        check_fixtures(report, [p for target in fixtures for p in fixture_paths(target)])
    return report
