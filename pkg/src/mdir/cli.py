"""``mdir`` command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 domain error.
Errors are reported on stderr as ``{"error": <kind>, "message": <text>}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis, core, series, ufd, verify
from .analysis import AlphaVector, GrowthBound
from .core import ArithFunction, Box
from .errors import ArityMismatch, DomainError, InputError
from .io import dumps_function, format_rational, read_function

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


class _AppendSource(argparse.Action):
    """Collect ``--builtin`` and ``--file`` into one ordered list."""

    def __call__(self, parser, namespace, value, option_string=None):
        kind = "builtin" if option_string == "--builtin" else "file"
        sources = list(getattr(namespace, "sources", None) or [])
        sources.append((kind, value))
        namespace.sources = sources


# ------------------------------------------------------------------ parsing


def parse_floats(text: str, k: int | None = None, what: str = "value") -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if k is not None and len(vals) == 1:
        vals = vals * k
    if k is not None and len(vals) != k:
        raise ArityMismatch(f"{what} has {len(vals)} entries, arity is {k}")
    return vals


def parse_point(text: str) -> tuple[complex, ...]:
    """``"re,im;re,im"`` -> complex tuple; a bare ``re`` means zero imaginary part."""
    out = []
    for part in text.split(";"):
        nums = part.split(",")
        if not 1 <= len(nums) <= 2:
            raise InputError(f"bad coordinate {part!r}; use re,im")
        try:
            re_, im = float(nums[0]), float(nums[1]) if len(nums) == 2 else 0.0
        except ValueError:
            raise InputError(f"bad coordinate {part!r}; use re,im") from None
        out.append(complex(re_, im))
    return series.point(out)


def load_sources(args, count: int | None = None) -> list[ArithFunction]:
    sources = getattr(args, "sources", None) or []
    if count is not None and len(sources) != count:
        raise InputError(f"expected {count} input(s) via --builtin/--file, got {len(sources)}")
    if not sources:
        raise InputError("no input; use --builtin NAME or --file PATH")
    files = {p: read_function(p) for kind, p in sources if kind == "file"}
    k = args.k
    if k is None:
        if not files:
            raise InputError("--k is required for built-in inputs")
        k = next(iter(files.values())).k
    if args.box is not None:
        box = Box.parse(args.box, k)
    elif files:
        box = next(iter(files.values())).box
    else:
        box = Box.cube(k, 8)
    out = []
    for kind, ref in sources:
        f = core.builtin(ref, k, box) if kind == "builtin" else files[ref]
        if f.k != k:
            raise ArityMismatch(f"{ref} has arity {f.k}, expected {k}")
        out.append(f)
    return out


def emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def emit_json(obj, path: str | None = None) -> None:
    emit(json.dumps(obj, indent=2) + "\n", path)


def _growth_bound(args, f: ArithFunction) -> GrowthBound:
    if args.C is not None or args.r is not None:
        if args.C is None or args.r is None:
            raise InputError("--C and --r must be given together")
        return GrowthBound(args.C, parse_floats(args.r, f.k, "--r"))
    if f.name is None:
        raise InputError("--certify on a file input needs --C and --r")
    # every built-in is a 0/1 indicator; I vanishes off (1,...,1)
    return GrowthBound(0.0 if f.name == "identity_I" else 1.0, (0.0,) * f.k)


def _alpha(args, f: ArithFunction | None, b: GrowthBound | None, k: int) -> AlphaVector:
    if args.alpha is not None:
        return AlphaVector(parse_floats(args.alpha, k, "--alpha"))
    if b is None or f is None:
        raise InputError("region check needs --alpha or a growth bound")
    if b.C == 0:
        return analysis.find_alpha(GrowthBound(1.0, b.r), float(abs(f.at_one())))
    return analysis.find_alpha(b, float(abs(f.at_one())))


# ----------------------------------------------------------------- commands


def cmd_convolve(args):
    f, g = load_sources(args, 2)
    emit(dumps_function(core.convolve(f, g, _box_arg(args, f))), args.output)


def cmd_add(args):
    f, g = load_sources(args, 2)
    emit(dumps_function(core.add(f, g)), args.output)


def cmd_invert(args):
    (f,) = load_sources(args, 1)
    emit(dumps_function(core.invert(f)), args.output)


def cmd_norm(args):
    (f,) = load_sources(args, 1)
    print(ufd.norm(f))


def cmd_divide(args):
    g, f = load_sources(args, 2)
    if core.is_unit(f):
        h = ufd.divide_by_unit(g, f)
        status = {"status": "SolvableOnBox", "unit_divisor": True}
    else:
        res = ufd.divides_on_box(f, g)
        if not res:
            emit_json({"status": "Inconsistent", "index": list(res.index)})
            return EXIT_OK
        h = res.witness
        status = {"status": "SolvableOnBox", "unit_divisor": False}
    if args.output:
        emit(dumps_function(h), args.output)
        emit_json(status)
    else:
        emit(dumps_function(h), None)


def _box_arg(args, f):
    return Box.parse(args.box, f.k) if args.box else None


def cmd_alpha(args):
    if args.f1 is None or not args.f1 > 0:
        raise InputError("--f1 must be positive: f(1,...,1) must be nonzero")
    b = GrowthBound(args.C, parse_floats(args.r, args.k, "--r"))
    a = analysis.find_alpha(b, args.f1)
    emit_json({"alpha": list(a.alpha), "offset": a.offset, "product_upper": a.product_upper, "threshold": a.threshold},
              args.output)


def _region_checks(which, s, f, b, args, k):
    checks = {}
    for name in which or []:
        if name == "abs":
            checks["abs"] = analysis.in_region_abs_EZ(s)
        elif name in ("zfr", "zfr2"):
            alpha = _alpha(args, f, b, k)
            pred = analysis.in_region_zfr if name == "zfr" else analysis.in_region_zfr2
            checks[name] = {"alpha": list(alpha.alpha), "inside": pred(s, alpha)}
        elif name == "sprime":
            rep = series.s_prime_membership(s, args.sprime_T)
            checks["sprime"] = {"status": rep.status, "lower": rep.lower, "upper": rep.upper, "T": rep.T}
    return checks


def _passed(check) -> bool:
    if isinstance(check, bool):
        return check
    if "inside" in check:
        return check["inside"]
    return check["status"] != series.Membership.OUTSIDE


def cmd_eval(args):
    (f,) = load_sources(args, 1) if args.box or _has_file(args) else [_eval_builtin(args)]
    s = parse_point(args.s)
    if len(s) != f.k:
        raise ArityMismatch(f"point has {len(s)} coordinates, function has arity {f.k}")
    b = _growth_bound(args, f) if args.certify or args.C is not None or f.name else None
    checks = _region_checks(args.check_region, s, f, b, args, f.k)
    for name, check in checks.items():
        if not _passed(check):
            raise series.OutOfRegion(f"point fails the {name} region check")
    support = args.support or series.default_support(f)
    if args.certify:
        res = series.eval_certified(f, b, s, args.T, support)
    else:
        value = series.eval_truncated(f, s, Box.cube(f.k, args.T))
        res = series.EvalResult(value, float("nan"), args.T)
    out = res.to_json(s, checks)
    if not args.certify:
        out["tail_radius"] = None
    emit_json(out, args.output)


def _has_file(args):
    return any(kind == "file" for kind, _ in getattr(args, "sources", None) or [])


def _eval_builtin(args):
    # built-ins default to the evaluation cube rather than cube:8
    sources = getattr(args, "sources", None) or []
    if len(sources) != 1:
        raise InputError("eval takes exactly one input")
    if args.k is None:
        raise InputError("--k is required for built-in inputs")
    return core.builtin(sources[0][1], args.k, Box.cube(args.k, args.T))


def cmd_region(args):
    s = parse_point(args.s)
    k = len(s)
    f = None
    if getattr(args, "sources", None):
        (f,) = load_sources(args, 1)
    b = None
    if args.C is not None:
        b = GrowthBound(args.C, parse_floats(args.r or "0", k, "--r"))
        if f is None:
            f = core.identity(Box.cube(k, 1))
            if args.f1 is not None:
                f = core.scale(Fraction(args.f1), f)
    elif f is not None:
        b = _growth_bound(args, f)
    emit_json({"s": [[z.real, z.imag] for z in s], "region_checks": _region_checks(args.check, s, f, b, args, k)},
              args.output)


def cmd_verify(args):
    report = verify.run(args.suite, args.seed, args.fixtures or ())
    print(report.summary())
    failures = report.failures_csv()
    if args.failures_csv:
        Path(args.failures_csv).write_text(failures, encoding="utf-8")
    if not report.ok:
        sys.stdout.write(failures)
        return EXIT_FAIL
    return EXIT_OK


def cmd_export(args):
    (f,) = load_sources(args, 1)
    if args.format == "rmap":
        emit_json(ufd.encode_R(f).to_json(), args.output)
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"n{j}" for j in range(1, f.k + 1)] + ["value"])
    for n, v in f.items():
        w.writerow([*n, format_rational(v)])
    emit(buf.getvalue(), args.output)


# ------------------------------------------------------------------ parser


def _add_inputs(p, box=True):
    p.add_argument("--builtin", action=_AppendSource, metavar="NAME", choices=core.BUILTINS,
                   help="built-in indicator: " + ", ".join(core.BUILTINS))
    p.add_argument("--file", action=_AppendSource, metavar="PATH", help="function file (JSON)")
    p.add_argument("--k", type=int, help="arity for built-in inputs")
    if box:
        p.add_argument("--box", help="cube:T or product:T (default cube:8, or the first file's box)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdir", description="Multiple Dirichlet convolution toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, fn, text in (
        ("convolve", cmd_convolve, "Dirichlet product of two inputs"),
        ("add", cmd_add, "pointwise sum of two inputs"),
        ("invert", cmd_invert, "convolution inverse of a unit"),
        ("norm", cmd_norm, "smallest coordinate product on the support"),
        ("divide", cmd_divide, "solve f*h = g on the box (inputs: g then f)"),
        ("export", cmd_export, "write a function as a table or as R-map monomials"),
    ):
        p = sub.add_parser(name, help=text)
        _add_inputs(p)
        p.add_argument("-o", "--output")
        if name == "export":
            p.add_argument("--format", choices=("csv", "rmap"), default="csv")
        p.set_defaults(func=fn)

    p = sub.add_parser("alpha", help="exponents for the inverse growth bound")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--r", default="0", help="comma list or single value")
    p.add_argument("--f1", type=float, required=True, help="|f(1,...,1)|")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_alpha)

    region_choices = ("abs", "zfr", "zfr2", "sprime")
    p = sub.add_parser("eval", help="truncated or certified series value")
    _add_inputs(p)
    p.add_argument("--s", required=True, help='point as "re,im;re,im"')
    p.add_argument("--T", type=int, required=True, help="cube side of the truncation")
    p.add_argument("--certify", action="store_true")
    p.add_argument("--C", type=float)
    p.add_argument("--r")
    p.add_argument("--support", choices=series.SUPPORTS)
    p.add_argument("--alpha", help="exponents for zfr/zfr2 checks (default: find_alpha)")
    p.add_argument("--check-region", action="append", choices=region_choices)
    p.add_argument("--sprime-T", type=int, default=400)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("region", help="region predicates at a point")
    _add_inputs(p)
    p.add_argument("--s", required=True)
    p.add_argument("--check", action="append", choices=region_choices, required=True)
    p.add_argument("--alpha")
    p.add_argument("--C", type=float)
    p.add_argument("--r")
    p.add_argument("--f1", type=float)
    p.add_argument("--sprime-T", type=int, default=400)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("verify", help="run the seeded property suites")
    p.add_argument("--suite", choices=(*verify.SUITES, "all"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixtures", action="append", help="function file or directory of *.json to validate")
    p.add_argument("--failures-csv", help="write failure rows here")
    p.set_defaults(func=cmd_verify)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args) or EXIT_OK
    except InputError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INPUT)
    except DomainError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_DOMAIN)
    except OverflowError as exc:
        return _fail("OverflowError", str(exc), EXIT_DOMAIN)


if __name__ == "__main__":
    sys.exit(main())
