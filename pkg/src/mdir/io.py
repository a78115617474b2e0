"""JSON file formats.

Function file::

    {"k": 2, "box": {"mode": "product", "T": 30},
     "values": [{"n": [1, 1], "v": "1/1"}, ...]}

Rationals are written as ``"p/q"`` strings; omitted entries are zero.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from .core import ArithFunction, Box
from .errors import FunctionFormatError, InputError

_RATIONAL = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def format_rational(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def parse_rational(text) -> Fraction:
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str) or not _RATIONAL.match(text):
        raise FunctionFormatError(f"value {text!r} is not a 'p/q' rational string")
    try:
        return Fraction(text.replace(" ", ""))
    except ZeroDivisionError as exc:
        raise FunctionFormatError(f"zero denominator in {text!r}") from exc


def function_to_json(f: ArithFunction) -> dict:
    return {
        "k": f.k,
        "box": f.box.to_json(),
        "values": [{"n": list(n), "v": format_rational(v)} for n, v in f.items()],
    }


def function_from_json(data) -> ArithFunction:
    if not isinstance(data, dict):
        raise FunctionFormatError("function file must hold a JSON object")
    try:
        k = data["k"]
        box_data = data["box"]
        entries = data["values"]
    except KeyError as exc:
        raise FunctionFormatError(f"missing key {exc.args[0]!r}") from exc
    if not isinstance(k, int) or k < 1:
        raise FunctionFormatError(f"bad arity {k!r}")
    if not isinstance(box_data, dict) or not isinstance(box_data.get("T"), int):
        raise FunctionFormatError("box must be {'mode': 'cube'|'product', 'T': int}")
    try:
        box = Box(k, box_data["T"], box_data.get("mode", "cube"))
    except InputError as exc:
        raise FunctionFormatError(str(exc)) from exc
    if not isinstance(entries, list):
        raise FunctionFormatError("values must be a list")
    values = {}
    for entry in entries:
        if not isinstance(entry, dict) or "n" not in entry or "v" not in entry:
            raise FunctionFormatError(f"bad entry {entry!r}")
        n = entry["n"]
        if not isinstance(n, list) or len(n) != k or not all(
            isinstance(x, int) and not isinstance(x, bool) and x >= 1 for x in n
        ):
            raise FunctionFormatError(f"bad index {n!r} for arity {k}")
        n = tuple(n)
        if n in values:
            raise FunctionFormatError(f"duplicate index {list(n)}")
        if n not in box:
            raise FunctionFormatError(f"index {list(n)} lies outside box {box}")
        values[n] = parse_rational(entry["v"])
    return ArithFunction(box, values)


def dumps_function(f: ArithFunction) -> str:
    return json.dumps(function_to_json(f), separators=(",", ":")) + "\n"


def write_function(f: ArithFunction, path) -> None:
    Path(path).write_text(dumps_function(f), encoding="utf-8")


def read_function(path) -> ArithFunction:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FunctionFormatError(f"{path}: invalid JSON ({exc.msg})") from exc
    return function_from_json(data)
