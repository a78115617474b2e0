import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mdir.core import ArithFunction, Box, builtin, invert
from mdir.errors import FunctionFormatError, InputError
from mdir.io import dumps_function, format_rational, function_from_json, parse_rational, read_function, write_function


def test_rational_format():
    assert format_rational(Fraction(-1)) == "-1/1"
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert parse_rational("-7/3") == Fraction(-7, 3)
    assert parse_rational("5") == 5


@pytest.mark.parametrize("bad", ["1.5", "x", "1/0", None, "1//2"])
def test_parse_rational_rejects(bad):
    with pytest.raises(FunctionFormatError):
        parse_rational(bad)


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(1, 6), st.integers(1, 6)), st.fractions(max_denominator=1000)))
def test_round_trip_exact(vals):
    f = ArithFunction(Box.cube(2, 6), vals)
    text = dumps_function(f)
    assert function_from_json(json.loads(text)) == f
    assert dumps_function(function_from_json(json.loads(text))) == text


def test_file_round_trip(tmp_path):
    f = invert(builtin("u_star", 2, Box.product(2, 30)))
    write_function(f, tmp_path / "inv.json")
    assert read_function(tmp_path / "inv.json") == f


@pytest.mark.parametrize(
    "doc",
    [
        [],
        {"k": 2, "box": {"mode": "cube", "T": 3}},
        {"k": 0, "box": {"mode": "cube", "T": 3}, "values": []},
        {"k": 2, "box": {"mode": "ball", "T": 3}, "values": []},
        {"k": 2, "box": {"mode": "cube", "T": 3}, "values": [{"n": [1], "v": "1/1"}]},
        {"k": 2, "box": {"mode": "cube", "T": 3}, "values": [{"n": [0, 1], "v": "1/1"}]},
        {"k": 2, "box": {"mode": "cube", "T": 3}, "values": [{"n": [4, 1], "v": "1/1"}]},
        {"k": 2, "box": {"mode": "cube", "T": 3}, "values": [{"n": [1, 1], "v": "1/1"}, {"n": [1, 1], "v": "2/1"}]},
    ],
)
def test_malformed_documents(doc):
    with pytest.raises(FunctionFormatError):
        function_from_json(doc)


def test_read_errors(tmp_path):
    with pytest.raises(InputError):
        read_function(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(FunctionFormatError):
        read_function(tmp_path / "bad.json")
