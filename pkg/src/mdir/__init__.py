"""Exact multiple Dirichlet convolution with certified series evaluation."""

from .analysis import AlphaVector, Enclosure, GrowthBound, find_alpha, zeta_enclosure
from .core import ArithFunction, Box, add, builtin, convolve, identity, invert, is_unit
from .errors import DomainError, InputError, MdirError, NotAUnit, OutOfRegion
from .series import EvalResult, eval_certified, eval_truncated, reciprocal_check

__version__ = "0.1.0"

__all__ = [
    "AlphaVector",
    "ArithFunction",
    "Box",
    "DomainError",
    "Enclosure",
    "EvalResult",
    "GrowthBound",
    "InputError",
    "MdirError",
    "NotAUnit",
    "OutOfRegion",
    "add",
    "builtin",
    "convolve",
    "eval_certified",
    "eval_truncated",
    "find_alpha",
    "identity",
    "invert",
    "is_unit",
    "reciprocal_check",
    "zeta_enclosure",
]
