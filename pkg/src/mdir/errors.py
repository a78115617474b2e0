"""Exception hierarchy shared by every module.

Input problems (malformed files, bad arguments) derive from ``InputError``;
mathematical precondition failures derive from ``DomainError``.  The CLI maps
the two families to exit codes 2 and 3.
"""


class MdirError(Exception):
    """Base class for all library errors."""


class InputError(MdirError, ValueError):
    """Malformed input: bad file, bad index, arity mismatch."""


class FunctionFormatError(InputError):
    """A function file violates the on-disk format."""


class ArityMismatch(InputError):
    pass


class DomainError(MdirError, ArithmeticError):
    """A mathematical precondition does not hold."""


class NotAUnit(DomainError):
    """The function vanishes at (1, ..., 1) and has no inverse."""


class OutOfRegion(DomainError):
    """A point lies outside the region where a bound or series is valid."""


class PoleGuard(DomainError):
    """A zeta argument is too close to the pole at 1."""


class Unsatisfiable(DomainError):
    """No exponent on the search grid satisfies the zeta-product condition."""


class GrowthBoundViolated(DomainError):
    """A supplied growth bound fails on the materialized box."""
