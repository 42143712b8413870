"""Exception types shared across the package.

Contract violations (bad shapes, bad argument ranges) raise plain
``ValueError`` at the call site; the classes here mark failures that
callers may want to catch and handle individually, such as refusing a
dense assembly that would not fit in memory.
"""


class PolykronError(Exception):
    """Base class for package-specific failures."""


class NumericalError(PolykronError, RuntimeError):
    """A computation ran but did not reach the required accuracy."""


class ResonanceError(NumericalError):
    """A Kronecker-sum system is singular or nearly so.

    Raised when some sum of diagonal Schur entries plus the shift falls
    below the pivot tolerance, which happens exactly when eigenvalue
    combinations of the factor matrix cancel the shift.
    """


class UnstabilizableError(NumericalError):
    """The Riccati equation admits no stabilizing solution."""


class SizeCapError(PolykronError, MemoryError):
    """A dense assembly was refused because it would exceed the memory cap."""


class FormatError(PolykronError, ValueError):
    """A file could not be parsed or failed field validation."""
