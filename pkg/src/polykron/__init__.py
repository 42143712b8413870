"""Polynomial feedback laws for quadratic control systems.

The package synthesizes polynomial approximations of the optimal value
function and feedback law for systems with quadratic drift nonlinearity
and quadratic running cost, degree by degree.  Each degree requires one
linear solve with a Kronecker-sum operator, handled matrix-free by a
recursive blocked triangular solver so that the operator is never
assembled.
"""

from .errors import (
    FormatError,
    NumericalError,
    PolykronError,
    ResonanceError,
    SizeCapError,
    UnstabilizableError,
)
from .kron import (
    DEFAULT_ASSEMBLY_CAP,
    eval_feedback,
    eval_value,
    kron_assemble,
    kron_place_apply,
    kron_sum_apply,
    kron_sum_assemble,
    kron_vec_apply,
    lift,
    symmetrize,
    unfold_sum,
)

__version__ = "0.1.0"

__all__ = [
    "PolykronError",
    "NumericalError",
    "ResonanceError",
    "UnstabilizableError",
    "SizeCapError",
    "FormatError",
    "DEFAULT_ASSEMBLY_CAP",
    "kron_vec_apply",
    "kron_place_apply",
    "kron_sum_apply",
    "lift",
    "eval_value",
    "eval_feedback",
    "unfold_sum",
    "symmetrize",
    "kron_assemble",
    "kron_sum_assemble",
    "__version__",
]
