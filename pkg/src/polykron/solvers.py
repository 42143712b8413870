"""Linear solvers for shifted Kronecker-sum systems.

The systems have the form

    (L_d(A) + shift * I) v = c,      L_d(A) = sum_k I kron .. A .. kron I,

with a single square factor ``A`` repeated over ``d`` slots.  A complex
Schur decomposition ``A = U T U^H`` turns the operator into a triangular
Kronecker sum, because every placement conjugates with the same
``U kron ... kron U``.  The triangular system is solved by recursive
blocking over the slowest axis: slice ``i`` couples only to slices
``j > i`` through ``T[i, j]``, so sweeping ``i`` from the last slice to
the first reduces the problem to order ``d - 1`` with the shift
increased by ``T[i, i]``.  The base case is a shifted triangular
back-substitution.  Work per solve is O(d * n**(d+1)) flops and the
operator is never assembled.

Eigenvalues of ``L_d(A)`` are the d-fold sums of eigenvalues of ``A``;
the pivots encountered in the base case are exactly those sums plus the
shift, so near-singularity is detected directly on the pivots.

:func:`solve_full` assembles the operator densely and factors it with
LU; it exists as an independent cross-check for small sizes.
"""

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import get_lapack_funcs

from .errors import NumericalError, ResonanceError
from .kron import kron_sum_apply, kron_sum_assemble

__all__ = [
    "PIVOT_RTOL",
    "SchurForm",
    "SolveReport",
    "schur_decompose",
    "solve_kron_sum",
    "solve_full",
]

PIVOT_RTOL = 1e-14
"""Pivots below ``PIVOT_RTOL * norm(A)`` trigger a resonance error."""

_CACHE_MAX = 8
_schur_cache: "OrderedDict[tuple, SchurForm]" = OrderedDict()


@dataclass(frozen=True)
class SchurForm:
    """Complex Schur decomposition ``A = U T U^H`` of a square matrix."""

    transform: np.ndarray
    """Unitary factor ``U``."""

    triangular: np.ndarray
    """Upper triangular factor ``T``."""

    norm: float
    """Frobenius norm of the decomposed matrix, used for pivot scaling."""


@dataclass(frozen=True)
class SolveReport:
    """Diagnostics attached to a Kronecker-sum solve."""

    residual_norm: float
    """Relative residual ``|(L_d(A)+shift)v - c| / |c|``."""

    min_pivot: float
    """Smallest pivot magnitude met during back-substitution."""

    recursion_depth: int
    """Order ``d`` of the solved system."""


def _validate_square(A, name="A"):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} contains non-finite entries")
    return A


def schur_decompose(A):
    """Complex Schur form of ``A``, cached per matrix content.

    Repeated calls with an identical matrix return the same
    :class:`SchurForm` instance, so one factorization serves every
    degree of a synthesis run.
    """
    A = _validate_square(A)
    key = (A.shape[0], A.dtype.str, A.tobytes())
    form = _schur_cache.get(key)
    if form is not None:
        _schur_cache.move_to_end(key)
        return form
    T, U = scipy.linalg.schur(A, output="complex")
    form = SchurForm(transform=U, triangular=T, norm=float(np.linalg.norm(A)))
    _schur_cache[key] = form
    while len(_schur_cache) > _CACHE_MAX:
        _schur_cache.popitem(last=False)
    return form


def _apply_all_modes(M, v, d):
    """Apply ``M kron ... kron M`` (``d`` square factors) to a flat vector.

    One GEMM per axis: multiply the fastest axis, then rotate it to the
    slowest position, so ``d`` rounds touch every axis once.
    """
    n = M.shape[1]
    for _ in range(d):
        v = (M @ v.reshape(n, -1, order="F")).ravel(order="C")
    return v


class _TriangularKronSolver:
    """Back-substitution for ``(L_d(T) + shift) w = b`` with T upper triangular."""

    def __init__(self, T, tol):
        self.T = T
        self.n = T.shape[0]
        self.diag = T.diagonal().copy()
        self.tol = tol
        self.min_pivot = np.inf
        # base case rewrites only the diagonal of this scratch copy
        self.scratch = T.copy()
        self.trtrs = get_lapack_funcs(("trtrs",), (T,))[0]

    def solve(self, b, w, d, shift):
        if d == 1:
            pivots = self.diag + shift
            smallest = float(np.abs(pivots).min())
            if smallest <= self.tol:
                raise ResonanceError(
                    f"pivot magnitude {smallest:.3e} at or below tolerance "
                    f"{self.tol:.3e}: an eigenvalue combination of the "
                    f"factor cancels the shift"
                )
            if smallest < self.min_pivot:
                self.min_pivot = smallest
            S = self.scratch
            S.flat[:: self.n + 1] = pivots
            x, info = self.trtrs(S, b)
            if info != 0:
                raise NumericalError(f"triangular solve failed (info={info})")
            w[:] = x
            return
        n = self.n
        nblock = n ** (d - 1)
        B = b.reshape(nblock, n, order="F")
        W = w.reshape(nblock, n, order="F")
        T = self.T
        for i in range(n - 1, -1, -1):
            if i == n - 1:
                rhs = B[:, i]
            else:
                rhs = B[:, i] - W[:, i + 1 :] @ T[i, i + 1 :]
            self.solve(rhs, W[:, i], d - 1, shift + T[i, i])


def solve_kron_sum(A, d, c, shift=0.0, schur=None):
    """Solve ``(L_d(A) + shift * I) v = c`` matrix-free.

    Parameters
    ----------
    A : (n, n) array_like
        Square factor repeated over the ``d`` slots.
    d : int
        Kronecker order, ``d >= 1``.
    c : (n**d,) array_like
        Right-hand side.
    shift : complex, optional
        Scalar added to the diagonal.
    schur : SchurForm, optional
        Reuse a precomputed decomposition of ``A``.

    Returns
    -------
    v : (n**d,) ndarray
        Solution; real when all inputs are real.
    report : SolveReport

    Raises
    ------
    ResonanceError
        If some d-fold eigenvalue sum of ``A`` plus ``shift`` is within
        ``PIVOT_RTOL * norm(A)`` of zero.
    """
    A = _validate_square(A)
    c = np.asarray(c)
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    n = A.shape[0]
    if c.ndim != 1 or c.shape[0] != n**d:
        raise ValueError(f"c must have length n**d={n**d}, got shape {c.shape}")
    if not np.isfinite(c).all():
        raise ValueError("c contains non-finite entries")
    shift = complex(shift)
    real_problem = (
        not np.iscomplexobj(A) and not np.iscomplexobj(c) and shift.imag == 0.0
    )
    if schur is None:
        schur = schur_decompose(A)
    elif schur.triangular.shape[0] != n:
        raise ValueError("schur form does not match the factor dimension")
    U = schur.transform
    T = schur.triangular

    b = _apply_all_modes(U.conj().T, c.astype(complex), d)
    w = np.empty(n**d, dtype=complex)
    tri = _TriangularKronSolver(T, PIVOT_RTOL * schur.norm)
    tri.solve(b, w, d, shift)
    v = _apply_all_modes(U, w, d)

    if real_problem:
        vnorm = float(np.linalg.norm(v))
        imag_norm = float(np.linalg.norm(v.imag))
        if vnorm > 0 and imag_norm > 1e-11 * vnorm:
            raise NumericalError(
                f"imaginary residue {imag_norm:.3e} on a real problem "
                f"(solution norm {vnorm:.3e})"
            )
        v = np.ascontiguousarray(v.real)

    r = kron_sum_apply(A, d, v)
    if shift != 0:
        r = r + (shift if not real_problem else shift.real) * v
    r -= c
    cnorm = float(np.linalg.norm(c))
    rnorm = float(np.linalg.norm(r))
    residual = rnorm / cnorm if cnorm > 0 else (0.0 if rnorm == 0 else np.inf)
    report = SolveReport(
        residual_norm=residual,
        min_pivot=float(tri.min_pivot),
        recursion_depth=d,
    )
    return v, report


def solve_full(A, d, c, cap=None):
    """Solve ``L_d(A) v = c`` by dense assembly and LU factorization.

    Independent cross-check for :func:`solve_kron_sum`; refuses with
    :class:`~polykron.errors.SizeCapError` when the assembled operator
    would exceed the memory cap.
    """
    A = _validate_square(A)
    c = np.asarray(c, dtype=float)
    n = A.shape[0]
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if c.ndim != 1 or c.shape[0] != n**d:
        raise ValueError(f"c must have length n**d={n**d}, got shape {c.shape}")
    M = kron_sum_assemble(A, d, cap=cap)
    try:
        v = scipy.linalg.solve(M, c, overwrite_a=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"dense Kronecker-sum solve failed: {exc}") from exc
    if not np.isfinite(v).all():
        raise NumericalError("dense Kronecker-sum matrix is singular")
    return v
