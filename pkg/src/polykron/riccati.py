"""Stabilizing solutions of the continuous algebraic Riccati equation.

Solves

    A.T V + V A - V B inv(R) B.T V + Q = 0

for the symmetric stabilizing ``V`` by the ordered-Schur method: stack
the Hamiltonian matrix ``[[A, -B inv(R) B.T], [-Q, -A.T]]``, reorder its
real Schur form so the stable eigenvalues lead, and read ``V`` off the
graph of the stable invariant subspace.  One Newton step (a Lyapunov
solve with the closed-loop matrix, performed through the order-2
Kronecker-sum solver) polishes the residual when it is above roundoff.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError, UnstabilizableError
from .solvers import solve_kron_sum

__all__ = ["RiccatiSolution", "solve_are", "stability_margin"]

_RESIDUAL_LIMIT = 1e-8
_POLISH_TRIGGER = 1e-13


@dataclass(frozen=True)
class RiccatiSolution:
    """Stabilizing Riccati solution with its gain and closed-loop matrix."""

    V2: np.ndarray
    """Symmetric stabilizing solution, shape (n, n)."""

    K1: np.ndarray
    """Linear feedback gain ``-inv(R) B.T V2``, shape (m, n)."""

    Ac: np.ndarray
    """Closed-loop matrix ``A + B K1``, shape (n, n)."""

    residual: float
    """Relative Riccati residual, Frobenius norms, scaled by ``|Q|``."""


def stability_margin(M):
    """Largest real part among the eigenvalues of a square matrix."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"M must be square, got shape {M.shape}")
    try:
        return float(np.max(np.linalg.eigvals(M).real))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc


def _check_symmetric(M, name, rtol=1e-10):
    scale = max(float(np.linalg.norm(M)), 1.0)
    if float(np.linalg.norm(M - M.T)) > rtol * scale:
        raise ValueError(f"{name} must be symmetric")


def _riccati_residual(A, G, Q2, V):
    R = A.T @ V + V @ A - V @ G @ V + Q2
    return float(np.linalg.norm(R)) / max(float(np.linalg.norm(Q2)), 1e-300)


def solve_are(A, B, Q2, R2):
    """Stabilizing solution of the continuous algebraic Riccati equation.

    Parameters
    ----------
    A : (n, n) array_like
    B : (n, m) array_like
    Q2 : (n, n) array_like
        Symmetric positive semidefinite state weight.
    R2 : (m, m) array_like
        Symmetric positive definite control weight.

    Returns
    -------
    RiccatiSolution
        ``V2`` symmetric with relative residual at most 1e-8 and
        ``Ac = A + B K1`` strictly stable.

    Raises
    ------
    UnstabilizableError
        If the Hamiltonian has the wrong stable inertia, the invariant
        subspace is not a graph, or the closed loop is not stable.
    NumericalError
        If the residual stays above 1e-8 after polishing.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    n = A.shape[0]
    if B.ndim != 2 or B.shape[0] != n:
        raise ValueError(f"B must have shape ({n}, m), got {B.shape}")
    m = B.shape[1]
    if Q2.shape != (n, n):
        raise ValueError(f"Q2 must have shape ({n}, {n}), got {Q2.shape}")
    if R2.shape != (m, m):
        raise ValueError(f"R2 must have shape ({m}, {m}), got {R2.shape}")
    for M, name in ((A, "A"), (B, "B"), (Q2, "Q2"), (R2, "R2")):
        if not np.isfinite(M).all():
            raise ValueError(f"{name} contains non-finite entries")
    _check_symmetric(Q2, "Q2")
    _check_symmetric(R2, "R2")
    try:
        r_fac = scipy.linalg.cho_factor(R2)
    except np.linalg.LinAlgError as exc:
        raise ValueError("R2 must be positive definite") from exc

    G = B @ scipy.linalg.cho_solve(r_fac, B.T)
    H = np.block([[A, -G], [-Q2, -A.T]])
    try:
        _, Z, sdim = scipy.linalg.schur(H, output="real", sort="lhp")
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Schur decomposition failed: {exc}") from exc
    if sdim != n:
        raise UnstabilizableError(
            f"Hamiltonian has {sdim} stable eigenvalues, expected {n}; "
            f"the pair is not stabilizable and detectable"
        )
    U11 = Z[:n, :n]
    U21 = Z[n:, :n]
    if np.linalg.cond(U11) > 1e13:
        raise UnstabilizableError(
            "stable invariant subspace is not a graph over the state space"
        )
    V2 = scipy.linalg.solve(U11.T, U21.T).T
    V2 = 0.5 * (V2 + V2.T)

    def close_loop(V):
        K = -scipy.linalg.cho_solve(r_fac, B.T @ V)
        return K, A + B @ K

    K1, Ac = close_loop(V2)
    residual = _riccati_residual(A, G, Q2, V2)
    if residual > _POLISH_TRIGGER:
        # one Newton step: Ac.T X + X Ac = -(Q2 + K1.T R2 K1)
        W = Q2 + K1.T @ R2 @ K1
        try:
            x, _ = solve_kron_sum(Ac.T, 2, -W.ravel(order="F"))
            Vp = x.reshape(n, n, order="F")
            Vp = 0.5 * (Vp + Vp.T)
            Kp, Acp = close_loop(Vp)
            rp = _riccati_residual(A, G, Q2, Vp)
        except NumericalError:
            rp = np.inf
        if rp < residual:
            V2, K1, Ac, residual = Vp, Kp, Acp, rp
    if residual > _RESIDUAL_LIMIT:
        raise NumericalError(
            f"Riccati residual {residual:.3e} above {_RESIDUAL_LIMIT:.0e} "
            f"after polishing"
        )
    if stability_margin(Ac) >= 0:
        raise UnstabilizableError("closed-loop matrix is not strictly stable")
    return RiccatiSolution(V2=V2, K1=K1, Ac=Ac, residual=residual)
