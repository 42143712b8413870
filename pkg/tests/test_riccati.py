"""Riccati solver against closed forms and the scipy reference solver."""

import numpy as np
import pytest
import scipy.linalg

from polykron import NumericalError, UnstabilizableError
from polykron.riccati import solve_are, stability_margin


def riccati_residual(A, B, Q, R, V):
    G = B @ np.linalg.solve(R, B.T)
    return np.linalg.norm(A.T @ V + V @ A - V @ G @ V + Q) / np.linalg.norm(Q)


def test_scalar_closed_form():
    # x' = -x + u, unit weights: V = sqrt(2) - 1, Ac = -sqrt(2)
    sol = solve_are([[-1.0]], [[1.0]], [[1.0]], [[1.0]])
    assert np.isclose(sol.V2[0, 0], np.sqrt(2) - 1, rtol=1e-12)
    assert np.isclose(sol.K1[0, 0], -(np.sqrt(2) - 1), rtol=1e-12)
    assert np.isclose(sol.Ac[0, 0], -np.sqrt(2), rtol=1e-12)


def test_double_integrator_identity_case():
    # A = 0, B = Q = R = I: equation reduces to V @ V = I, V = I
    n = 2
    sol = solve_are(np.zeros((n, n)), np.eye(n), np.eye(n), np.eye(n))
    assert np.allclose(sol.V2, np.eye(n), rtol=0, atol=1e-12)
    assert np.allclose(sol.K1, -np.eye(n), rtol=0, atol=1e-12)
    assert np.allclose(sol.Ac, -np.eye(n), rtol=0, atol=1e-12)


@pytest.mark.parametrize("n,m,seed", [(4, 1, 0), (8, 2, 1), (20, 1, 2), (40, 1, 3)])
def test_matches_scipy_reference(n, m, seed):
    rng = np.random.default_rng(seed)
    A = rng.random((n, n))
    B = rng.random((n, m))
    Q = np.eye(n)
    R = np.eye(m)
    sol = solve_are(A, B, Q, R)
    ref = scipy.linalg.solve_continuous_are(A, B, Q, R)
    assert np.allclose(sol.V2, ref, rtol=1e-8, atol=1e-8)
    assert sol.residual <= 1e-10
    assert riccati_residual(A, B, Q, R, sol.V2) <= 1e-10
    assert stability_margin(sol.Ac) < 0
    # V2 symmetric positive semidefinite
    assert np.allclose(sol.V2, sol.V2.T)
    assert np.min(np.linalg.eigvalsh(sol.V2)) >= -1e-10 * np.linalg.norm(sol.V2)


def test_gain_consistent_with_v2():
    rng = np.random.default_rng(5)
    n, m = 6, 2
    A = rng.random((n, n))
    B = rng.random((n, m))
    R = np.diag([1.0, 2.0])
    sol = solve_are(A, B, np.eye(n), R)
    assert np.allclose(sol.K1, -np.linalg.solve(R, B.T @ sol.V2), rtol=1e-12)
    assert np.allclose(sol.Ac, A + B @ sol.K1, rtol=1e-12)


def test_scaling_covariance():
    # Q -> a Q, R -> a R leaves the gain unchanged and scales V by a
    rng = np.random.default_rng(7)
    n = 5
    A = rng.random((n, n))
    B = rng.random((n, 1))
    a = 3.7
    sol1 = solve_are(A, B, np.eye(n), np.eye(1))
    sol2 = solve_are(A, B, a * np.eye(n), a * np.eye(1))
    assert np.allclose(sol2.V2, a * sol1.V2, rtol=1e-9)
    assert np.allclose(sol2.K1, sol1.K1, rtol=1e-9, atol=1e-11)


def test_unstabilizable_pair_raises():
    A = np.diag([1.0, 2.0])
    B = np.array([[1.0], [0.0]])  # unstable second mode is untouched
    with pytest.raises(UnstabilizableError):
        solve_are(A, B, np.eye(2), np.eye(1))


def test_contract_violations():
    with pytest.raises(ValueError):
        solve_are(np.zeros((2, 3)), np.zeros((2, 1)), np.eye(2), np.eye(1))
    with pytest.raises(ValueError):
        solve_are(np.zeros((2, 2)), np.zeros((3, 1)), np.eye(2), np.eye(1))
    with pytest.raises(ValueError):
        # R2 not positive definite
        solve_are(-np.eye(2), np.eye(2), np.eye(2), -np.eye(2))
    with pytest.raises(ValueError):
        # Q2 not symmetric
        solve_are(-np.eye(2), np.eye(2), np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2))


def test_stability_margin_values():
    assert np.isclose(stability_margin(np.diag([-3.0, -1.0])), -1.0)
    M = np.array([[0.0, 4.0], [-4.0, 0.0]])  # eigenvalues +-4i
    assert np.isclose(stability_margin(M), 0.0, atol=1e-12)
    with pytest.raises(ValueError):
        stability_margin(np.zeros((2, 3)))


def test_determinism():
    rng = np.random.default_rng(11)
    A = rng.random((6, 6))
    B = rng.random((6, 1))
    s1 = solve_are(A, B, np.eye(6), np.eye(1))
    s2 = solve_are(A.copy(), B.copy(), np.eye(6), np.eye(1))
    assert np.array_equal(s1.V2, s2.V2)
    assert np.array_equal(s1.K1, s2.K1)
