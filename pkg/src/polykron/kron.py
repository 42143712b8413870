"""Matrix-free Kronecker products, power liftings and unfoldings.

A vector ``v`` of length ``n**d`` represents the coefficients of a
homogeneous degree-``d`` polynomial ``v @ lift(x, d)``.  Flat storage is
column-major: the multi-index ``(i_1, ..., i_d)`` lives at position
``i_1 + n*i_2 + ... + n**(d-1)*i_d``, so the first axis of the logical
``d``-way array varies fastest and the rightmost factor of a Kronecker
product acts on that axis.  Under this convention

    (X kron Y) vec(R) = vec(Y @ R @ X.T)

and ``lift(x, d) = x kron x kron ... kron x`` (``d`` factors).

Operators of the form ``I kron ... kron X kron ... kron I`` are applied
by reshaping ``v`` into a three-way array and contracting the middle
axis with ``X``; the operator itself is never formed.  Dense assembly is
available separately for cross-checks at small sizes and refuses to
allocate past a configurable memory cap.
"""

import numpy as np

from .errors import SizeCapError

__all__ = [
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
]

DEFAULT_ASSEMBLY_CAP = 2 * 1024**3
"""Dense assembly refuses to allocate more than this many bytes."""


def _as_2d(X, name):
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got ndim={X.ndim}")
    return X


def _as_1d(v, name):
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a 1-D array, got ndim={v.ndim}")
    return v


def _nd_root(length, d, name="v"):
    """Return n such that n**d == length, or raise."""
    if d < 1:
        raise ValueError(f"order d must be >= 1, got {d}")
    n = max(1, round(length ** (1.0 / d)))
    for cand in (n - 1, n, n + 1):
        if cand >= 1 and cand**d == length:
            return cand
    raise ValueError(f"len({name})={length} is not a perfect {d}-th power")


def kron_vec_apply(X, Y, v):
    """Apply ``X kron Y`` to a vector without forming the product.

    Parameters
    ----------
    X : (p, q) array_like
    Y : (r, s) array_like
    v : (q*s,) array_like

    Returns
    -------
    (p*r,) ndarray
        ``(X kron Y) @ v``, computed as ``vec(Y @ R @ X.T)`` where
        ``R`` is the (s, q) column-major reshape of ``v``.
    """
    X = _as_2d(X, "X")
    Y = _as_2d(Y, "Y")
    v = _as_1d(v, "v")
    q, s = X.shape[1], Y.shape[1]
    if v.shape[0] != q * s:
        raise ValueError(f"len(v)={v.shape[0]} does not match q*s={q * s}")
    R = v.reshape(s, q, order="F")
    return (Y @ R @ X.T).ravel(order="F")


def kron_place_apply(X, position, d, v):
    """Apply ``I kron ... kron X kron ... kron I`` with ``X`` at one slot.

    The operator has ``d`` Kronecker factors; factor ``position``
    (1-based, counted from the left) is ``X`` with shape (p, n) and the
    others are ``n x n`` identities.  The input has length ``n**d`` and
    the output ``p * n**(d-1)``.

    Parameters
    ----------
    X : (p, n) array_like
    position : int
        Slot of ``X`` among the ``d`` factors, ``1 <= position <= d``.
        Position 1 is the leftmost factor, which acts on the slowest
        axis of the logical array.
    d : int
        Number of Kronecker factors, ``d >= 1``.
    v : (n**d,) array_like

    Returns
    -------
    (p * n**(d-1),) ndarray
    """
    X = _as_2d(X, "X")
    v = _as_1d(v, "v")
    p, n = X.shape
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not 1 <= position <= d:
        raise ValueError(f"position must be in 1..{d}, got {position}")
    if v.shape[0] != n**d:
        raise ValueError(f"len(v)={v.shape[0]} does not match n**d={n**d}")
    a = position - 1  # identity factors to the left
    b = d - position  # identity factors to the right
    if b == 0:
        # I kron X: X acts on the fastest axis
        return (X @ v.reshape(n, n**a, order="F")).ravel(order="F")
    if a == 0:
        # X kron I: one product with the trailing identity free
        return (v.reshape(n**b, n, order="F") @ X.T).ravel(order="F")
    T = v.reshape(n**b, n, n**a, order="F")
    R = np.tensordot(T, X, axes=([1], [1]))  # (n**b, n**a, p)
    return R.transpose(0, 2, 1).ravel(order="F")


def kron_sum_apply(X, d, v):
    """Apply the Kronecker sum of ``X`` over ``d`` slots.

    Computes ``sum_k (I kron ... kron X kron ... kron I) @ v`` with
    ``X`` occupying slot ``k`` for ``k = 1..d``.  ``X`` may be
    rectangular (p, n); every placed term then maps ``n**d`` to
    ``p * n**(d-1)`` and the terms are summed in slot order.
    """
    X = _as_2d(X, "X")
    out = kron_place_apply(X, 1, d, v)
    for position in range(2, d + 1):
        out += kron_place_apply(X, position, d, v)
    return out


def lift(x, d):
    """Return the ``d``-fold Kronecker power ``x kron ... kron x``.

    ``lift(x, 0)`` is the scalar 1 in a length-one array and
    ``lift(x, 1)`` is a copy of ``x``.
    """
    x = _as_1d(x, "x")
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    if d == 0:
        return np.ones(1, dtype=x.dtype if x.dtype.kind == "c" else float)
    out = np.array(x, copy=True)
    for _ in range(d - 1):
        out = np.kron(out, x)
    return out


def eval_value(coeffs, x):
    """Evaluate ``sum_d coeffs[d] @ lift(x, d)`` for a coefficient map.

    Parameters
    ----------
    coeffs : mapping of int to (n**d,) array_like
        Polynomial coefficients keyed by degree.
    x : (n,) array_like

    Returns
    -------
    float
    """
    x = _as_1d(x, "x")
    n = x.shape[0]
    total = 0.0
    z = None
    prev = 0
    for d in sorted(coeffs):
        c = _as_1d(coeffs[d], f"coeffs[{d}]")
        if c.shape[0] != n**d:
            raise ValueError(
                f"coeffs[{d}] has length {c.shape[0]}, expected {n**d}"
            )
        if z is None:
            z = lift(x, d)
        else:
            for _ in range(d - prev):
                z = np.kron(z, x)
        prev = d
        total += float(c @ z)
    return total


def eval_feedback(gains, x):
    """Evaluate ``sum_d gains[d] @ lift(x, d)`` for a gain map.

    ``gains[d]`` has shape (m, n**d); the result is the length-``m``
    control vector.
    """
    x = _as_1d(x, "x")
    n = x.shape[0]
    if not gains:
        raise ValueError("gains mapping is empty")
    m = _as_2d(gains[min(gains)], "gains").shape[0]
    u = np.zeros(m)
    z = None
    prev = 0
    for d in sorted(gains):
        K = _as_2d(gains[d], f"gains[{d}]")
        if K.shape != (m, n**d):
            raise ValueError(
                f"gains[{d}] has shape {K.shape}, expected {(m, n**d)}"
            )
        if z is None:
            z = lift(x, d)
        else:
            for _ in range(d - prev):
                z = np.kron(z, x)
        prev = d
        u += K @ z
    return u


def unfold_sum(v, d):
    """Sum of the ``d`` axis unfoldings of an order-``d`` coefficient vector.

    Returns the (n, n**(d-1)) matrix ``S`` with

        gradient of (v @ lift(x, d)) at x  ==  S @ lift(x, d - 1)

    obtained by summing, over each axis of the logical array, the
    matricization that puts that axis on the rows and keeps the
    remaining axes in their original order on the columns.  For
    ``d = 2`` and ``v = vec(V)`` this is ``V + V.T``.
    """
    v = _as_1d(v, "v")
    n = _nd_root(v.shape[0], d)
    if d == 1:
        return v.reshape(n, 1).copy()
    T = v.reshape((n,) * d, order="F")
    S = np.zeros((n, n ** (d - 1)), dtype=v.dtype)
    for axis in range(d):
        S += np.moveaxis(T, axis, 0).reshape(n, -1, order="F")
    return S


def symmetrize(v, d):
    """Project an order-``d`` coefficient vector onto its symmetric part.

    Every entry is replaced by the mean over its multi-index
    equivalence class (all entries whose multi-indices sort to the same
    tuple).  The classes are found by digit-sorting the multi-indices,
    so no factorial enumeration of permutations takes place and
    duplicate-digit indices are handled exactly.  The represented
    polynomial is unchanged.
    """
    v = _as_1d(v, "v")
    if np.iscomplexobj(v):
        raise ValueError("symmetrize expects a real coefficient vector")
    n = _nd_root(v.shape[0], d)
    if d == 1 or n == 1:
        return np.array(v, dtype=float, copy=True)
    idx = np.arange(n**d, dtype=np.int64)
    digits = np.empty((n**d, d), dtype=np.int32)
    for k in range(d):
        digits[:, k] = (idx // n**k) % n
    digits.sort(axis=1)
    key = np.zeros(n**d, dtype=np.int64)
    for k in range(d):
        key += digits[:, k].astype(np.int64) * n**k
    _, inverse = np.unique(key, return_inverse=True)
    sums = np.bincount(inverse, weights=v.astype(float))
    counts = np.bincount(inverse)
    return (sums / counts)[inverse]


def _predict_bytes(rows, cols):
    return int(rows) * int(cols) * np.dtype(float).itemsize


def _check_cap(rows, cols, cap, what):
    cap = DEFAULT_ASSEMBLY_CAP if cap is None else int(cap)
    need = _predict_bytes(rows, cols)
    if need > cap:
        raise SizeCapError(
            f"assembling {what} needs {need} bytes "
            f"({rows} x {cols} dense), above the cap of {cap} bytes"
        )


def kron_assemble(factors, cap=None):
    """Assemble an explicit Kronecker product of matrices.

    Refuses with :class:`SizeCapError` if the dense result would exceed
    ``cap`` bytes (default :data:`DEFAULT_ASSEMBLY_CAP`).  Intended for
    cross-checks against the matrix-free routines at small sizes.
    """
    mats = [_as_2d(F, f"factors[{i}]") for i, F in enumerate(factors)]
    if not mats:
        raise ValueError("factors must be a non-empty sequence")
    rows = int(np.prod([M.shape[0] for M in mats]))
    cols = int(np.prod([M.shape[1] for M in mats]))
    _check_cap(rows, cols, cap, "a Kronecker product")
    out = np.array(mats[0], dtype=float, copy=True)
    for M in mats[1:]:
        out = np.kron(out, M)
    return out


def kron_sum_assemble(X, d, cap=None):
    """Assemble the dense Kronecker sum of ``X`` over ``d`` slots.

    Returns ``sum_k I kron ... kron X kron ... kron I`` as an explicit
    ``(p * n**(d-1), n**d)`` matrix, subject to the same memory cap as
    :func:`kron_assemble`.
    """
    X = _as_2d(X, "X")
    p, n = X.shape
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    _check_cap(p * n ** (d - 1), n**d, cap, f"a Kronecker sum of order {d}")
    Xf = np.asarray(X, dtype=float)
    out = np.zeros((p * n ** (d - 1), n**d))
    for position in range(1, d + 1):
        a = position - 1
        b = d - position
        term = np.kron(np.kron(np.eye(n**a), Xf), np.eye(n**b))
        out += term
    return out
