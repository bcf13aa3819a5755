"""Cyclic Jacobi eigensolver for small real symmetric matrices."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

SYMMETRY_TOL = 1e-12
OFF_DIAGONAL_TOL = 1e-14
MAX_SWEEPS = 50


def jacobi_eigh(A, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues ``w`` in descending order and the
    matching orthonormal eigenvectors as the columns of ``V``. Ties keep the
    original axis order, so a diagonal input returns unit axis vectors.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise InvalidInputError("matrix must be square")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix contains non-finite entries")
    if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_TOL:
        raise InvalidInputError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    threshold = tol * max(1.0, float(np.linalg.norm(A)))
    # plain floats: for n <= 4 this beats numpy by an order of magnitude
    a = A.tolist()
    v = np.eye(n).tolist()
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    for _ in range(max_sweeps):
        off = 2.0 * sum(a[p][q] * a[p][q] for p, q in pairs)
        if off ** 0.5 < threshold:
            break
        for p, q in pairs:
            apq = a[p][q]
            if apq == 0.0:
                continue
            # Rutishauser's stable form of the rotation angle
            theta = (a[q][q] - a[p][p]) / (2.0 * apq)
            t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + (theta * theta + 1.0) ** 0.5)
            c = 1.0 / (t * t + 1.0) ** 0.5
            s = t * c
            tau = s / (1.0 + c)
            a[p][p] -= t * apq
            a[q][q] += t * apq
            a[p][q] = a[q][p] = 0.0
            for k in range(n):
                if k != p and k != q:
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = a[p][k] = akp - s * (akq + tau * akp)
                    a[k][q] = a[q][k] = akq + s * (akp - tau * akq)
                vk = v[k]
                vkp, vkq = vk[p], vk[q]
                vk[p] = vkp - s * (vkq + tau * vkp)
                vk[q] = vkq + s * (vkp - tau * vkq)
    A = np.array(a)
    V = np.array(v)
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def sym_eigen4(Q):
    """:func:`jacobi_eigh` restricted to 4x4 input."""
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (4, 4):
        raise InvalidInputError(f"expected a 4x4 matrix, got {Q.shape}")
    return jacobi_eigh(Q)
