"""Vectorized quasi-inverse over stacks of channels.

Parameter sweeps evaluate thousands of channels from one family. Doing that
one channel at a time is dominated by Python call overhead, so this module
runs the same pipeline (Q from Kraus data, cross-checked against Q from the
affine map, cyclic Jacobi, unitary extraction, independent check of the
corrected fidelity) on arrays with a leading batch axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import QubitChannel
from .eigen import MAX_SWEEPS, OFF_DIAGONAL_TOL
from .errors import InconsistencyError, InvalidInputError
from .pauli import ALGEBRA_TOL, PAULI_STACK, UnitaryRotation
from .quasi_inverse import AFTER_TOL, DEGENERACY_TOL, ROUTE_TOL, QuasiInverseResult

_BASIS = np.concatenate((np.eye(2, dtype=complex)[None], PAULI_STACK))
_PAIRS = [(p, q) for p in range(3) for q in range(p + 1, 4)]


@dataclass(frozen=True)
class BatchResult:
    """Column-wise quasi-inverse data; row ``i`` belongs to channel ``i``."""

    unitary: np.ndarray  # (N, 4) canonical (x0, x1, x2, x3)
    lambda_max: np.ndarray
    delta_f: np.ndarray
    f_before: np.ndarray
    f_after: np.ndarray
    degenerate: np.ndarray
    gap: np.ndarray

    def __len__(self) -> int:
        return self.lambda_max.shape[0]

    def result(self, i: int) -> QuasiInverseResult:
        y = self.unitary[i]
        return QuasiInverseResult(
            UnitaryRotation(y[0], y[1:]),
            float(self.lambda_max[i]),
            float(self.delta_f[i]),
            float(self.f_before[i]),
            float(self.f_after[i]),
            bool(self.degenerate[i]),
            float(self.gap[i]),
        )


def stack_channels(channels: Sequence[QubitChannel]) -> tuple[np.ndarray, np.ndarray]:
    """Kraus coefficients as ``a (N, k)`` and ``b (N, k, 3)``; pads with zero operators."""
    if not channels:
        raise InvalidInputError("empty channel batch")
    k = max(len(ch) for ch in channels)
    a = np.zeros((len(channels), k), dtype=complex)
    b = np.zeros((len(channels), k, 3), dtype=complex)
    for i, ch in enumerate(channels):
        a[i, : len(ch)] = ch.a
        b[i, : len(ch)] = ch.b
    return a, b


def affine_batch(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(M, t)`` stacks from the trace formula, via explicit 2x2 Kraus matrices."""
    bx, by, bz = b[..., 0], b[..., 1], b[..., 2]
    K = np.stack(
        (np.stack((a + bz, bx - 1j * by), -1), np.stack((bx + 1j * by, a - bz), -1)), -2
    )
    images = np.einsum("nkij,bjl,nkml->nbim", K, _BASIS, K.conj())
    R = 0.5 * np.real(np.einsum("aij,nbji->nab", PAULI_STACK, images))
    return R[:, :, 1:], R[:, :, 0]


def q_batch_from_kraus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    B = np.real(np.einsum("nka,nkc->nac", b, b.conj()))
    tr_b = np.trace(B, axis1=1, axis2=2)
    b_hat = B + (tr_b - 1.0)[:, None, None] * np.eye(3)
    v = np.real(1j * np.einsum("nk,nka->na", a.conj(), b) - 1j * np.einsum("nk,nka->na", a, b.conj()))
    return _assemble(b_hat, v)


def q_batch_from_affine(M: np.ndarray) -> np.ndarray:
    S = 0.5 * (M + M.transpose(0, 2, 1))
    A = 0.5 * (M - M.transpose(0, 2, 1))
    v = np.stack((A[:, 2, 1], A[:, 0, 2], A[:, 1, 0]), axis=1)
    b_hat = 0.5 * (S - np.trace(M, axis1=1, axis2=2)[:, None, None] * np.eye(3))
    return _assemble(b_hat, v)


def _assemble(b_hat: np.ndarray, v: np.ndarray) -> np.ndarray:
    Q = np.zeros((b_hat.shape[0], 4, 4))
    Q[:, 0, 1:] = Q[:, 1:, 0] = 0.5 * v
    Q[:, 1:, 1:] = b_hat
    return Q


def jacobi_eigh_batch(Q: np.ndarray, tol: float = OFF_DIAGONAL_TOL, max_sweeps: int = MAX_SWEEPS):
    """Cyclic Jacobi on a stack ``(N, n, n)`` of symmetric matrices.

    Every matrix receives the same rotation sequence as :func:`jacobi_eigh`
    would apply to it alone; matrices that have already converged get
    identity rotations. Eigenvalues are returned descending with stable ties.
    """
    A = np.array(Q, dtype=float)
    N, n, _ = A.shape
    if np.max(np.abs(A - A.transpose(0, 2, 1)), initial=0.0) > 1e-12:
        raise InvalidInputError("batch contains a non-symmetric matrix")
    A = 0.5 * (A + A.transpose(0, 2, 1))
    V = np.broadcast_to(np.eye(n), (N, n, n)).copy()
    threshold = tol * np.maximum(1.0, np.linalg.norm(A, axis=(1, 2)))
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(A[:, iu[0], iu[1]] ** 2, axis=1))
        active = off >= threshold
        if not active.any():
            break
        for p, q in pairs:
            apq = A[:, p, q]
            rotate = active & (apq != 0.0)
            safe = np.where(rotate, apq, 1.0)
            theta = (A[:, q, q] - A[:, p, p]) / (2.0 * safe)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(rotate, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cc, ss = c[:, None], s[:, None]
            col_p, col_q = A[:, :, p].copy(), A[:, :, q].copy()
            A[:, :, p] = cc * col_p - ss * col_q
            A[:, :, q] = ss * col_p + cc * col_q
            row_p, row_q = A[:, p, :].copy(), A[:, q, :].copy()
            A[:, p, :] = cc * row_p - ss * row_q
            A[:, q, :] = ss * row_p + cc * row_q
            A[rotate, p, q] = A[rotate, q, p] = 0.0
            vp, vq = V[:, :, p].copy(), V[:, :, q].copy()
            V[:, :, p] = cc * vp - ss * vq
            V[:, :, q] = ss * vp + cc * vq
    w = np.diagonal(A, axis1=1, axis2=2)
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    return w, V


def canonicalize_unitaries(Y: np.ndarray) -> np.ndarray:
    """Row-wise sign fix: ``x0 > 0``, or first nonzero axis component ``> 0`` when ``x0 == 0``."""
    Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)
    big = np.abs(Y) > ALGEBRA_TOL
    first = np.argmax(big, axis=1)
    lead = np.take_along_axis(Y, first[:, None], axis=1)[:, 0]
    Y = Y * np.where(lead < 0, -1.0, 1.0)[:, None]
    return Y + 0.0


def rotations_batch(Y: np.ndarray) -> np.ndarray:
    """SO(3) matrices of the unitaries ``x0 + i x.s`` (same convention as ``rotation_of_unitary``)."""
    x0, x = Y[:, 0], Y[:, 1:]
    cross = np.zeros((Y.shape[0], 3, 3))
    cross[:, 0, 1], cross[:, 0, 2] = -x[:, 2], x[:, 1]
    cross[:, 1, 0], cross[:, 1, 2] = x[:, 2], -x[:, 0]
    cross[:, 2, 0], cross[:, 2, 1] = -x[:, 1], x[:, 0]
    return (
        (x0 ** 2 - np.sum(x * x, axis=1))[:, None, None] * np.eye(3)
        + 2.0 * x[:, :, None] * x[:, None, :]
        - 2.0 * x0[:, None, None] * cross
    )


def quasi_inverse_batch(
    channels: Sequence[QubitChannel], degeneracy_tol: float = DEGENERACY_TOL
) -> BatchResult:
    """Vectorized :func:`quasi_inverse` over many channels."""
    a, b = stack_channels(channels)
    M, _ = affine_batch(a, b)
    Q = q_batch_from_kraus(a, b)
    route_gap = np.max(np.abs(Q - q_batch_from_affine(M)))
    if route_gap > ROUTE_TOL:
        raise InconsistencyError(f"Kraus and affine Q matrices differ by {route_gap:.3e}")
    w, V = jacobi_eigh_batch(Q)
    lam = w[:, 0]
    gap = w[:, 0] - w[:, 1]
    degenerate = gap / np.maximum(np.abs(lam), 1e-12) < degeneracy_tol
    trivial = lam <= ALGEBRA_TOL
    Y = canonicalize_unitaries(V[:, :, 0])
    Y[trivial] = (1.0, 0.0, 0.0, 0.0)
    delta_f = np.where(trivial, 0.0, 2.0 / 3.0 * lam)

    bb = np.sum(np.abs(b) ** 2, axis=(1, 2))
    aa = np.sum(np.abs(a) ** 2, axis=1)
    f_before = 1.0 - 2.0 / 3.0 * bb
    f_alt = 0.5 * (1.0 + np.trace(M, axis1=1, axis2=2) / 3.0)
    spread = max(np.max(np.abs(f_before - f_alt)), np.max(np.abs(f_before - (1 + 2 * aa) / 3)))
    if spread > 1e-10:
        raise InconsistencyError(f"fidelity formulas disagree by {spread:.3e}")
    f_after = f_before + delta_f
    composed = 0.5 * (1.0 + np.einsum("nab,nba->n", rotations_batch(Y), M) / 3.0)
    after_gap = np.max(np.abs(composed - f_after))
    if after_gap > AFTER_TOL:
        raise InconsistencyError(f"corrected fidelity disagrees with affine composition by {after_gap:.3e}")
    return BatchResult(Y, lam, delta_f, f_before, f_after, degenerate, gap)
