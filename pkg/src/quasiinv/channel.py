"""Qubit channels in Kraus and affine (Bloch) form.

A channel is stored as its ordered Kraus list in Pauli form. The affine map
``r -> M r + t`` is derived from it once, by applying the channel to the
Pauli basis. A second, closed-form route from the Kraus coefficients
(``affine_closed_form``) exists so the two can be checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InconsistencyError,
    InvalidInputError,
    NotCompletelyPositiveError,
    TracePreservationError,
)
from .pauli import (
    ALGEBRA_TOL,
    IDENTITY,
    INPUT_TOL,
    PAULI_STACK,
    PauliForm,
    UnitaryRotation,
    as_mat2,
    check_bloch,
    pauli_decompose,
)

TP_TOL = 1e-9
CP_TOL = 1e-9

_EYE3 = np.eye(3)


@dataclass(frozen=True)
class AffineMap:
    """Bloch-space action ``r -> M @ r + t``."""

    M: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        t = np.array(self.t, dtype=float).reshape(-1)
        if M.shape != (3, 3) or t.shape != (3,):
            raise InvalidInputError("affine map needs a 3x3 M and a 3-vector t")
        if not (np.isfinite(M).all() and np.isfinite(t).all()):
            raise InvalidInputError("affine map contains non-finite entries")
        M.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "t", t)

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def rotation(cls, R) -> "AffineMap":
        return cls(R, np.zeros(3))

    def __call__(self, r) -> np.ndarray:
        return self.M @ np.asarray(r, dtype=float) + self.t

    def then(self, second: "AffineMap") -> "AffineMap":
        """Affine map of ``second o self``."""
        return AffineMap(second.M @ self.M, second.M @ self.t + second.t)

    @property
    def is_unital(self) -> bool:
        return bool(np.linalg.norm(self.t) <= ALGEBRA_TOL)

    def allclose(self, other: "AffineMap", atol: float = INPUT_TOL) -> bool:
        return bool(
            np.allclose(self.M, other.M, atol=atol, rtol=0)
            and np.allclose(self.t, other.t, atol=atol, rtol=0)
        )


@dataclass(frozen=True)
class SplitAffine:
    """``M = S + A`` with ``A[a, b] = -eps[a, b, c] v[c]``."""

    S: np.ndarray
    A: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class ClosedForm:
    affine: AffineMap
    split: SplitAffine
    B: np.ndarray


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: np.ndarray
    eigenvalues: np.ndarray  # descending

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class CPReport:
    completely_positive: bool
    min_eigenvalue: float
    choi: ChoiMatrix

    def __bool__(self) -> bool:
        return self.completely_positive


_ROLL1 = [1, 2, 0]
_ROLL2 = [2, 0, 1]


def _cross(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Row-wise cross product; ``np.cross`` is slow for tiny arrays."""
    return u[..., _ROLL1] * w[..., _ROLL2] - u[..., _ROLL2] * w[..., _ROLL1]


def antisymmetric_from_vector(v) -> np.ndarray:
    v0, v1, v2 = (float(c) for c in v)
    return np.array([[0.0, -v2, v1], [v2, 0.0, -v0], [-v1, v0, 0.0]])


def vector_from_antisymmetric(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def _coerce_kraus(op) -> PauliForm:
    if isinstance(op, PauliForm):
        return op
    return pauli_decompose(as_mat2(op))


@dataclass(frozen=True, eq=False)
class QubitChannel:
    """Trace-preserving qubit channel ``rho -> sum_i K_i rho K_i^dag``.

    The Kraus list is held as the coefficient arrays of ``K_i = a_i + b_i.s``:
    ``a`` with shape ``(n,)`` and ``b`` with shape ``(n, 3)``. Build instances
    with :func:`from_kraus` or one of the ``make_*`` constructors, which
    validate trace preservation. Kraus lists are not canonicalized; compare
    channels with :meth:`equivalent`.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=complex).reshape(-1)
        b = np.array(self.b, dtype=complex).reshape(-1, 3)
        if a.shape[0] == 0 or a.shape[0] != b.shape[0]:
            raise InvalidInputError("need matching, nonempty a and b coefficient arrays")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidInputError("Kraus coefficients must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_pauli_forms(cls, kraus: Sequence[PauliForm]) -> "QubitChannel":
        return cls(np.array([k.a for k in kraus]), np.array([k.b for k in kraus]))

    @cached_property
    def kraus(self) -> tuple[PauliForm, ...]:
        return tuple(PauliForm(a, b) for a, b in zip(self.a, self.b))

    @cached_property
    def kraus_matrices(self) -> np.ndarray:
        """Stacked 2x2 Kraus matrices, shape ``(n, 2, 2)``."""
        a, b = self.a, self.b
        bx, by, bz = b[:, 0], b[:, 1], b[:, 2]
        return np.stack(
            (np.stack((a + bz, bx - 1j * by), -1), np.stack((bx + 1j * by, a - bz), -1)), -2
        )

    def matrices(self) -> list[np.ndarray]:
        return list(self.kraus_matrices)

    @cached_property
    def affine(self) -> AffineMap:
        return affine_of(self)

    @property
    def M(self) -> np.ndarray:
        return self.affine.M

    @property
    def t(self) -> np.ndarray:
        return self.affine.t

    def apply_density(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        Ks = self.kraus_matrices
        return np.einsum("kij,jl,kml->im", Ks, rho, Ks.conj())

    def apply(self, r) -> np.ndarray:
        """Image of a Bloch vector, via the affine map."""
        return self.affine(check_bloch(r))

    def equivalent(self, other: "QubitChannel", atol: float = INPUT_TOL) -> bool:
        return self.affine.allclose(other.affine, atol=atol)

    def __len__(self) -> int:
        return self.a.shape[0]


def trace_preservation_residual(a: np.ndarray, b: np.ndarray) -> float:
    """Max entry of ``sum K^dag K - I``, built from the Pauli-form constraints.

    ``<a* a> + <b*.b> = 1`` and ``<a b*> + <a* b> + i <b* x b> = 0``.
    """
    scalar = np.sum(np.abs(a) ** 2) + np.sum(np.abs(b) ** 2) - 1.0
    vector = a @ b.conj() + a.conj() @ b + 1j * np.sum(_cross(b.conj(), b), axis=0)
    # sum K^dag K - I = scalar*I + vector.sigma; report the largest matrix entry
    entries = (scalar + vector[2], scalar - vector[2], vector[0] - 1j * vector[1])
    return float(max(abs(e) for e in entries))


def from_kraus(ops: Iterable, tol: float = TP_TOL) -> QubitChannel:
    """Validated channel from 2x2 matrices and/or :class:`PauliForm` objects."""
    kraus = [_coerce_kraus(op) for op in ops]
    if not kraus:
        raise InvalidInputError("a channel needs at least one Kraus operator")
    ch = QubitChannel.from_pauli_forms(kraus)
    residual = trace_preservation_residual(ch.a, ch.b)
    if residual > tol:
        raise TracePreservationError(residual, tol)
    return ch


_BASIS = np.concatenate((IDENTITY[None], PAULI_STACK))


def affine_of(ch: QubitChannel) -> AffineMap:
    """``M[a, b] = Tr(s_a E(s_b)) / 2``, ``t[a] = Tr(s_a E(1)) / 2``."""
    Ks = ch.kraus_matrices
    images = np.einsum("kij,bjl,kml->bim", Ks, _BASIS, Ks.conj())
    # R[a, b] = Tr(s_a E(s_b)) / 2 over the basis (1, sx, sy, sz)
    R = 0.5 * np.real(np.einsum("aij,bji->ab", PAULI_STACK, images))
    return AffineMap(R[:, 1:], R[:, 0])


def b_matrix_of(b: np.ndarray) -> np.ndarray:
    """``B[a, c] = 1/2 <b_a b_c* + b_a* b_c>`` from stacked b-vectors."""
    outer = b.T @ b.conj()
    return np.real(0.5 * (outer + outer.conj()))


def affine_closed_form(ch: QubitChannel) -> ClosedForm:
    """Affine map assembled directly from the Kraus coefficients ``a_i, b_i``."""
    a, b = ch.a, ch.b
    ac, bc = a.conj(), b.conj()
    t = np.real(ac @ b + a @ bc + 1j * _cross(b, bc).sum(axis=0))
    B = np.real(b.T @ bc)  # 1/2 <b_a b_c* + b_a* b_c>
    tr_b = B[0, 0] + B[1, 1] + B[2, 2]
    S = (1.0 - 2.0 * tr_b) * _EYE3 + 2.0 * B
    v = np.real(1j * (ac @ b - a @ bc))
    A = antisymmetric_from_vector(v)
    trace_gap = abs(S[0, 0] + S[1, 1] + S[2, 2] - (3.0 - 4.0 * tr_b))
    if trace_gap > ALGEBRA_TOL:
        raise InconsistencyError(f"Tr M != 3 - 4 Tr B (gap {trace_gap:.3e})")
    return ClosedForm(AffineMap(S + A, t), SplitAffine(S, A, v), B)


def split_affine(M) -> SplitAffine:
    """Symmetric/antisymmetric split of an affine matrix."""
    M = np.asarray(M, dtype=float)
    S = 0.5 * (M + M.T)
    A = 0.5 * (M - M.T)
    return SplitAffine(S, A, vector_from_antisymmetric(A))


def choi_of(ch: QubitChannel | AffineMap) -> ChoiMatrix:
    """Unnormalized Choi matrix ``sum_ij |i><j| (x) E(|i><j|)`` (trace 2 when TP).

    Accepts an :class:`AffineMap` as well, extended linearly via
    ``E(1) = 1 + t.s`` and ``E(s_b) = sum_a M[a, b] s_a``; this is how maps
    with no known Kraus form are tested.
    """
    if isinstance(ch, QubitChannel):
        apply = ch.apply_density
    else:
        apply = _linear_action(ch)
    C = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            E = np.zeros((2, 2), dtype=complex)
            E[i, j] = 1.0
            C[2 * i:2 * i + 2, 2 * j:2 * j + 2] = apply(E)
    C = 0.5 * (C + C.conj().T)
    w = np.linalg.eigvalsh(C)[::-1]
    return ChoiMatrix(C, w)


def _linear_action(aff: AffineMap):
    def apply(X):
        p = pauli_decompose(X)
        scalar = p.a
        vec = aff.M @ p.b + scalar * aff.t
        return scalar * IDENTITY + np.einsum("k,kij->ij", vec, PAULI_STACK)

    return apply


def is_completely_positive(ch: QubitChannel | AffineMap, tol: float = CP_TOL) -> CPReport:
    choi = choi_of(ch)
    return CPReport(choi.min_eigenvalue >= -tol, choi.min_eigenvalue, choi)


def fujiwara_algoet_margins(l1: float, l2: float, l3: float) -> dict[str, float]:
    """Slack of each tetrahedron inequality; all must be ``>= 0`` for CP."""
    return {
        "(1+l3)^2 >= (l1+l2)^2": (1 + l3) ** 2 - (l1 + l2) ** 2,
        "(1-l3)^2 >= (l1-l2)^2": (1 - l3) ** 2 - (l1 - l2) ** 2,
        "|l1| <= 1": 1 - abs(l1),
        "|l2| <= 1": 1 - abs(l2),
        "|l3| <= 1": 1 - abs(l3),
    }


def compose(second: QubitChannel, first: QubitChannel) -> QubitChannel:
    """``second o first``; Kraus set ``{K2_i K1_j}`` in row-major ``(i, j)`` order."""
    a2, b2 = second.a[:, None], second.b[:, None, :]
    a1, b1 = first.a[None, :], first.b[None, :, :]
    # (a + b.s)(c + d.s) = ac + b.d + (a d + c b + i b x d).s
    a = a2 * a1 + np.sum(b2 * b1, axis=-1)
    b = a2[..., None] * b1 + a1[..., None] * b2 + 1j * _cross(b2, b1)
    return QubitChannel(a.reshape(-1), b.reshape(-1, 3))


def mixture(channels: Sequence[QubitChannel], weights: Sequence[float]) -> QubitChannel:
    """Convex combination, realized by concatenating ``sqrt(w) K`` lists."""
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(channels) or np.any(weights < -INPUT_TOL) or abs(weights.sum() - 1) > INPUT_TOL:
        raise InvalidInputError("mixture weights must be a probability vector matching the channels")
    roots = np.sqrt(np.clip(weights, 0, None))
    return QubitChannel(
        np.concatenate([r * ch.a for r, ch in zip(roots, channels)]),
        np.concatenate([r * ch.b for r, ch in zip(roots, channels)]),
    )


def make_unitary(V: UnitaryRotation) -> QubitChannel:
    return QubitChannel([V.x0], [1j * V.x])


def conjugate(ch: QubitChannel, U: UnitaryRotation) -> QubitChannel:
    """``U o ch o U^-1``."""
    return compose(make_unitary(U), compose(ch, make_unitary(U.inverse())))


def identity_channel() -> QubitChannel:
    return QubitChannel([1.0], np.zeros((1, 3)))


def _check_probabilities(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise InvalidInputError(f"{name}: probabilities must be finite")
    if np.any(p < -INPUT_TOL):
        raise InvalidInputError(f"{name}: probabilities must be non-negative, got {p.tolist()}")
    return np.clip(p, 0.0, None)


def make_pauli(p0: float, p1: float, p2: float, p3: float) -> QubitChannel:
    """``p0 rho + p1 X rho X + p2 Y rho Y + p3 Z rho Z``."""
    p = _check_probabilities([p0, p1, p2, p3], "pauli")
    if abs(p.sum() - 1.0) > INPUT_TOL:
        raise InvalidInputError(f"pauli: probabilities must sum to 1, got {p.sum():.12g}")
    roots = np.sqrt(p)
    b = np.zeros((4, 3))
    b[1:] = np.diag(roots[1:])
    return QubitChannel([roots[0], 0, 0, 0], b)


def make_mixed_rotation(p: float, theta: float) -> QubitChannel:
    """``(1 - 3p) rho + p sum_i U_i rho U_i^dag`` with ``U_i = exp(-i theta s_i / 2)``."""
    if not (np.isfinite(p) and np.isfinite(theta)):
        raise InvalidInputError("mixed_rotation: parameters must be finite")
    if p < -INPUT_TOL or p > 1.0 / 3.0 + INPUT_TOL:
        raise InvalidInputError(f"mixed_rotation: p must lie in [0, 1/3], got {p}")
    p = min(max(p, 0.0), 1.0 / 3.0)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    root = np.sqrt(p)
    b = np.zeros((4, 3), dtype=complex)
    b[1:] = -1j * s * root * np.eye(3)
    return QubitChannel([np.sqrt(max(0.0, 1.0 - 3.0 * p)), c * root, c * root, c * root], b)


TETRAHEDRON_AXES = np.array(
    [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float
) / np.sqrt(3.0)


def make_tetrahedron(p0: float, p1: float, p2: float, p3: float) -> QubitChannel:
    """``q rho + sum_i p_i (u_i.s) rho (u_i.s)`` over the four tetrahedron corners ``u_i``."""
    p = _check_probabilities([p0, p1, p2, p3], "tetrahedron")
    q = 1.0 - p.sum()
    if q < -INPUT_TOL:
        raise InvalidInputError(f"tetrahedron: p0+p1+p2+p3 must be <= 1, got {p.sum():.12g}")
    b = np.vstack((np.zeros(3), np.sqrt(p)[:, None] * TETRAHEDRON_AXES))
    return QubitChannel([np.sqrt(max(q, 0.0)), 0, 0, 0, 0], b)


def make_tetrahedron_pair(p: float, p_prime: float) -> QubitChannel:
    """Two-parameter tetrahedron channel: weight ``p`` on ``u0, u3`` and ``p_prime`` on ``u1, u2``.

    With this pairing ``B`` has off-diagonal entry ``(2p - 2p')/3`` in the xy block,
    so for ``p > p'`` the optimal axis is ``(x + y)/sqrt(2)``.
    """
    if not (np.isfinite(p) and np.isfinite(p_prime)):
        raise InvalidInputError("tetrahedron: parameters must be finite")
    if p + p_prime > 0.5 + INPUT_TOL:
        raise InvalidInputError(f"tetrahedron: need p + p' <= 1/2, got {p + p_prime:.12g}")
    return make_tetrahedron(p, p_prime, p_prime, p)


def make_amplitude_damping(gamma: float, twisted: bool = False) -> QubitChannel:
    """Kraus ``A0 = diag(1, gamma)`` (``diag(1, i gamma)`` when twisted), ``A1 = [[0, sqrt(1-gamma^2)], [0, 0]]``.

    Negative ``gamma`` is allowed and gives the reflected variant.
    """
    if not np.isfinite(gamma) or abs(gamma) >= 1.0:
        raise InvalidInputError(f"amplitude_damping: need |gamma| < 1, got {gamma}")
    g = 1j * gamma if twisted else gamma
    A0 = np.array([[1, 0], [0, g]], dtype=complex)
    A1 = np.array([[0, np.sqrt(1 - gamma * gamma)], [0, 0]], dtype=complex)
    return QubitChannel.from_pauli_forms([pauli_decompose(A0), pauli_decompose(A1)])


def pauli_probabilities_of_diagonal(l1: float, l2: float, l3: float) -> np.ndarray:
    """Invert ``l1 = p0+p1-p2-p3`` etc. for the Pauli weights."""
    return 0.25 * np.array(
        [1 + l1 + l2 + l3, 1 + l1 - l2 - l3, 1 - l1 + l2 - l3, 1 - l1 - l2 + l3]
    )


def check_tetrahedron(l1: float, l2: float, l3: float, tol: float = INPUT_TOL) -> None:
    if not all(np.isfinite([l1, l2, l3])):
        raise InvalidInputError("diagonal: lambdas must be finite")
    for rule, margin in fujiwara_algoet_margins(l1, l2, l3).items():
        if margin < -tol:
            raise NotCompletelyPositiveError(
                f"diagonal map ({l1}, {l2}, {l3}) is not completely positive: "
                f"{rule} violated by {-margin:.3e}"
            )


def make_diagonal(l1: float, l2: float, l3: float) -> QubitChannel:
    """Unital channel with affine map ``(diag(l1, l2, l3), 0)``, realized as a Pauli channel."""
    check_tetrahedron(l1, l2, l3)
    p = np.clip(pauli_probabilities_of_diagonal(l1, l2, l3), 0.0, None)
    return make_pauli(*(p / p.sum()))


def random_channel(rng: np.random.Generator, n_kraus: int = 4) -> QubitChannel:
    """Random CPTP channel with ``n_kraus`` Kraus operators.

    The Kraus operators are the 2x2 blocks of a random isometry ``C^2 -> C^(2n)``
    (QR of a complex Gaussian matrix), so ``sum K^dag K = 1`` by construction.
    """
    if not 1 <= n_kraus <= 4:
        raise InvalidInputError(f"n_kraus must be in 1..4, got {n_kraus}")
    Z = rng.standard_normal((2 * n_kraus, 2)) + 1j * rng.standard_normal((2 * n_kraus, 2))
    W, _ = np.linalg.qr(Z)
    return from_kraus(W.reshape(n_kraus, 2, 2))
