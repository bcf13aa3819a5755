"""Optimal unitary correction ("quasi-inverse") of a qubit channel.

For a correction ``V = x0 + i x.s`` applied after the channel, the gain in
average fidelity is ``2/3 * y^T Q y`` with ``y = (x0, x)`` and the symmetric
4x4 matrix

    Q = 1/2 [[0, v^T], [v, 2 B_hat]]

so the best correction is the top eigenvector of ``Q``. ``B_hat`` is a shift
of the Kraus second-moment matrix ``B`` and ``v`` encodes the antisymmetric
part of the affine matrix. The module also holds the vertex rule for
diagonal channels and two sampling oracles used to check the eigen-solution.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .channel import (
    AffineMap,
    QubitChannel,
    affine_closed_form,
    check_tetrahedron,
    make_diagonal,
    split_affine,
)
from .eigen import sym_eigen4
from .errors import InconsistencyError, InvalidInputError
from .fidelity import avg_fidelity, composed_avg_fidelity
from .pauli import ALGEBRA_TOL, UnitaryRotation, random_unitary, rotation_of_unitary

DEGENERACY_TOL = 1e-9
ROUTE_TOL = 1e-12
AFTER_TOL = 1e-10
BRUTE_BLOCK = 1 << 14
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QForm:
    Q: np.ndarray
    b_hat: np.ndarray
    v: np.ndarray

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """``(eigenvalues descending, eigenvectors as columns)``."""
        return sym_eigen4(self.Q)

    def gain(self, V: UnitaryRotation) -> float:
        """Fidelity gain ``2/3 (x^T B_hat x + x0 v.x)`` of correcting with ``V``."""
        return 2.0 / 3.0 * float(V.x @ self.b_hat @ V.x + V.x0 * (self.v @ V.x))


@dataclass(frozen=True)
class QuasiInverseResult:
    v_opt: UnitaryRotation
    lambda_max: float
    delta_f: float
    f_before: float
    f_after: float
    degenerate: bool
    gap: float

    @property
    def is_identity(self) -> bool:
        return self.delta_f <= ALGEBRA_TOL


def assemble_q(b_hat: np.ndarray, v: np.ndarray) -> np.ndarray:
    Q = np.zeros((4, 4))
    Q[0, 1:] = Q[1:, 0] = 0.5 * np.asarray(v, dtype=float)
    Q[1:, 1:] = b_hat
    return Q


def q_form_from_kraus(ch: QubitChannel) -> QForm:
    cf = affine_closed_form(ch)
    B = cf.B
    b_hat = B - np.eye(3) + np.trace(B) * np.eye(3)
    return QForm(assemble_q(b_hat, cf.split.v), b_hat, cf.split.v)


def q_form_from_affine(aff: AffineMap) -> QForm:
    split = split_affine(aff.M)
    b_hat = 0.5 * (split.S - np.trace(aff.M) * np.eye(3))
    return QForm(assemble_q(b_hat, split.v), b_hat, split.v)


def q_form(ch: QubitChannel, tol: float = ROUTE_TOL) -> QForm:
    """Quadratic form of the fidelity gain, built from Kraus data and checked against the affine route."""
    kraus_route = q_form_from_kraus(ch)
    affine_route = q_form_from_affine(ch.affine)
    gap = float(np.max(np.abs(kraus_route.Q - affine_route.Q)))
    if gap > tol:
        raise InconsistencyError(f"Kraus and affine Q matrices differ by {gap:.3e}")
    return kraus_route


def quasi_inverse(ch: QubitChannel, degeneracy_tol: float = DEGENERACY_TOL) -> QuasiInverseResult:
    qf = q_form(ch)
    w, vecs = qf.spectrum
    lam = float(w[0])
    gap = float(w[0] - w[1])
    degenerate = gap / max(abs(lam), 1e-12) < degeneracy_tol
    if lam <= ALGEBRA_TOL:
        v_opt = UnitaryRotation.identity()
        delta_f = 0.0
    else:
        v_opt = UnitaryRotation.from_vector(vecs[:, 0])
        delta_f = 2.0 / 3.0 * lam
    f_before = avg_fidelity(ch)
    f_after = f_before + delta_f
    check = composed_avg_fidelity(rotation_of_unitary(v_opt), ch.M)
    if abs(check - f_after) > AFTER_TOL:
        raise InconsistencyError(
            f"corrected fidelity {f_after:.15g} disagrees with affine composition {check:.15g}"
        )
    return QuasiInverseResult(v_opt, lam, delta_f, f_before, f_after, bool(degenerate), gap)


VERTEX_LABELS = ("identity", "sigma_x", "sigma_y", "sigma_z")


def vertex_scores(l1: float, l2: float, l3: float) -> np.ndarray:
    """``lambda . vertex`` for the four tetrahedron corners ``1, s_x, s_y, s_z``."""
    return np.array([l1 + l2 + l3, l1 - l2 - l3, l2 - l1 - l3, l3 - l1 - l2])


def geometric_quasi_inverse(
    l1: float, l2: float, l3: float, tie_tol: float = DEGENERACY_TOL
) -> QuasiInverseResult:
    """Quasi-inverse of the diagonal channel ``diag(l1, l2, l3)`` by the nearest-vertex rule.

    The corrected fidelity is ``(1 + lambda.mu / 3) / 2`` with ``mu`` the
    chosen vertex, so the best vertex maximizes :func:`vertex_scores`.
    """
    check_tetrahedron(l1, l2, l3)
    scores = vertex_scores(l1, l2, l3)
    best = int(np.argmax(scores))
    ranked = np.sort(scores)[::-1]
    gap = float(ranked[0] - ranked[1])
    if best == 0:
        v_opt = UnitaryRotation.identity()
    else:
        x = np.zeros(3)
        x[best - 1] = 1.0
        v_opt = UnitaryRotation(0.0, x)
    delta_f = (scores[best] - scores[0]) / 6.0
    f_before = 0.5 * (1.0 + scores[0] / 3.0)
    return QuasiInverseResult(
        v_opt,
        lambda_max=1.5 * delta_f,
        delta_f=float(delta_f),
        f_before=float(f_before),
        f_after=float(f_before + delta_f),
        degenerate=bool(gap <= tie_tol),
        gap=gap,
    )


# --- sampling oracles ---------------------------------------------------------


def overlap_gram(ch: QubitChannel) -> np.ndarray:
    """Real ``G`` with ``sum_i |a'_i|^2 = y^T G y`` for ``V K_i = a'_i + b'_i.s``.

    Built from ``a'_i = x0 a_i + i x.b_i``; the corrected fidelity is then
    ``(1 + 2 y^T G y) / 3``. Shares nothing with :func:`q_form`.
    """
    c = np.column_stack((ch.a, 1j * ch.b))
    return np.real(c.T @ c.conj())


def unitary_gain(ch: QubitChannel, V: UnitaryRotation) -> float:
    G = overlap_gram(ch)
    y = V.vector
    return 2.0 / 3.0 * float(y @ G @ y - G[0, 0])


class BruteForceResult(NamedTuple):
    unitary: UnitaryRotation
    delta_f: float


def _sample_block(G: np.ndarray, seed: np.random.SeedSequence, size: int):
    Y = np.random.default_rng(seed).standard_normal((size, 4))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    vals = np.einsum("ki,ij,kj->k", Y, G, Y)
    k = int(np.argmax(vals))
    return float(vals[k]), Y[k]


def _golden_max(f, lo: float, hi: float, iters: int):
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _refine(G: np.ndarray, y: np.ndarray, rounds: int, step: float = 0.25, iters: int = 40):
    """Coordinate-wise golden-section ascent of ``y^T G y`` on the unit sphere."""
    g = G.tolist()
    y = [float(c) for c in y]
    best = sum(y[i] * g[i][j] * y[j] for i in range(4) for j in range(4))
    for _ in range(rounds):
        moved = False
        for j in range(4):
            gy = sum(g[j][k] * y[k] for k in range(4))
            gjj, yj = g[j][j], y[j]
            val0 = best

            # Rayleigh quotient along y + t e_j, using |y| = 1
            def along(t, val0=val0, gy=gy, gjj=gjj, yj=yj):
                return (val0 + 2.0 * t * gy + t * t * gjj) / (1.0 + 2.0 * t * yj + t * t)

            t, val = _golden_max(along, -step, step, iters)
            if val > best:
                y[j] += t
                norm = math.sqrt(sum(c * c for c in y))
                y = [c / norm for c in y]
                best = sum(y[i] * g[i][k] * y[k] for i in range(4) for k in range(4))
                moved = True
        if not moved:
            step *= 0.5
            if step < 1e-12:
                break
    return best, np.array(y)


def brute_force_best_unitary(
    ch: QubitChannel,
    samples: int = 100_000,
    refine_steps: int = 100,
    seed: int = 0,
    workers: int = 1,
) -> BruteForceResult:
    """Best unitary correction found by random search over SU(2) plus local refinement.

    Candidates are uniform on the 3-sphere (normalized Gaussian 4-vectors),
    drawn in fixed-size blocks with per-block child seeds. The identity is
    always a candidate. The result depends only on ``(samples, seed)``.
    """
    if samples < 1000:
        raise InvalidInputError("brute force needs at least 1000 samples")
    G = overlap_gram(ch)
    n_blocks = -(-samples // BRUTE_BLOCK)
    seeds = np.random.SeedSequence(seed).spawn(n_blocks)
    sizes = [min(BRUTE_BLOCK, samples - i * BRUTE_BLOCK) for i in range(n_blocks)]
    jobs = list(zip(seeds, sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda job: _sample_block(G, *job), jobs))
    else:
        results = [_sample_block(G, *job) for job in jobs]
    results.append((float(G[0, 0]), np.array([1.0, 0.0, 0.0, 0.0])))
    # order-independent reduction: highest value, then lexicographically largest candidate
    _, y0 = max(results, key=lambda r: (r[0], tuple(r[1])))
    best, y = _refine(G, y0, refine_steps)
    return BruteForceResult(UnitaryRotation.from_vector(y), 2.0 / 3.0 * (best - float(G[0, 0])))


def mixture_delta_f(
    ch: QubitChannel, unitaries: Sequence[UnitaryRotation], weights: Sequence[float]
) -> float:
    """Fidelity gain of the correction ``rho -> sum_k w_k V_k rho V_k^dag``."""
    weights = np.asarray(weights, dtype=float)
    N = sum(w * rotation_of_unitary(V) for w, V in zip(weights, unitaries))
    return composed_avg_fidelity(N, ch.M) - composed_avg_fidelity(np.eye(3), ch.M)


def best_unital_mixture(
    ch: QubitChannel, mixture_size: int = 3, samples: int = 1000, seed: int = 0
) -> float:
    """Largest gain seen over random convex mixtures of random unitaries.

    A falsification probe: a mixture should never beat the best single unitary.
    """
    if mixture_size < 2:
        raise InvalidInputError("mixture_size must be >= 2")
    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(samples):
        weights = rng.dirichlet(np.ones(mixture_size))
        unitaries = [random_unitary(rng) for _ in range(mixture_size)]
        best = max(best, mixture_delta_f(ch, unitaries, weights))
    return float(best)


def diagonal_quasi_inverse(l1: float, l2: float, l3: float) -> QuasiInverseResult:
    """Eigen-route answer for ``diag(l1, l2, l3)``; counterpart of :func:`geometric_quasi_inverse`."""
    return quasi_inverse(make_diagonal(l1, l2, l3))
