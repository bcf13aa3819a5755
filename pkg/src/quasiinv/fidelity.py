"""Average input-output fidelity of qubit channels.

Three routes are provided: closed forms in the Kraus coefficients, the
affine-map trace, and Monte Carlo over uniformly random pure inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import AffineMap, QubitChannel, b_matrix_of
from .errors import InconsistencyError, InvalidInputError
from .pauli import density_of_bloch, haar_bloch_samples

FORMULA_TOL = 1e-10
MC_BLOCK = 1 << 14


@dataclass(frozen=True)
class FidelityEstimate:
    mean: float
    stderr: float
    samples: int

    def agrees_with(self, value: float, n_sigma: float = 4.0) -> bool:
        return abs(self.mean - value) <= n_sigma * self.stderr + 1e-12


def fidelity_formulas(ch: QubitChannel) -> dict[str, float]:
    """Every closed-form expression for the average fidelity, keyed by route."""
    a, b = ch.a, ch.b
    aa = float(np.sum(np.abs(a) ** 2))
    bb = float(np.sum(np.abs(b) ** 2))
    return {
        "kraus_raw": aa + bb / 3.0,
        "b_norm": 1.0 - 2.0 * bb / 3.0,
        "a_norm": (1.0 + 2.0 * aa) / 3.0,
        "b_trace": 1.0 - 2.0 * np.trace(b_matrix_of(b)) / 3.0,
        "affine_trace": 0.5 * (1.0 + np.trace(ch.M) / 3.0),
    }


def avg_fidelity(ch: QubitChannel, tol: float = FORMULA_TOL) -> float:
    """``1 - 2/3 <b.b*>``, cross-checked against the other closed forms.

    Raises :class:`InconsistencyError` if any two formulas differ by more
    than ``tol``, which can only happen for a channel that is not trace
    preserving.
    """
    values = fidelity_formulas(ch)
    spread = max(values.values()) - min(values.values())
    if spread > tol:
        raise InconsistencyError(f"fidelity formulas disagree by {spread:.3e}: {values}")
    return values["b_norm"]


def b_matrix(ch: QubitChannel) -> np.ndarray:
    return b_matrix_of(ch.b)


def composed_avg_fidelity(N: AffineMap | np.ndarray, M: AffineMap | np.ndarray) -> float:
    """Average fidelity of the composition of maps with affine matrices ``N`` and ``M``.

    Only the linear parts matter, and ``Tr(N M) = Tr(M N)``, so the result
    does not depend on the order of composition.
    """
    N = N.M if isinstance(N, AffineMap) else np.asarray(N, dtype=float)
    M = M.M if isinstance(M, AffineMap) else np.asarray(M, dtype=float)
    return 0.5 * (1.0 + float(np.sum(N * M.T)) / 3.0)


def pure_state_fidelities(aff: AffineMap, n: np.ndarray) -> np.ndarray:
    """``<phi|E(phi)|phi> = (1 + n.(M n + t)) / 2`` for rows ``n`` of Bloch vectors."""
    return 0.5 * (1.0 + np.einsum("ka,ka->k", n, n @ aff.M.T + aff.t))


def pure_state_fidelity_slow(ch: QubitChannel, n) -> float:
    """Same integrand evaluated with 2x2 matrices (cross-check path)."""
    rho = density_of_bloch(n)
    return float(np.trace(rho @ ch.apply_density(rho)).real)


def mc_avg_fidelity(ch: QubitChannel, n: int = 100_000, seed: int = 0) -> FidelityEstimate:
    """Monte Carlo estimate of the average fidelity.

    Samples are drawn in fixed blocks of ``MC_BLOCK`` with one child seed per
    block, so the estimate depends only on ``(n, seed)`` and not on how the
    blocks are scheduled.
    """
    if n < 100:
        raise InvalidInputError("mc_avg_fidelity needs n >= 100")
    n_blocks = -(-n // MC_BLOCK)
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    # per-block (count, mean, M2) merged with Chan's update; exact for constant integrands
    count, mean, m2 = 0, 0.0, 0.0
    remaining = n
    for child in children:
        size = min(MC_BLOCK, remaining)
        remaining -= size
        f = pure_state_fidelities(ch.affine, haar_bloch_samples(np.random.default_rng(child), size))
        b_mean = f.mean()
        b_m2 = float(np.sum((f - b_mean) ** 2))
        delta = b_mean - mean
        total = count + size
        mean += delta * size / total
        m2 += b_m2 + delta * delta * count * size / total
        count = total
    var = m2 / (n - 1)
    return FidelityEstimate(float(mean), float(np.sqrt(var / n)), n)
