import numpy as np
import pytest

from quasiinv.channel import random_channel
from quasiinv.pauli import PAULI_STACK, UnitaryRotation


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_channels(rng, count, sizes=(1, 2, 3, 4)):
    return [random_channel(rng, sizes[i % len(sizes)]) for i in range(count)]


def random_rotation(rng) -> UnitaryRotation:
    return UnitaryRotation.from_vector(rng.standard_normal(4))


def conjugate_paulis(V: np.ndarray) -> np.ndarray:
    """Oracle: R[a, b] = Tr(s_a V s_b V^dag) / 2 by plain 2x2 arithmetic."""
    R = np.zeros((3, 3))
    for b in range(3):
        img = V @ PAULI_STACK[b] @ V.conj().T
        for a in range(3):
            R[a, b] = 0.5 * np.trace(PAULI_STACK[a] @ img).real
    return R
