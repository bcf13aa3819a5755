import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quasiinv.eigen import jacobi_eigh, sym_eigen4
from quasiinv.errors import InvalidInputError


def check_decomposition(A, w, V, tol=1e-12):
    scale = max(1.0, np.linalg.norm(A))
    assert np.max(np.abs(V @ np.diag(w) @ V.T - A)) < tol * scale
    assert np.max(np.abs(V.T @ V - np.eye(len(w)))) < tol
    assert np.all(np.diff(w) <= 0)


def test_diagonal_input_gives_axes():
    w, V = sym_eigen4(np.diag([0.1, 0.5, -0.2, 0.3]))
    assert np.array_equal(w, [0.5, 0.3, 0.1, -0.2])
    assert np.array_equal(np.abs(V), np.eye(4)[:, [1, 3, 0, 2]])


def test_twisted_block():
    g = 0.6
    Q = np.zeros((4, 4))
    Q[0, 3] = Q[3, 0] = g / 2
    Q[1, 1] = Q[2, 2] = -g * g / 2
    w, V = sym_eigen4(Q)
    assert abs(w[0] - 0.3) < 1e-15
    assert abs(abs(V[:, 0] @ np.array([1, 0, 0, 1]) / np.sqrt(2)) - 1) < 1e-14


def test_random_reconstruction(rng):
    for _ in range(1000):
        X = rng.standard_normal((4, 4))
        A = X + X.T
        w, V = sym_eigen4(A)
        check_decomposition(A, w, V)
        assert np.allclose(w, np.linalg.eigvalsh(A)[::-1], atol=1e-12)


def test_near_degenerate_and_clustered(rng):
    U, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    for spectrum in ([1, 1, 1, 1], [1, 1 + 1e-13, -1, -1], [1e-14, 0, 0, -1e-14], [3, 3, 0, 0]):
        A = U @ np.diag(spectrum) @ U.T
        A = 0.5 * (A + A.T)
        w, V = jacobi_eigh(A)
        check_decomposition(A, w, V)


def test_other_sizes(rng):
    for n in (1, 2, 3, 6):
        X = rng.standard_normal((n, n))
        A = X + X.T
        check_decomposition(A, *jacobi_eigh(A))


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_property_reconstruction(X):
    A = 0.5 * (X + X.T)
    check_decomposition(A, *sym_eigen4(A))


def test_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        sym_eigen4(np.arange(16.0).reshape(4, 4))
    with pytest.raises(InvalidInputError):
        sym_eigen4(np.eye(3))
    A = np.eye(4)
    A[0, 0] = np.nan
    with pytest.raises(InvalidInputError):
        jacobi_eigh(A)
