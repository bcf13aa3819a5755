"""Small exact linear algebra for a single qubit.

Conventions used throughout the package:

* An operator is written ``K = a*1 + b.sigma`` with complex ``a`` and a
  complex 3-vector ``b`` (``PauliForm``).
* A unitary is written ``V = x0 + i x.sigma`` with ``x0**2 + |x|**2 = 1``
  (``UnitaryRotation``). ``V`` and ``-V`` act identically, so rotations are
  stored with ``x0 >= 0``; when ``x0 == 0`` the first nonzero component of
  ``x`` is made positive.
* The SO(3) matrix of ``V`` is defined by ``V sigma_b V^dag = sum_a R[a, b] sigma_a``,
  so that the Bloch vector of ``V rho V^dag`` is ``R @ r``. With this sign
  convention ``V = exp(i phi n.sigma)`` rotates the Bloch sphere by ``-2 phi``
  about ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

ALGEBRA_TOL = 1e-12
INPUT_TOL = 1e-9

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
# PAULI_STACK[k] is sigma_k; handy for einsum.
PAULI_STACK = np.stack(PAULIS)


def _check_finite(arr, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")


def as_mat2(K) -> np.ndarray:
    """Coerce ``K`` to a finite 2x2 complex array."""
    arr = np.asarray(K, dtype=complex)
    if arr.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 matrix, got shape {arr.shape}")
    _check_finite(arr, "matrix")
    return arr


@dataclass(frozen=True)
class PauliForm:
    """Operator ``a*1 + b.sigma``."""

    a: complex
    b: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=complex))

    def __post_init__(self):
        a = complex(self.a)
        b = np.array(self.b, dtype=complex).reshape(-1)
        if b.shape != (3,):
            raise InvalidInputError(f"b must have 3 components, got {b.shape}")
        if not (np.isfinite(a) and np.all(np.isfinite(b))):
            raise InvalidInputError("PauliForm contains non-finite entries")
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def matrix(self) -> np.ndarray:
        return pauli_compose(self)

    def scaled(self, factor: complex) -> "PauliForm":
        return PauliForm(self.a * factor, self.b * factor)

    def __matmul__(self, other: "PauliForm") -> "PauliForm":
        # (a + b.s)(c + d.s) = ac + b.d + (a d + c b + i b x d).s
        a, b, c, d = self.a, self.b, other.a, other.b
        return PauliForm(a * c + b @ d, a * d + c * b + 1j * np.cross(b, d))

    def dagger(self) -> "PauliForm":
        return PauliForm(np.conj(self.a), np.conj(self.b))

    def allclose(self, other: "PauliForm", atol: float = ALGEBRA_TOL) -> bool:
        return abs(self.a - other.a) <= atol and bool(np.all(np.abs(self.b - other.b) <= atol))


def pauli_decompose(K) -> PauliForm:
    """Return ``(a, b)`` with ``a = Tr K / 2`` and ``b_k = Tr(sigma_k K) / 2``."""
    K = as_mat2(K)
    a = 0.5 * (K[0, 0] + K[1, 1])
    # closed forms of Tr(sigma_k K)/2; exact in floating point
    bx = 0.5 * (K[0, 1] + K[1, 0])
    by = 0.5j * (K[0, 1] - K[1, 0])
    bz = 0.5 * (K[0, 0] - K[1, 1])
    return PauliForm(a, np.array([bx, by, bz]))


def pauli_compose(p: PauliForm) -> np.ndarray:
    a, (bx, by, bz) = p.a, p.b
    return np.array([[a + bz, bx - 1j * by], [bx + 1j * by, a - bz]], dtype=complex)


@dataclass(frozen=True)
class UnitaryRotation:
    """Unitary ``V = x0 + i x.sigma``, canonicalized so that ``x0 >= 0``."""

    x0: float
    x: np.ndarray

    def __post_init__(self):
        x0 = float(self.x0)
        x = np.array(self.x, dtype=float).reshape(-1)
        if x.shape != (3,):
            raise InvalidInputError(f"x must have 3 components, got {x.shape}")
        if not (np.isfinite(x0) and np.all(np.isfinite(x))):
            raise InvalidInputError("UnitaryRotation contains non-finite entries")
        norm = float(np.sqrt(x0 * x0 + x @ x))
        if abs(norm - 1.0) > INPUT_TOL:
            raise InvalidInputError(f"x0^2 + |x|^2 must be 1, got {norm**2:.12g}")
        x0, x = x0 / norm, x / norm
        if _needs_flip(x0, x):
            x0, x = -x0, -x
        x.setflags(write=False)
        object.__setattr__(self, "x0", x0 + 0.0)
        object.__setattr__(self, "x", x + 0.0)

    @classmethod
    def identity(cls) -> "UnitaryRotation":
        return cls(1.0, np.zeros(3))

    @classmethod
    def from_vector(cls, y) -> "UnitaryRotation":
        """Build from a 4-vector ``(x0, x1, x2, x3)``; normalizes it first."""
        y = np.asarray(y, dtype=float)
        n = np.linalg.norm(y)
        if not n > 0:
            raise InvalidInputError("zero vector has no direction")
        y = y / n
        return cls(y[0], y[1:])

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate(([self.x0], self.x))

    @property
    def angle(self) -> float:
        """``phi`` in ``V = exp(i phi n.sigma)``, in ``[0, pi/2]``."""
        return float(np.arctan2(np.linalg.norm(self.x), self.x0))

    @property
    def axis(self) -> np.ndarray:
        """Unit vector along ``x``; zero for the identity."""
        n = np.linalg.norm(self.x)
        return self.x / n if n > ALGEBRA_TOL else np.zeros(3)

    def matrix(self) -> np.ndarray:
        return pauli_compose(self.pauli_form())

    def pauli_form(self) -> PauliForm:
        return PauliForm(self.x0, 1j * self.x)

    def rotation(self) -> np.ndarray:
        return rotation_of_unitary(self)

    def __matmul__(self, other: "UnitaryRotation") -> "UnitaryRotation":
        # quaternion product of (x0 + i x.s)(y0 + i y.s) = x0 y0 - x.y + i(x0 y + y0 x - x cross y).s
        a0, a, b0, b = self.x0, self.x, other.x0, other.x
        return UnitaryRotation(a0 * b0 - a @ b, a0 * b + b0 * a - np.cross(a, b))

    def inverse(self) -> "UnitaryRotation":
        return UnitaryRotation(self.x0, -self.x)

    def conjugated_by(self, U: "UnitaryRotation") -> "UnitaryRotation":
        """``U V U^dag``: same angle, axis rotated by ``R_U``."""
        return UnitaryRotation(self.x0, rotation_of_unitary(U) @ self.x)

    def allclose(self, other: "UnitaryRotation", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.vector, other.vector, atol=atol, rtol=0))


def _needs_flip(x0: float, x: np.ndarray) -> bool:
    if abs(x0) > ALGEBRA_TOL:
        return x0 < 0
    for comp in x:
        if abs(comp) > ALGEBRA_TOL:
            return comp < 0
    return False


def unitary_from_axis_angle(axis, phi: float) -> UnitaryRotation:
    """``exp(i phi axis.sigma)``, i.e. ``x0 = cos(phi)``, ``x = sin(phi) axis``."""
    axis = np.asarray(axis, dtype=float).reshape(-1)
    if axis.shape != (3,):
        raise InvalidInputError("axis must be a 3-vector")
    _check_finite(np.append(axis, phi), "axis/angle")
    if abs(np.linalg.norm(axis) - 1.0) > INPUT_TOL:
        raise InvalidInputError(f"axis must be a unit vector, |axis| = {np.linalg.norm(axis):.12g}")
    return UnitaryRotation(np.cos(phi), np.sin(phi) * axis)


def unitary_from_matrix(V, atol: float = INPUT_TOL) -> UnitaryRotation:
    """Read off ``(x0, x)`` from a 2x2 unitary, discarding its global phase."""
    V = as_mat2(V)
    det = np.linalg.det(V)
    if abs(abs(det) - 1) > atol or not np.allclose(V.conj().T @ V, IDENTITY, atol=atol):
        raise InvalidInputError("matrix is not unitary")
    p = pauli_decompose(V / np.sqrt(det))
    # in SU(2): a = x0 real, b = i x
    return UnitaryRotation(p.a.real, p.b.imag)


def _cross_matrix(x: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -x[2], x[1]], [x[2], 0.0, -x[0]], [-x[1], x[0], 0.0]])


def rotation_of_unitary(V: UnitaryRotation) -> np.ndarray:
    """SO(3) matrix of ``V`` under ``V sigma_b V^dag = sum_a R[a, b] sigma_a``."""
    x0, x = V.x0, V.x
    return (x0 * x0 - x @ x) * np.eye(3) + 2.0 * np.outer(x, x) - 2.0 * x0 * _cross_matrix(x)


def is_rotation(R, atol: float = ALGEBRA_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    return (
        R.shape == (3, 3)
        and np.allclose(R.T @ R, np.eye(3), atol=atol, rtol=0)
        and abs(np.linalg.det(R) - 1.0) <= atol
    )


def bloch_of_density(rho) -> np.ndarray:
    """Bloch vector ``r_k = Tr(sigma_k rho)`` of a 2x2 density matrix."""
    rho = as_mat2(rho)
    return np.real(np.einsum("kij,ji->k", PAULI_STACK, rho))


def density_of_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (IDENTITY + np.einsum("k,kij->ij", r, PAULI_STACK))


def check_bloch(r, tol: float = INPUT_TOL) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(-1)
    if r.shape != (3,):
        raise InvalidInputError("Bloch vector must have 3 components")
    _check_finite(r, "Bloch vector")
    if np.linalg.norm(r) > 1.0 + tol:
        raise InvalidInputError(f"unphysical Bloch vector, |r| = {np.linalg.norm(r):.12g} > 1")
    return r


def haar_bloch_samples(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniform points on the unit sphere, shape ``(n, 3)``.

    The Haar measure on pure qubit states is the uniform measure on the
    Bloch sphere. Uses ``z ~ U[-1, 1]`` and azimuth ``~ U[0, 2 pi)``
    (Archimedes), which is exact and rejection free.
    """
    z = rng.uniform(-1.0, 1.0, size=n)
    az = rng.uniform(0.0, 2.0 * np.pi, size=n)
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack((s * np.cos(az), s * np.sin(az), z))


def haar_bloch_sample(rng: np.random.Generator) -> np.ndarray:
    return haar_bloch_samples(rng, 1)[0]


def random_unitary(rng: np.random.Generator) -> UnitaryRotation:
    """Haar-random element of SU(2): a uniform point on the 3-sphere."""
    return UnitaryRotation.from_vector(rng.standard_normal(4))
