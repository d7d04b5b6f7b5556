"""Dense complex linear algebra on small Hilbert spaces.

Operators are square ``complex128`` numpy arrays and pure states are 1-d
``complex128`` arrays of unit norm. Joint spaces follow a single index
convention: ``joint_index = system_index * dim_apparatus + apparatus_index``,
which is what :func:`numpy.kron` produces when the system factor comes first.
"""

from __future__ import annotations

import numbers

import numpy as np

# Central tolerances.
STRUCTURE_TOL = 1e-12
UNITARY_TOL = 1e-10
SLACK_TOL = 1e-9

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

for _m in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z):
    _m.setflags(write=False)


class DimensionError(ValueError):
    """Operands live on Hilbert spaces of different dimension."""


class InvariantError(ValueError):
    """A value fails a structural invariant (hermiticity, unitarity, norm)."""


class NumericalIntegrityError(ArithmeticError):
    """A computed quantity is negative beyond rounding, signalling a bug."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_operator(entries, *, hermitian: bool = False, unitary: bool = False,
                name: str = "operator") -> np.ndarray:
    """Validate ``entries`` as a square complex matrix and return a read-only copy.

    Parameters
    ----------
    entries : array_like
        Square matrix.
    hermitian, unitary : bool
        Declared role; the matching invariant is enforced.
    name : str
        Used in error messages.
    """
    op = np.array(entries, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] == 0:
        raise InvariantError(f"{name} must be a non-empty square matrix, got shape {op.shape}")
    if hermitian:
        dev = max_abs(op - op.conj().T)
        if dev > STRUCTURE_TOL:
            raise InvariantError(f"{name} is not hermitian (deviation {dev:.3e})")
    if unitary:
        dev = max_abs(op @ op.conj().T - np.eye(op.shape[0]))
        if dev > UNITARY_TOL:
            raise InvariantError(f"{name} is not unitary (deviation {dev:.3e})")
    return _frozen(op)


def as_state(amplitudes, *, name: str = "state") -> np.ndarray:
    """Validate a pure state vector (unit norm within ``STRUCTURE_TOL``)."""
    psi = np.array(amplitudes, dtype=complex)
    if psi.ndim != 1 or psi.size == 0:
        raise InvariantError(f"{name} must be a non-empty vector, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > STRUCTURE_TOL:
        raise InvariantError(f"{name} is not normalized (norm {norm:.15g})")
    return _frozen(psi)


def max_abs(a) -> float:
    """Largest entry modulus, 0 for an empty array."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(op, tol: float = STRUCTURE_TOL) -> bool:
    return max_abs(op - np.conj(op).T) <= tol


def is_unitary(op, tol: float = UNITARY_TOL) -> bool:
    op = np.asarray(op)
    return max_abs(op @ op.conj().T - np.eye(op.shape[0])) <= tol


def _check_same_dim(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"{what}: dimensions {a.shape[0]} and {b.shape[0]} differ")


def tensor(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the first (system) factor."""
    return np.kron(np.asarray(a), np.asarray(b))


def adjoint(o) -> np.ndarray:
    return np.conj(np.asarray(o)).T


def commutator(a, b) -> np.ndarray:
    """``ab - ba``."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"commutator: shapes {a.shape} and {b.shape} differ")
    return a @ b - b @ a


def expectation(o, s) -> complex:
    """``<s|o|s>``."""
    o, s = np.asarray(o), np.asarray(s)
    _check_same_dim(o, s, "expectation")
    return complex(np.vdot(s, o @ s))


def variance(o, s) -> float:
    """``<o^2> - <o>^2`` for a hermitian ``o``.

    Values down to ``-STRUCTURE_TOL`` are treated as rounding and clamped to
    zero; anything more negative raises :class:`NumericalIntegrityError`.
    """
    o, s = np.asarray(o), np.asarray(s)
    _check_same_dim(o, s, "variance")
    os_ = o @ s
    mean = np.vdot(s, os_).real
    var = np.vdot(s, o @ os_).real - mean * mean
    if var < -STRUCTURE_TOL:
        raise NumericalIntegrityError(f"negative variance {var:.3e}")
    return max(var, 0.0)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, numbers.Integral):
        raise TypeError(f"seed must be an integer or numpy Generator, got {type(seed).__name__}")
    return np.random.default_rng(int(seed))


def _check_dim(dim) -> int:
    if not isinstance(dim, numbers.Integral) or dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim!r}")
    return int(dim)


def complex_gaussian(shape, seed) -> np.ndarray:
    """Independent standard complex Gaussians, ``E|z|^2 = 1``."""
    rng = _rng(seed)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_random_state(dim: int, seed) -> np.ndarray:
    """Haar-distributed pure state: a normalized complex Gaussian vector.

    ``seed`` is an integer or a :class:`numpy.random.Generator`; the same
    integer always yields the same state.
    """
    dim = _check_dim(dim)
    z = complex_gaussian(dim, seed)
    return _frozen(z / np.linalg.norm(z))


def random_unitary(dim: int, seed) -> np.ndarray:
    """Haar unitary from Gram-Schmidt (with one re-orthogonalization pass)
    applied to the columns of a complex Gaussian matrix."""
    dim = _check_dim(dim)
    g = complex_gaussian((dim, dim), seed)
    q = np.empty_like(g)
    for j in range(dim):
        v = g[:, j].copy()
        for _ in range(2):
            basis = q[:, :j]
            v -= basis @ (basis.conj().T @ v)
        q[:, j] = v / np.linalg.norm(v)
    return _frozen(q)


def random_hermitian(dim: int, seed) -> np.ndarray:
    """Gaussian hermitian matrix ``(G + G^dagger)/sqrt(2)``; every entry has unit variance."""
    dim = _check_dim(dim)
    g = complex_gaussian((dim, dim), seed)
    return _frozen((g + g.conj().T) / np.sqrt(2))


def spin(theta: float, phi: float) -> np.ndarray:
    """Spin observable ``n . sigma`` along the unit vector with spherical angles (theta, phi)."""
    c, s = np.cos(theta), np.sin(theta)
    off = s * np.exp(1j * phi)
    return _frozen(np.array([[c, np.conj(off)], [off, -c]], dtype=complex))


def bloch_state(theta: float, phi: float) -> np.ndarray:
    """``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``."""
    return _frozen(np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex))


def basis_state(dim: int, k: int) -> np.ndarray:
    dim = _check_dim(dim)
    if not 0 <= k < dim:
        raise ValueError(f"basis index {k} out of range for dim {dim}")
    e = np.zeros(dim, dtype=complex)
    e[k] = 1.0
    return _frozen(e)
