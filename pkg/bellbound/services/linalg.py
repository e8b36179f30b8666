from typing import Union

import numpy as np
from scipy.linalg import qr

from bellbound.exceptions import DomainError

HERMITIAN_INPUT_TOL = 1e-10

Seed = Union[int, np.random.Generator]

RESTART_STREAM = 0
NOISE_STREAM = 1


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by `seed` and the spawn key `stream`.

    Each stream is reproducible on its own, whatever order streams are consumed in.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=stream)))


def as_rng(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else make_rng(seed)


def hermitian_eig(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns of a Hermitian matrix."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {matrix.shape}")
    if matrix.size and np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_INPUT_TOL:
        raise DomainError("matrix is not Hermitian")
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    return eigenvalues, eigenvectors


def _fix_phases(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    diagonal = np.diag(r)
    magnitude = np.abs(diagonal)
    phases = np.where(magnitude > 0, diagonal / np.where(magnitude > 0, magnitude, 1), 1)
    return q * phases


def random_unitary(d: int, seed: Seed) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with the diagonal phases of R divided out."""
    if d < 1:
        raise DomainError(f"unitary dimension must be >= 1, got {d}")
    rng = as_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = qr(z)
    return _fix_phases(q, r)


def orthonormalize(basis: np.ndarray) -> np.ndarray:
    """Re-orthonormalize columns by QR, keeping each column close to its input."""
    q, r = qr(basis)
    return _fix_phases(q, r)


def givens_rotate(basis: np.ndarray, i: int, j: int, theta: float, phi: float) -> np.ndarray:
    """Rotate columns i and j by the two-level unitary [[c, -e^{-i phi} s], [e^{i phi} s, c]]."""
    c, s = np.cos(theta), np.sin(theta)
    u, v = basis[:, i], basis[:, j]
    rotated = basis.copy()
    rotated[:, i] = c * u + np.exp(1j * phi) * s * v
    rotated[:, j] = -np.exp(-1j * phi) * s * u + c * v
    return rotated


def unitarity_residual(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[1]))))
