from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
BASIS_TOL = 1e-9


def complex_array(value: Any) -> np.ndarray:
    """Accept an ndarray, nested lists, or a {"real": ..., "imag": ...} mapping."""
    if isinstance(value, dict):
        return np.asarray(value["real"], dtype=float) + 1j * np.asarray(value["imag"], dtype=float)
    return np.asarray(value, dtype=complex)


def complex_payload(array: np.ndarray) -> dict:
    return {"real": np.real(array).tolist(), "imag": np.imag(array).tolist()}


class QuantumState(BaseModel):
    local_dim: int = Field(..., ge=1)
    density: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @field_validator("density", mode="before")
    @classmethod
    def _to_array(cls, value: Any) -> np.ndarray:
        return complex_array(value)

    @model_validator(mode="after")
    def _check_density(self) -> "QuantumState":
        size = self.local_dim ** 2
        rho = self.density
        if rho.shape != (size, size):
            raise ValueError(f"density must be {size}x{size} for local dimension {self.local_dim}")
        if not np.all(np.isfinite(rho)):
            raise ValueError("density has non-finite entries")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density is not Hermitian")
        if abs(np.trace(rho) - 1.0) > TRACE_TOL:
            raise ValueError(f"density trace {np.trace(rho).real:.12f} differs from 1")
        if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
            raise ValueError("density has negative eigenvalues")
        return self

    @field_serializer("density")
    def _dump_density(self, density: np.ndarray) -> dict:
        return complex_payload(density)

    def tensor(self) -> np.ndarray:
        """rho[i, k, j, l] = <i k| rho |j l> with i, j on Alice's side."""
        d = self.local_dim
        return self.density.reshape(d, d, d, d)


class MeasurementSet(BaseModel):
    """Rank-1 projective measurements: bases[x][:, a] is the vector for output a of input x."""

    bases: tuple[np.ndarray, ...]

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @field_validator("bases", mode="before")
    @classmethod
    def _to_arrays(cls, value: Any) -> tuple:
        arrays = []
        for basis in value:
            if isinstance(basis, (list, tuple)) and basis and isinstance(basis[0], dict):
                # serialized form: one {"real", "imag"} vector per output
                arrays.append(np.stack([complex_array(vector) for vector in basis], axis=1))
            else:
                arrays.append(complex_array(basis))
        return tuple(arrays)

    @field_validator("bases")
    @classmethod
    def _check_orthonormal(cls, bases: tuple) -> tuple:
        if not bases:
            raise ValueError("a measurement set needs at least one input")
        dim = bases[0].shape[0]
        for x, basis in enumerate(bases):
            if basis.ndim != 2 or basis.shape != (dim, dim):
                raise ValueError(f"input {x}: basis must be a square {dim}x{dim} array")
            gram = basis.conj().T @ basis
            if np.max(np.abs(gram - np.eye(dim))) > BASIS_TOL:
                raise ValueError(f"input {x}: basis vectors are not orthonormal")
        return bases

    @field_serializer("bases")
    def _dump_bases(self, bases: tuple) -> list:
        return [[complex_payload(basis[:, a]) for a in range(basis.shape[1])] for basis in bases]

    @property
    def inputs(self) -> int:
        return len(self.bases)

    @property
    def dim(self) -> int:
        return self.bases[0].shape[0]

    def vector(self, x: int, a: int) -> np.ndarray:
        return self.bases[x][:, a]

    def projectors(self, x: int) -> list[np.ndarray]:
        basis = self.bases[x]
        return [np.outer(basis[:, a], basis[:, a].conj()) for a in range(basis.shape[1])]


class QuantumModel(BaseModel):
    state: QuantumState
    alice: MeasurementSet
    bob: MeasurementSet

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_dimensions(self) -> "QuantumModel":
        d = self.state.local_dim
        if self.alice.dim != d or self.bob.dim != d:
            raise ValueError(f"measurements act on dimension {self.alice.dim}/{self.bob.dim}, state on {d}")
        return self


class SeesawConfig(BaseModel):
    restarts: int = Field(50, ge=1)
    sweeps_max: int = Field(500, ge=1)
    improvement_tol: float = Field(1e-9, gt=0)
    rng_seed: int = Field(0, ge=0, lt=2**64)


class DecompositionFit(BaseModel):
    w: float = Field(..., ge=0.0, le=1.0)
    residual_l2: float = Field(..., ge=0.0)
