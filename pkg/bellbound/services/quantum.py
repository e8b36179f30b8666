import logging
from typing import Optional

import numpy as np

from bellbound.exceptions import DomainError, ShapeError
from bellbound.schemas.quantum import DecompositionFit, MeasurementSet, QuantumModel, QuantumState
from bellbound.schemas.scenario import Behavior, BellFunctional, Scenario
from bellbound.services.games import GameService
from bellbound.services.linalg import Seed, as_rng, hermitian_eig

logger = logging.getLogger(__name__)


class QuantumService:
    """States, Born-rule behaviors and the structural checks on optimized measurements."""

    @staticmethod
    def maximally_entangled_vector(d: int) -> np.ndarray:
        psi = np.zeros(d * d, dtype=complex)
        psi[[i * d + i for i in range(d)]] = 1.0 / np.sqrt(d)
        return psi

    @staticmethod
    def maximally_entangled_state(d: int) -> QuantumState:
        """|Psi> = sum_i |ii> / sqrt(d), as a density matrix."""
        if d < 2:
            raise DomainError(f"maximally entangled state needs d >= 2, got {d}")
        psi = QuantumService.maximally_entangled_vector(d)
        return QuantumState(local_dim=d, density=np.outer(psi, psi.conj()))

    @staticmethod
    def computational_basis(d: int) -> np.ndarray:
        return np.eye(d, dtype=complex)

    @staticmethod
    def fourier_basis(d: int) -> np.ndarray:
        """Columns e^{2 pi i j k / d} / sqrt(d); unbiased with respect to the computational basis."""
        j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
        return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)

    @staticmethod
    def scenario_of(model: QuantumModel) -> Scenario:
        d = model.state.local_dim
        return Scenario(m_a=model.alice.inputs, m_b=model.bob.inputs, o_a=d, o_b=d)

    @staticmethod
    def behavior_array(state: QuantumState, alice: np.ndarray, bob: np.ndarray) -> np.ndarray:
        """p[x, y, a, b] = <a_x^a b_y^b| rho |a_x^a b_y^b> for stacked bases alice[x], bob[y]."""
        p = np.einsum(
            "xia,ykb,ikjl,xja,ylb->xyab",
            alice.conj(), bob.conj(), state.tensor(), alice, bob,
            optimize=True,
        )
        return np.clip(p.real, 0.0, 1.0)

    @staticmethod
    def behavior_of_model(model: QuantumModel) -> Behavior:
        """Born rule p(a,b|x,y) = Tr[rho (A_a^x (x) B_b^y)]."""
        p = QuantumService.behavior_array(model.state, np.stack(model.alice.bases), np.stack(model.bob.bases))
        return Behavior.from_array(QuantumService.scenario_of(model), p)

    @staticmethod
    def score_model(functional: BellFunctional, model: QuantumModel) -> float:
        return GameService.score(functional, QuantumService.behavior_of_model(model))

    @staticmethod
    def mub_deviation(bob: MeasurementSet) -> float:
        """Largest |d |<b_i^0|b_j^1>|^2 - 1| over output pairs; 0 for mutually unbiased bases."""
        if bob.inputs != 2:
            raise DomainError(f"MUB check needs exactly two inputs, got {bob.inputs}")
        d = bob.dim
        overlaps = np.abs(bob.bases[0].conj().T @ bob.bases[1]) ** 2
        return float(np.max(np.abs(overlaps - 1.0 / d)) * d)

    @staticmethod
    def neighbor_overlaps(alice: MeasurementSet) -> np.ndarray:
        """o[i, j, k] = |<a_j^i | a_k^{(i+1) mod m}>|^2 for every neighboring input pair i."""
        m = alice.inputs
        return np.stack([
            np.abs(alice.bases[i].conj().T @ alice.bases[(i + 1) % m]) ** 2 for i in range(m)
        ])

    @staticmethod
    def neighbor_overlap_spread(alice: MeasurementSet) -> float:
        overlaps = QuantumService.neighbor_overlaps(alice)
        return float(np.max(overlaps.max(axis=0) - overlaps.min(axis=0)))

    @staticmethod
    def fit_decomposition(behavior: Behavior, functional: BellFunctional) -> DecompositionFit:
        """Least-squares w in P ~ w P_NS + (1 - w) U, with P_NS = V / d and U white noise."""
        if behavior.scenario != functional.scenario:
            raise ShapeError("behavior and functional belong to different scenarios")
        noise = GameService.white_noise_behavior(functional.scenario).array().reshape(-1)
        target = GameService.ns_behavior_from_functional(functional).array().reshape(-1)
        p = behavior.array().reshape(-1)
        direction = target - noise
        w = float(np.dot(p - noise, direction) / np.dot(direction, direction))
        w = min(max(w, 0.0), 1.0)
        residual = float(np.linalg.norm(p - w * target - (1.0 - w) * noise))
        return DecompositionFit(w=w, residual_l2=residual)

    @staticmethod
    def fidelity(rho: QuantumState, d: Optional[int] = None) -> float:
        """F = <Psi| rho |Psi> against the maximally entangled state."""
        d = rho.local_dim if d is None else d
        if rho.local_dim != d:
            raise DomainError(f"state has local dimension {rho.local_dim}, expected {d}")
        psi = QuantumService.maximally_entangled_vector(d)
        return float(np.real(psi.conj() @ rho.density @ psi))

    @staticmethod
    def perturb_state(rho: QuantumState, sigma: float, seed: Seed) -> QuantumState:
        """Add complex Gaussian noise to every entry, then project back onto density matrices.

        The noisy matrix is Hermitized, its negative eigenvalues are clipped to
        zero and the trace is renormalized to one.
        """
        if sigma < 0:
            raise DomainError(f"noise level must be >= 0, got {sigma}")
        rng = as_rng(seed)
        size = rho.density.shape[0]
        noise = sigma * (rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size)))
        noisy = rho.density + noise
        noisy = (noisy + noisy.conj().T) / 2
        eigenvalues, eigenvectors = hermitian_eig(noisy)
        eigenvalues = np.clip(eigenvalues, 0.0, None)
        repaired = (eigenvectors * eigenvalues) @ eigenvectors.conj().T
        repaired = (repaired + repaired.conj().T) / 2
        repaired /= np.trace(repaired).real
        return QuantumState(local_dim=rho.local_dim, density=repaired)

    @staticmethod
    def basis_model(state: QuantumState, m_a: int, m_b: int,
                    alice_basis: Optional[np.ndarray] = None,
                    bob_basis: Optional[np.ndarray] = None) -> QuantumModel:
        """Every input of a party measured in the same basis (computational by default)."""
        d = state.local_dim
        alice_basis = QuantumService.computational_basis(d) if alice_basis is None else alice_basis
        bob_basis = QuantumService.computational_basis(d) if bob_basis is None else bob_basis
        return QuantumModel(
            state=state,
            alice=MeasurementSet(bases=tuple(alice_basis.copy() for _ in range(m_a))),
            bob=MeasurementSet(bases=tuple(bob_basis.copy() for _ in range(m_b))),
        )
