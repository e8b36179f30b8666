import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from bellbound.config import settings
from bellbound.exceptions import DomainError
from bellbound.schemas.quantum import MeasurementSet, QuantumModel, QuantumState, SeesawConfig
from bellbound.schemas.scenario import BellFunctional
from bellbound.services.executor import argmax_first, parallel_map
from bellbound.services.linalg import RESTART_STREAM, givens_rotate, make_rng, orthonormalize, random_unitary
from bellbound.services.quantum import QuantumService

logger = logging.getLogger(__name__)

GOLDEN_ITERATIONS = 64
COARSE_GRID = 8
INVERSE_PHI = (math.sqrt(5) - 1) / 2


@dataclass
class RestartOutcome:
    restart: int
    score: float
    alice: list[np.ndarray]
    bob: list[np.ndarray]
    trace: list[float] = field(default_factory=list)
    sweeps: int = 0


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       iterations: int = GOLDEN_ITERATIONS, grid: int = COARSE_GRID) -> tuple[float, float]:
    """Maximize a 1-D function: coarse grid to pick a bracket, then golden-section refinement."""
    step = (hi - lo) / grid
    samples = [lo + k * step for k in range(grid + 1)]
    values = [f(t) for t in samples]
    best = argmax_first(values)
    a, b = max(lo, samples[best] - step), min(hi, samples[best] + step)

    c = b - INVERSE_PHI * (b - a)
    e = a + INVERSE_PHI * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(iterations):
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - INVERSE_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + INVERSE_PHI * (b - a)
            fe = f(e)
    candidates = [(values[best], samples[best]), (fc, c), (fe, e)]
    value, argument = max(candidates, key=lambda item: item[0])
    return argument, value


def effective_operators(functional: BellFunctional, state: QuantumState,
                        other: np.ndarray, side: str) -> np.ndarray:
    """K[x, a] such that the score equals sum_{x,a} <v_x^a| K[x, a] |v_x^a> for the optimized party.

    `other` stacks the fixed party's bases; `side` names the party being optimized.
    """
    V = functional.float_tensor()
    rho = state.tensor()
    if side == "alice":
        # partial trace over Bob for every (y, b)
        reduced = np.einsum("ykb,ikjl,ylb->ybij", other.conj(), rho, other, optimize=True)
        return np.einsum("xyab,ybij->xaij", V, reduced, optimize=True)
    if side == "bob":
        reduced = np.einsum("xia,ikjl,xja->xakl", other.conj(), rho, other, optimize=True)
        return np.einsum("xyab,xakl->ybkl", V, reduced, optimize=True)
    raise DomainError(f"unknown party {side!r}")


def _ascend_party(bases: list[np.ndarray], operators: np.ndarray) -> tuple[float, int]:
    """One pass of two-level rotations over every input of one party.

    Only strictly improving rotations are applied; returns (total gain, accepted rotations).
    """
    gain_total = 0.0
    accepted = 0
    outputs = bases[0].shape[1]
    for x, basis in enumerate(bases):
        ops = operators[x]
        for i in range(outputs):
            for j in range(i + 1, outputs):
                u, v = basis[:, i], basis[:, j]
                k_i, k_j = ops[i], ops[j]
                # the pair's share of the score is c^2 alpha + s^2 beta + 2 c s Re(e^{i phi} cross)
                alpha = float(np.real(u.conj() @ k_i @ u + v.conj() @ k_j @ v))
                beta = float(np.real(v.conj() @ k_i @ v + u.conj() @ k_j @ u))
                cross = complex(u.conj() @ (k_i - k_j) @ v)

                phi, _ = golden_section_max(lambda t: (cmath.exp(1j * t) * cross).real, -math.pi, math.pi)
                coupling = (cmath.exp(1j * phi) * cross).real

                def rotated(theta: float) -> float:
                    c, s = math.cos(theta), math.sin(theta)
                    return c * c * alpha + s * s * beta + 2.0 * c * s * coupling

                theta, value = golden_section_max(rotated, -math.pi / 2, math.pi / 2)
                gain = value - alpha
                if gain > 0.0:
                    basis = givens_rotate(basis, i, j, theta, phi)
                    gain_total += gain
                    accepted += 1
        bases[x] = basis
    return gain_total, accepted


def run_restart(functional: BellFunctional, state: QuantumState, config: SeesawConfig, restart: int) -> RestartOutcome:
    """One coordinate-ascent run from Haar-random bases seeded by (rng_seed, restart)."""
    scenario = functional.scenario
    d = state.local_dim
    rng = make_rng(config.rng_seed, RESTART_STREAM, restart)
    alice = [random_unitary(d, rng) for _ in range(scenario.m_a)]
    bob = [random_unitary(d, rng) for _ in range(scenario.m_b)]
    V = functional.float_tensor()

    def born_score() -> float:
        p = QuantumService.behavior_array(state, np.stack(alice), np.stack(bob))
        return float(np.sum(V * p))

    score = born_score()
    trace = [score]
    accepted = 0
    sweeps = 0
    for sweeps in range(1, config.sweeps_max + 1):
        _, alice_steps = _ascend_party(alice, effective_operators(functional, state, np.stack(bob), "alice"))
        _, bob_steps = _ascend_party(bob, effective_operators(functional, state, np.stack(alice), "bob"))
        accepted += alice_steps + bob_steps
        alice = [orthonormalize(basis) for basis in alice]
        bob = [orthonormalize(basis) for basis in bob]
        updated = born_score()
        trace.append(updated)
        improvement = updated - score
        score = updated
        if improvement < config.improvement_tol:
            break

    logger.debug("Restart %d finished at %.10f after %d sweeps (%d rotations)", restart, score, sweeps, accepted)
    return RestartOutcome(restart=restart, score=score, alice=alice, bob=bob, trace=trace, sweeps=sweeps)


def _restart_job(job: tuple[BellFunctional, QuantumState, SeesawConfig, int]) -> RestartOutcome:
    return run_restart(*job)


class SeesawOptimizer:
    """Measurement optimization on a fixed state; every restart is independent and seeded."""

    @staticmethod
    def _check_inputs(functional: BellFunctional, state: QuantumState, config: SeesawConfig) -> None:
        scenario = functional.scenario
        if scenario.o_a != state.local_dim or scenario.o_b != state.local_dim:
            raise DomainError(
                f"scenario {scenario} needs {scenario.o_a}/{scenario.o_b} outputs to match local dimension {state.local_dim}"
            )
        if config.restarts < 1 or config.sweeps_max < 1 or not config.improvement_tol > 0:
            raise DomainError("seesaw config needs restarts >= 1, sweeps_max >= 1 and improvement_tol > 0")

    @staticmethod
    def run_restarts(functional: BellFunctional, state: QuantumState, config: SeesawConfig,
                     workers: Optional[int] = 1, executor: Optional[str] = None) -> list[RestartOutcome]:
        """All restarts in restart order; `executor` overrides settings.executor for this call."""
        SeesawOptimizer._check_inputs(functional, state, config)
        if (executor or settings.executor) == "celery":
            from bellbound.tasks.seesaw_task import dispatch_restarts

            return dispatch_restarts(functional, state, config)
        jobs = [(functional, state, config, k) for k in range(config.restarts)]
        return parallel_map(_restart_job, jobs, workers)

    @staticmethod
    def seesaw_optimize(functional: BellFunctional, state: QuantumState, config: SeesawConfig,
                        workers: Optional[int] = 1, executor: Optional[str] = None) -> tuple[float, QuantumModel]:
        """Best (score, model) over restarts; lowest restart index wins ties."""
        outcomes = SeesawOptimizer.run_restarts(functional, state, config, workers, executor)
        best = outcomes[argmax_first([outcome.score for outcome in outcomes])]
        logger.info(
            "Seesaw on %s: best score %.10f from restart %d of %d",
            functional.scenario, best.score, best.restart, len(outcomes),
        )
        model = QuantumModel(
            state=state,
            alice=MeasurementSet(bases=tuple(best.alice)),
            bob=MeasurementSet(bases=tuple(best.bob)),
        )
        return best.score, model
