import csv
import logging
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from bellbound.config import settings
from bellbound.exceptions import CapacityError, DomainError
from bellbound.schemas.experiments import BoundsRow, StructureReport, SweepRow, beats_bound
from bellbound.schemas.quantum import QuantumModel, SeesawConfig
from bellbound.schemas.scenario import BellFunctional
from bellbound.services.classical_bounds import ClassicalBounds
from bellbound.services.executor import parallel_map
from bellbound.services.games import GameService
from bellbound.services.linalg import NOISE_STREAM, make_rng
from bellbound.services.ns_lp import NoSignalingBounds
from bellbound.services.quantum import QuantumService
from bellbound.services.seesaw import SeesawOptimizer

logger = logging.getLogger(__name__)

MAX_TABLE_D = 8
NEIGHBOR_OVERLAP_FLOOR = 0.02
CSV_DIGITS = 12

# log-spaced default noise grid; spans fidelities of roughly 0.9997 down to 0.9 at d=5
SIGMA_MIN = 5e-6
SIGMA_MAX = 2e-3
SIGMA_COUNT = 12


def default_sigma_grid(sigma_min: float = SIGMA_MIN, sigma_max: float = SIGMA_MAX,
                       count: int = SIGMA_COUNT, include_zero: bool = False) -> list[float]:
    if not 0 < sigma_min <= sigma_max or count < 1:
        raise DomainError(f"need 0 < sigma_min <= sigma_max and count >= 1, got {sigma_min}, {sigma_max}, {count}")
    grid = [float(s) for s in np.geomspace(sigma_min, sigma_max, count)]
    return [0.0] + grid if include_zero else grid


def _fmt(value: float) -> str:
    return f"{value:.{CSV_DIGITS}g}"


def run_sweep_trial(job: tuple[BellFunctional, int, float, int, SeesawConfig, int, float]) -> SweepRow:
    """Perturb the maximally entangled state once and optimize measurements on it."""
    functional, sigma_index, sigma, trial_seed, config, onebit, ns = job
    d = functional.scenario.o_a
    noisy = QuantumService.perturb_state(
        QuantumService.maximally_entangled_state(d), sigma, make_rng(trial_seed, NOISE_STREAM, sigma_index)
    )
    fidelity = min(max(QuantumService.fidelity(noisy, d), 0.0), 1.0)
    trial_config = config.model_copy(update={"rng_seed": trial_seed})
    # a trial may itself be running inside a Celery task, so its restarts never fan out again
    score, _ = SeesawOptimizer.seesaw_optimize(functional, noisy, trial_config, workers=1, executor="local")
    logger.info("sigma=%.4g seed=%d fidelity=%.6f score=%.8f", sigma, trial_seed, fidelity, score)
    return SweepRow(
        sigma=sigma,
        seed=trial_seed,
        fidelity=fidelity,
        best_score=score,
        beats_onebit=beats_bound(score, onebit),
        ns_bound=ns,
    )


class ExperimentService:
    """Reproduction drivers: bounds over d, noise robustness and structure reports."""

    @staticmethod
    def bounds_row(d: int, config: SeesawConfig, workers: Optional[int] = 1, quantum: bool = True) -> BoundsRow:
        game = GameService.make_truncated_xor_game(d)
        s_local = ClassicalBounds.local_bound(game).value
        s_onebit = ClassicalBounds.one_bit_bound(game, workers=workers).value
        s_ns = NoSignalingBounds.ns_bound(game)
        if s_ns.denominator != 1:
            raise DomainError(f"no-signaling bound {s_ns} of the XOR-{d} game is not an integer")
        s_quantum = None
        if quantum:
            s_quantum, _ = SeesawOptimizer.seesaw_optimize(
                game, QuantumService.maximally_entangled_state(d), config, workers=workers
            )
        logger.info("d=%d: local=%d one-bit=%d ns=%s quantum>=%s", d, s_local, s_onebit, s_ns, s_quantum)
        return BoundsRow(d=d, s_local=s_local, s_onebit=s_onebit, s_ns=int(s_ns), s_quantum_lower=s_quantum)

    @staticmethod
    def bounds_table(d_min: int, d_max: int, config: SeesawConfig, workers: Optional[int] = 1,
                     quantum: bool = True) -> list[BoundsRow]:
        if d_min < 2 or d_min > d_max:
            raise DomainError(f"need 2 <= d_min <= d_max, got {d_min}..{d_max}")
        if d_max > MAX_TABLE_D:
            raise CapacityError(f"bounds table stops at d={MAX_TABLE_D}; seesaw cost grows too fast beyond it")
        return [ExperimentService.bounds_row(d, config, workers, quantum) for d in range(d_min, d_max + 1)]

    @staticmethod
    def noise_sweep(d: int, sigma_grid: Sequence[float], trials_per_sigma: int, config: SeesawConfig,
                    workers: Optional[int] = 1) -> list[SweepRow]:
        """Rows ordered by (sigma, seed); trial t uses seed rng_seed + t at every noise level."""
        if d < 2:
            raise DomainError(f"noise sweep needs d >= 2, got {d}")
        if any(sigma < 0 for sigma in sigma_grid):
            raise DomainError("noise levels must be >= 0")
        if trials_per_sigma < 1:
            raise DomainError("need at least one trial per noise level")
        game = GameService.make_truncated_xor_game(d)
        onebit = ClassicalBounds.one_bit_bound(game).value
        ns = float(NoSignalingBounds.ns_bound(game))
        jobs = [
            (game, index, float(sigma), config.rng_seed + trial, config, onebit, ns)
            for index, sigma in enumerate(sigma_grid)
            for trial in range(trials_per_sigma)
        ]
        logger.info("Noise sweep d=%d: %d noise levels x %d trials", d, len(sigma_grid), trials_per_sigma)
        if settings.executor == "celery":
            from bellbound.tasks.seesaw_task import dispatch_sweep_trials

            rows = dispatch_sweep_trials(jobs)
        else:
            rows = parallel_map(run_sweep_trial, jobs, workers)
        return sorted(rows, key=lambda row: (row.sigma, row.seed))

    @staticmethod
    def violation_threshold(rows: Iterable[SweepRow], onebit_bound: float) -> tuple[Optional[float], Optional[float]]:
        """(smallest fidelity that still beats the bound, largest fidelity that does not)."""
        rows = list(rows)
        beating = [row.fidelity for row in rows if beats_bound(row.best_score, onebit_bound)]
        failing = [row.fidelity for row in rows if not beats_bound(row.best_score, onebit_bound)]
        return (min(beating) if beating else None, max(failing) if failing else None)

    @staticmethod
    def structure_report(model: QuantumModel, functional: BellFunctional) -> StructureReport:
        d = model.state.local_dim
        behavior = QuantumService.behavior_of_model(model)
        score = GameService.score(functional, behavior)
        onebit = ClassicalBounds.one_bit_bound(functional).value
        fit = QuantumService.fit_decomposition(behavior, functional)
        _, ns_residual = GameService.is_no_signaling(behavior)
        normalization = float(np.max(np.abs(behavior.array().sum(axis=(2, 3)) - 1.0)))

        overlaps = QuantumService.neighbor_overlaps(model.alice)
        spread = overlaps.max(axis=0) - overlaps.min(axis=0)
        reliable = overlaps.min(axis=0) >= NEIGHBOR_OVERLAP_FLOOR
        return StructureReport(
            d=d,
            score=score,
            onebit_bound=onebit,
            beats_onebit=beats_bound(score, onebit),
            mub_deviation=QuantumService.mub_deviation(model.bob),
            neighbor_overlap_spread=float(spread.max()),
            neighbor_overlap_floor=NEIGHBOR_OVERLAP_FLOOR,
            neighbor_overlap_spread_above_floor=float(spread[reliable].max()) if reliable.any() else 0.0,
            w=fit.w,
            residual_l2=fit.residual_l2,
            no_signaling_residual=ns_residual,
            normalization_residual=normalization,
        )

    @staticmethod
    def write_sweep_csv(rows: Iterable[SweepRow], stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["sigma", "seed", "fidelity", "score"])
        for row in rows:
            writer.writerow([_fmt(row.sigma), row.seed, _fmt(row.fidelity), _fmt(row.best_score)])

    @staticmethod
    def write_bounds_csv(rows: Iterable[BoundsRow], stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["d", "s_local", "s_onebit", "s_ns", "s_quantum_lower"])
        for row in rows:
            quantum = "" if row.s_quantum_lower is None else _fmt(row.s_quantum_lower)
            writer.writerow([row.d, row.s_local, row.s_onebit, row.s_ns, quantum])
