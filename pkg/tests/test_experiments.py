import io

import numpy as np
import pytest
from pydantic import ValidationError

from bellbound.config import settings
from bellbound.exceptions import CapacityError, DomainError
from bellbound.schemas.experiments import BoundsRow, SweepRow, beats_bound
from bellbound.schemas.quantum import SeesawConfig
from bellbound.services.experiments import ExperimentService, default_sigma_grid
from bellbound.services.games import GameService
from bellbound.services.quantum import QuantumService
from bellbound.services.seesaw import SeesawOptimizer

SWEEP_CONFIG = SeesawConfig(restarts=2, sweeps_max=40, rng_seed=5)


class TestRows:
    def test_bounds_row_sandwich(self):
        with pytest.raises(ValidationError):
            BoundsRow(d=3, s_local=5, s_onebit=4, s_ns=6)
        with pytest.raises(ValidationError):
            BoundsRow(d=3, s_local=4, s_onebit=5, s_ns=6, s_quantum_lower=6.1)

    def test_quantum_gap(self):
        assert BoundsRow(d=5, s_local=6, s_onebit=7, s_ns=10, s_quantum_lower=7.25).quantum_gap == pytest.approx(0.25)
        assert BoundsRow(d=5, s_local=6, s_onebit=7, s_ns=10).quantum_gap is None

    def test_sweep_row_fidelity_range(self):
        with pytest.raises(ValidationError):
            SweepRow(sigma=0.01, seed=0, fidelity=1.2, best_score=3.0)

    def test_sweep_row_score_capped_by_ns_bound(self):
        assert SweepRow(sigma=0.0, seed=0, fidelity=1.0, best_score=10 + 1e-7, ns_bound=10).best_score > 10
        with pytest.raises(ValidationError):
            SweepRow(sigma=0.0, seed=0, fidelity=1.0, best_score=10.01, ns_bound=10)

    def test_violation_needs_clear_margin(self):
        assert beats_bound(7.1, 7)
        assert not beats_bound(7 + 1e-9, 7)


class TestBoundsTable:
    def test_exact_columns(self):
        rows = ExperimentService.bounds_table(2, 4, SWEEP_CONFIG, quantum=False)
        assert [(r.d, r.s_local, r.s_onebit, r.s_ns) for r in rows] == [(2, 3, 4, 4), (3, 4, 5, 6), (4, 5, 6, 8)]
        assert all(r.s_quantum_lower is None for r in rows)

    def test_d2_row_has_no_violation(self):
        (row,) = ExperimentService.bounds_table(2, 2, SeesawConfig(restarts=3, sweeps_max=100, rng_seed=1))
        assert row.s_quantum_lower <= row.s_onebit + 1e-6

    def test_range_checked(self):
        with pytest.raises(DomainError):
            ExperimentService.bounds_table(4, 3, SWEEP_CONFIG)
        with pytest.raises(DomainError):
            ExperimentService.bounds_table(1, 3, SWEEP_CONFIG)
        with pytest.raises(CapacityError):
            ExperimentService.bounds_table(2, 9, SWEEP_CONFIG)

    def test_csv(self):
        rows = [BoundsRow(d=5, s_local=6, s_onebit=7, s_ns=10, s_quantum_lower=7.177712345678912)]
        stream = io.StringIO()
        ExperimentService.write_bounds_csv(rows, stream)
        assert stream.getvalue() == "d,s_local,s_onebit,s_ns,s_quantum_lower\n5,6,7,10,7.17771234568\n"

    @pytest.mark.slow
    def test_general_law_up_to_8(self):
        rows = ExperimentService.bounds_table(2, 8, SWEEP_CONFIG, workers=settings.threads, quantum=False)
        assert [(r.s_local, r.s_onebit, r.s_ns) for r in rows] == [(d + 1, d + 2, 2 * d) for d in range(2, 9)]

    @pytest.mark.slow
    def test_headline_rows(self):
        rows = ExperimentService.bounds_table(5, 6, SeesawConfig(restarts=50, rng_seed=0), workers=settings.threads)
        assert (rows[0].s_local, rows[0].s_onebit, rows[0].s_ns) == (6, 7, 10)
        assert rows[0].s_quantum_lower >= 7.17
        assert (rows[1].s_local, rows[1].s_onebit, rows[1].s_ns) == (7, 8, 12)
        assert rows[1].s_quantum_lower >= 8.31


class TestNoiseSweep:
    def test_default_grid(self):
        grid = default_sigma_grid()
        assert len(grid) == 12
        assert grid == sorted(grid)
        assert default_sigma_grid(1e-3, 1e-2, 3, include_zero=True)[0] == 0.0
        with pytest.raises(DomainError):
            default_sigma_grid(0.0, 1e-2, 3)

    def test_rows_ordered_and_bounded(self):
        rows = ExperimentService.noise_sweep(2, [0.02, 0.0], 2, SWEEP_CONFIG)
        assert [(row.sigma, row.seed) for row in rows] == [(0.0, 5), (0.0, 6), (0.02, 5), (0.02, 6)]
        assert all(0.0 <= row.fidelity <= 1.0 for row in rows)
        assert all(row.best_score <= 4 + 1e-6 for row in rows)
        assert all(row.ns_bound == 4 for row in rows)
        assert rows[0].fidelity == pytest.approx(1.0)
        assert not any(row.beats_onebit for row in rows)

    def test_same_seed_same_csv(self):
        outputs = []
        for _ in range(2):
            stream = io.StringIO()
            ExperimentService.write_sweep_csv(ExperimentService.noise_sweep(2, [0.01], 2, SWEEP_CONFIG), stream)
            outputs.append(stream.getvalue())
        assert outputs[0] == outputs[1]
        assert outputs[0].splitlines()[0] == "sigma,seed,fidelity,score"

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            ExperimentService.noise_sweep(1, [0.01], 1, SWEEP_CONFIG)
        with pytest.raises(DomainError):
            ExperimentService.noise_sweep(2, [-0.01], 1, SWEEP_CONFIG)
        with pytest.raises(DomainError):
            ExperimentService.noise_sweep(2, [0.01], 0, SWEEP_CONFIG)

    def test_violation_threshold(self):
        rows = [
            SweepRow(sigma=0.001, seed=0, fidelity=0.99, best_score=7.15),
            SweepRow(sigma=0.002, seed=0, fidelity=0.975, best_score=7.02),
            SweepRow(sigma=0.004, seed=0, fidelity=0.96, best_score=6.9),
            SweepRow(sigma=0.004, seed=1, fidelity=0.965, best_score=6.95),
        ]
        assert ExperimentService.violation_threshold(rows, 7) == (0.975, 0.965)
        assert ExperimentService.violation_threshold(rows[:1], 7) == (0.99, None)

    @pytest.mark.slow
    def test_d5_sweep_reproduces_threshold(self):
        config = SeesawConfig(restarts=settings.sweep_restarts, rng_seed=0)
        rows = ExperimentService.noise_sweep(5, default_sigma_grid(include_zero=True), 10, config,
                                             workers=settings.threads)
        assert all(row.best_score <= 7.1788 + 1e-3 for row in rows)
        clean = [row for row in rows if row.sigma == 0.0]
        assert all(row.fidelity == pytest.approx(1.0) and row.best_score >= 7.17 for row in clean)
        least_noisy = min(row.sigma for row in rows if row.sigma > 0)
        assert all(row.fidelity > 0.999 for row in rows if row.sigma == least_noisy)
        lowest_beating, _ = ExperimentService.violation_threshold(rows, 7)
        assert 0.955 <= lowest_beating <= 0.985

        sigmas = sorted({row.sigma for row in rows})
        best = [max(row.best_score for row in rows if row.sigma == s) for s in sigmas]
        assert np.polyfit(np.log10(np.array(sigmas[1:])), best[1:], 1)[0] < 0


class TestStructureReport:
    def test_computational_dummy(self, xor5):
        model = QuantumService.basis_model(QuantumService.maximally_entangled_state(5), 5, 2)
        report = ExperimentService.structure_report(model, xor5)
        assert report.score == pytest.approx(6.0)
        assert report.onebit_bound == 7
        assert not report.beats_onebit
        assert report.mub_deviation == pytest.approx(4)
        assert report.neighbor_overlap_spread == 0
        assert report.no_signaling_residual == pytest.approx(0, abs=1e-12)
        assert report.normalization_residual < 1e-12
        assert report.w == pytest.approx(0.5)
        assert report.residual_l2 > 0.3

    def test_white_noise_dummy(self, xor5):
        model = QuantumService.basis_model(
            QuantumService.maximally_entangled_state(5), 5, 2, bob_basis=QuantumService.fourier_basis(5)
        )
        report = ExperimentService.structure_report(model, xor5)
        assert report.score == pytest.approx(2.0)
        assert report.w == pytest.approx(0, abs=1e-9)

    def test_serializes(self, xor2, quick_config):
        _, model = SeesawOptimizer.seesaw_optimize(xor2, QuantumService.maximally_entangled_state(2), quick_config)
        report = ExperimentService.structure_report(model, xor2)
        assert set(report.model_dump()) >= {"w", "residual_l2", "mub_deviation", "neighbor_overlap_spread", "score"}
        assert report.onebit_bound == 4

    @pytest.mark.slow
    def test_optimized_d5_structure(self, xor5):
        _, model = SeesawOptimizer.seesaw_optimize(
            xor5, QuantumService.maximally_entangled_state(5), SeesawConfig(restarts=50, rng_seed=0),
            workers=settings.threads,
        )
        report = ExperimentService.structure_report(model, xor5)
        assert report.beats_onebit
        assert report.mub_deviation <= 0.10
        assert report.neighbor_overlap_spread_above_floor <= 0.10
        assert report.w == pytest.approx(0.64, abs=0.05)
