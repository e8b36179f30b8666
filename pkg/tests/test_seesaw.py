import math

import numpy as np
import pytest

from bellbound.config import settings
from bellbound.exceptions import DomainError
from bellbound.schemas.quantum import SeesawConfig
from bellbound.services.games import GameService
from bellbound.services.linalg import random_unitary, unitarity_residual
from bellbound.services.quantum import QuantumService
from bellbound.services.seesaw import SeesawOptimizer, effective_operators, golden_section_max, run_restart

TSIRELSON_SCORE = 2 + math.sqrt(2)


def test_golden_section_finds_interior_maximum():
    argument, value = golden_section_max(lambda t: -(t - 0.3) ** 2 + 1, -2.0, 2.0)
    assert argument == pytest.approx(0.3, abs=1e-6)
    assert value == pytest.approx(1.0)


def test_golden_section_handles_multimodal_cosine():
    argument, value = golden_section_max(lambda t: math.cos(t - 2.5), -math.pi, math.pi)
    assert value == pytest.approx(1.0, abs=1e-12)
    assert argument == pytest.approx(2.5, abs=1e-6)


@pytest.mark.parametrize("side", ["alice", "bob"])
def test_effective_operators_reproduce_score(xor3, side):
    state = QuantumService.maximally_entangled_state(3)
    alice = np.stack([random_unitary(3, s) for s in range(3)])
    bob = np.stack([random_unitary(3, s) for s in range(5, 7)])
    born = float(np.sum(xor3.float_tensor() * QuantumService.behavior_array(state, alice, bob)))

    optimized, fixed = (alice, bob) if side == "alice" else (bob, alice)
    operators = effective_operators(xor3, state, fixed, side)
    decomposed = sum(
        np.real(optimized[x][:, a].conj() @ operators[x, a] @ optimized[x][:, a])
        for x in range(optimized.shape[0])
        for a in range(3)
    )
    assert decomposed == pytest.approx(born, abs=1e-10)


def test_unknown_side():
    game = GameService.make_truncated_xor_game(2)
    with pytest.raises(DomainError):
        effective_operators(game, QuantumService.maximally_entangled_state(2), np.stack([np.eye(2)] * 2), "eve")


class TestRestart:
    def test_scores_never_decrease(self, xor3):
        config = SeesawConfig(restarts=1, sweeps_max=40, rng_seed=3)
        outcome = run_restart(xor3, QuantumService.maximally_entangled_state(3), config, restart=0)
        assert all(later >= earlier - 1e-12 for earlier, later in zip(outcome.trace, outcome.trace[1:]))
        assert outcome.score == outcome.trace[-1]
        assert all(unitarity_residual(basis) < 1e-9 for basis in outcome.alice + outcome.bob)

    def test_reproducible(self, xor3):
        config = SeesawConfig(restarts=1, sweeps_max=20, rng_seed=11)
        state = QuantumService.maximally_entangled_state(3)
        first = run_restart(xor3, state, config, restart=2)
        second = run_restart(xor3, state, config, restart=2)
        assert first.score == second.score
        assert all(np.array_equal(a, b) for a, b in zip(first.alice, second.alice))


class TestSeesawOptimize:
    def test_chsh_reaches_tsirelson(self, xor2, quick_config):
        score, model = SeesawOptimizer.seesaw_optimize(xor2, QuantumService.maximally_entangled_state(2), quick_config)
        assert score == pytest.approx(TSIRELSON_SCORE, abs=1e-5)
        assert QuantumService.score_model(xor2, model) == pytest.approx(score, abs=1e-9)

    def test_zero_functional(self, xor2, quick_config):
        zero = GameService.zero_functional(xor2.scenario)
        score, _ = SeesawOptimizer.seesaw_optimize(zero, QuantumService.maximally_entangled_state(2), quick_config)
        assert score == 0

    def test_never_exceeds_ns_bound(self, xor3, quick_config):
        score, _ = SeesawOptimizer.seesaw_optimize(xor3, QuantumService.maximally_entangled_state(3), quick_config)
        assert 3 <= score <= 6 + 1e-6

    def test_independent_of_worker_count(self, xor2, quick_config):
        state = QuantumService.maximally_entangled_state(2)
        serial, _ = SeesawOptimizer.seesaw_optimize(xor2, state, quick_config, workers=1)
        pooled, _ = SeesawOptimizer.seesaw_optimize(xor2, state, quick_config, workers=2)
        assert serial == pooled

    def test_dimension_mismatch(self, xor3, quick_config):
        with pytest.raises(DomainError):
            SeesawOptimizer.seesaw_optimize(xor3, QuantumService.maximally_entangled_state(2), quick_config)

    def test_model_round_trips(self, xor2, quick_config):
        _, model = SeesawOptimizer.seesaw_optimize(xor2, QuantumService.maximally_entangled_state(2), quick_config)
        restored = type(model).model_validate_json(model.model_dump_json())
        assert QuantumService.score_model(xor2, restored) == QuantumService.score_model(xor2, model)


@pytest.mark.slow
class TestHeadlineScores:
    def test_d5_beats_one_bit_bound(self, xor5):
        state = QuantumService.maximally_entangled_state(5)
        config = SeesawConfig(restarts=50, rng_seed=0)
        score, _ = SeesawOptimizer.seesaw_optimize(xor5, state, config, workers=settings.threads)
        assert 7.17 <= score <= 7.1788 + 1e-3

    def test_d6_beats_one_bit_bound(self, xor6):
        state = QuantumService.maximally_entangled_state(6)
        config = SeesawConfig(restarts=50, rng_seed=0)
        score, _ = SeesawOptimizer.seesaw_optimize(xor6, state, config, workers=settings.threads)
        assert 8.31 <= score <= 12 + 1e-6
