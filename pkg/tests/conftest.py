import numpy as np
import pytest

from bellbound.schemas.quantum import SeesawConfig
from bellbound.schemas.scenario import BellFunctional, Scenario
from bellbound.services.games import GameService


def random_functional(scenario: Scenario, rng: np.random.Generator, low: int = -3, high: int = 3) -> BellFunctional:
    coefficients = rng.integers(low, high + 1, size=scenario.probability_dimension())
    return BellFunctional(scenario=scenario, coefficients=tuple(int(c) for c in coefficients))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def chsh_scenario():
    return Scenario(m_a=2, m_b=2, o_a=2, o_b=2)


@pytest.fixture
def xor2():
    return GameService.make_truncated_xor_game(2)


@pytest.fixture
def xor3():
    return GameService.make_truncated_xor_game(3)


@pytest.fixture(scope="session")
def xor5():
    return GameService.make_truncated_xor_game(5)


@pytest.fixture(scope="session")
def xor6():
    return GameService.make_truncated_xor_game(6)


@pytest.fixture
def quick_config():
    return SeesawConfig(restarts=4, sweeps_max=100, improvement_tol=1e-9, rng_seed=7)
