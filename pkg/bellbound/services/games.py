import logging
from typing import Iterable, Sequence, Union

import numpy as np

from bellbound.exceptions import DomainError, ShapeError
from bellbound.schemas.scenario import Behavior, BellFunctional, Bipartition, Scenario

logger = logging.getLogger(__name__)


class GameService:
    """Scenario plumbing: indexing, game generators, restriction and scoring."""

    @staticmethod
    def flat_index(scenario: Scenario, x: int, y: int, a: int, b: int) -> int:
        """Row-major position of p(a,b|x,y) in the (x, y, a, b) ordering."""
        for name, value, bound in (("x", x, scenario.m_a), ("y", y, scenario.m_b),
                                   ("a", a, scenario.o_a), ("b", b, scenario.o_b)):
            if not 0 <= value < bound:
                raise DomainError(f"{name}={value} out of range [0, {bound}) for scenario {scenario}")
        return ((x * scenario.m_b + y) * scenario.o_a + a) * scenario.o_b + b

    @staticmethod
    def unflat_index(scenario: Scenario, index: int) -> tuple[int, int, int, int]:
        if not 0 <= index < scenario.probability_dimension():
            raise DomainError(f"index {index} out of range for scenario {scenario}")
        rest, b = divmod(index, scenario.o_b)
        rest, a = divmod(rest, scenario.o_a)
        x, y = divmod(rest, scenario.m_b)
        return x, y, a, b

    @staticmethod
    def zero_functional(scenario: Scenario) -> BellFunctional:
        return BellFunctional(scenario=scenario, coefficients=(0,) * scenario.probability_dimension())

    @staticmethod
    def make_xor_game(d: int, bob_inputs: int) -> BellFunctional:
        """XOR-d game V(a,b|x,y) = [(b - a) mod d = x*y] with Bob limited to `bob_inputs` inputs."""
        if d < 2:
            raise DomainError(f"XOR-d games need d >= 2, got {d}")
        if not 1 <= bob_inputs <= d:
            raise DomainError(f"bob_inputs must lie in [1, {d}], got {bob_inputs}")
        scenario = Scenario(m_a=d, m_b=bob_inputs, o_a=d, o_b=d)
        coefficients = tuple(
            int((b - a) % d == (x * y) % d)
            for x in range(d) for y in range(bob_inputs) for a in range(d) for b in range(d)
        )
        return BellFunctional(scenario=scenario, coefficients=coefficients)

    @staticmethod
    def make_truncated_xor_game(d: int) -> BellFunctional:
        """The (d,2,d,d) truncated XOR-d game; d=5 is the 250-dimensional headline game."""
        return GameService.make_xor_game(d, bob_inputs=2)

    @staticmethod
    def score(functional: BellFunctional, behavior: Behavior) -> float:
        if functional.scenario != behavior.scenario:
            raise ShapeError(
                f"functional scenario {functional.scenario} does not match behavior scenario {behavior.scenario}"
            )
        return float(np.dot(functional.float_tensor().reshape(-1), behavior.array().reshape(-1)))

    @staticmethod
    def _inputs_of(part: Union[Bipartition, Iterable[int]], m_a: int) -> list[int]:
        if isinstance(part, Bipartition):
            if part.ground_size != m_a:
                raise ShapeError(f"bipartition over {part.ground_size} inputs, functional has {m_a}")
            return list(part.members)
        inputs = sorted(set(part))
        if not inputs:
            raise DomainError("cannot restrict to an empty set of inputs")
        if inputs[0] < 0 or inputs[-1] >= m_a:
            raise DomainError(f"restriction inputs must lie in [0, {m_a})")
        return inputs

    @staticmethod
    def restrict(functional: BellFunctional, part: Union[Bipartition, Iterable[int]]) -> BellFunctional:
        """Sub-functional on the Alice inputs in `part`, kept in ascending original order."""
        scenario = functional.scenario
        inputs = GameService._inputs_of(part, scenario.m_a)
        block = scenario.m_b * scenario.o_a * scenario.o_b
        coefficients: list[int] = []
        for x in inputs:
            coefficients.extend(functional.coefficients[x * block:(x + 1) * block])
        sub = Scenario(m_a=len(inputs), m_b=scenario.m_b, o_a=scenario.o_a, o_b=scenario.o_b)
        return BellFunctional(scenario=sub, coefficients=tuple(coefficients))

    @staticmethod
    def restrict_behavior(behavior: Behavior, part: Union[Bipartition, Iterable[int]]) -> np.ndarray:
        """Rows of p for the Alice inputs in `part`; a slice, not a normalized Behavior of its own."""
        inputs = GameService._inputs_of(part, behavior.scenario.m_a)
        return behavior.array()[inputs]

    @staticmethod
    def ns_behavior_from_functional(functional: BellFunctional) -> Behavior:
        """p = V / d for games whose (x, y) blocks each hold exactly d unit coefficients."""
        scenario = functional.scenario
        d = scenario.o_a
        tensor = functional.tensor()
        if any(c not in (0, 1) for c in functional.coefficients):
            raise DomainError("V / d is a behavior only for 0/1 coefficients")
        for x in range(scenario.m_a):
            for y in range(scenario.m_b):
                if sum(tensor[x, y].reshape(-1)) != d:
                    raise DomainError(f"block (x={x}, y={y}) does not sum to {d}; cannot normalize as V/d")
        return Behavior.from_array(scenario, functional.float_tensor() / d)

    @staticmethod
    def white_noise_behavior(scenario: Scenario) -> Behavior:
        uniform = 1.0 / (scenario.o_a * scenario.o_b)
        return Behavior(scenario=scenario, probabilities=(uniform,) * scenario.probability_dimension())

    @staticmethod
    def mix(first: Behavior, second: Behavior, w: float) -> Behavior:
        if not 0.0 <= w <= 1.0:
            raise DomainError(f"mixing weight must lie in [0, 1], got {w}")
        if first.scenario != second.scenario:
            raise ShapeError("cannot mix behaviors from different scenarios")
        return Behavior.from_array(first.scenario, w * first.array() + (1.0 - w) * second.array())

    @staticmethod
    def is_no_signaling(behavior: Behavior, tol: float = 1e-9) -> tuple[bool, float]:
        """Largest drift of either party's marginal across the other party's inputs."""
        p = behavior.array()
        alice = p.sum(axis=3)  # (x, y, a)
        bob = p.sum(axis=2)    # (x, y, b)
        alice_drift = np.max(alice.max(axis=1) - alice.min(axis=1)) if alice.size else 0.0
        bob_drift = np.max(bob.max(axis=0) - bob.min(axis=0)) if bob.size else 0.0
        violation = float(max(alice_drift, bob_drift))
        return violation <= tol, violation

    @staticmethod
    def relabel(functional: BellFunctional, alice_inputs: Sequence[int], bob_inputs: Sequence[int],
                alice_outputs: Sequence[Sequence[int]], bob_outputs: Sequence[Sequence[int]]) -> BellFunctional:
        """Apply input permutations and per-input output permutations to a functional.

        New coefficient at (x, y, a, b) is the old one at
        (alice_inputs[x], bob_inputs[y], alice_outputs[x][a], bob_outputs[y][b]).
        """
        tensor = functional.tensor()
        scenario = functional.scenario
        relabeled = np.empty_like(tensor)
        for x in range(scenario.m_a):
            for y in range(scenario.m_b):
                for a in range(scenario.o_a):
                    for b in range(scenario.o_b):
                        relabeled[x, y, a, b] = tensor[
                            alice_inputs[x], bob_inputs[y], alice_outputs[x][a], bob_outputs[y][b]
                        ]
        return BellFunctional(scenario=scenario, coefficients=tuple(int(v) for v in relabeled.reshape(-1)))
