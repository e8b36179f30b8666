import itertools
import logging
from typing import Iterator, Optional

import numpy as np

from bellbound.config import settings
from bellbound.exceptions import CapacityError, DomainError
from bellbound.schemas.scenario import Behavior, BellFunctional, Bipartition, Scenario
from bellbound.schemas.strategy import BoundResult, LocalStrategy, OneBitStrategy, Strategy
from bellbound.services.executor import argmax_first, parallel_map
from bellbound.services.games import GameService

logger = logging.getLogger(__name__)

INT64_HEADROOM = 2**62


def _exact_tensor(functional: BellFunctional) -> np.ndarray:
    """Coefficient tensor in int64 when every partial sum fits, exact Python ints otherwise."""
    largest = max((abs(c) for c in functional.coefficients), default=0)
    scenario = functional.scenario
    if largest * scenario.m_a * scenario.m_b * max(scenario.o_a, scenario.o_b) < INT64_HEADROOM:
        return np.asarray(functional.coefficients, dtype=np.int64).reshape(scenario.shape)
    return functional.tensor()


def _solve_partition(job: tuple[BellFunctional, Bipartition]) -> tuple[int, LocalStrategy, Optional[LocalStrategy]]:
    functional, part = job
    inside = ClassicalBounds.local_bound(GameService.restrict(functional, part))
    complement = part.complement()
    if not complement:
        return inside.value, inside.witness_local, None
    outside = ClassicalBounds.local_bound(GameService.restrict(functional, complement))
    return inside.value + outside.value, inside.witness_local, outside.witness_local


class ClassicalBounds:
    """Local and one-bit bounds of Bell functionals."""

    @staticmethod
    def local_bound(functional: BellFunctional) -> BoundResult:
        """Exact local bound: every Bob assignment g, Alice best-responds per input.

        Ties go to the first maximizer in lexicographic order of g, then of a.
        """
        scenario = functional.scenario
        tensor = _exact_tensor(functional)
        bob_inputs = np.arange(scenario.m_b)

        best_value = None
        best_strategy = None
        for g in itertools.product(range(scenario.o_b), repeat=scenario.m_b):
            # shape (m_b, m_a, o_a): V(a, g(y) | x, y)
            picked = tensor[:, bob_inputs, :, list(g)]
            per_input = picked.sum(axis=0)
            f = [int(np.argmax(row)) for row in per_input]
            value = int(sum(per_input[x, a] for x, a in enumerate(f)))
            if best_value is None or value > best_value:
                best_value = value
                best_strategy = LocalStrategy(alice_outputs=tuple(f), bob_outputs=tuple(g))
        return BoundResult(value=best_value, witness_local=best_strategy)

    @staticmethod
    def enumerate_bipartitions(m_a: int) -> list[Bipartition]:
        """Trivial partition first, then the 2^(m_a-1) - 1 canonical nontrivial ones."""
        if m_a < 1:
            raise DomainError(f"need at least one Alice input, got {m_a}")
        parts = [Bipartition.trivial(m_a)]
        for mask in range(2 ** (m_a - 1) - 1):
            members = [0] + [x for x in range(1, m_a) if mask >> (x - 1) & 1]
            parts.append(Bipartition(ground_size=m_a, members=tuple(members)))
        return parts

    @staticmethod
    def partition_score(functional: BellFunctional, part: Bipartition) -> int:
        """Local bound of the J subgame plus the local bound of its complement (0 if empty)."""
        value, _, _ = _solve_partition((functional, part))
        return value

    @staticmethod
    def one_bit_bound(functional: BellFunctional, workers: Optional[int] = 1) -> BoundResult:
        """Exact one-bit bound as the best bipartition of Alice's inputs into two local subgames."""
        scenario = functional.scenario
        parts = ClassicalBounds.enumerate_bipartitions(scenario.m_a)
        logger.debug("Sweeping %d bipartitions for scenario %s", len(parts), scenario)
        solved = parallel_map(_solve_partition, [(functional, part) for part in parts], workers)
        best = argmax_first([value for value, _, _ in solved])
        value, inside, outside = solved[best]
        part = parts[best]

        alice_outputs = [0] * scenario.m_a
        comm = [1] * scenario.m_a
        for position, x in enumerate(part.members):
            alice_outputs[x] = inside.alice_outputs[position]
            comm[x] = 0
        if outside is not None:
            for position, x in enumerate(part.complement()):
                alice_outputs[x] = outside.alice_outputs[position]
            bob_outputs = tuple(zip(inside.bob_outputs, outside.bob_outputs))
        else:
            bob_outputs = tuple((b, b) for b in inside.bob_outputs)

        witness = OneBitStrategy(alice_outputs=tuple(alice_outputs), comm=tuple(comm), bob_outputs=bob_outputs)
        logger.info("One-bit bound %d on %s reached at partition %s", value, scenario, part)
        return BoundResult(value=value, witness_onebit=witness, witness_partition=part)

    @staticmethod
    def bruteforce_candidates(scenario: Scenario) -> int:
        return scenario.o_a ** scenario.m_a * 2 ** scenario.m_a * scenario.o_b ** (2 * scenario.m_b)

    @staticmethod
    def _check_capacity(scenario: Scenario, max_candidates: Optional[int]) -> None:
        limit = settings.bruteforce_max_candidates if max_candidates is None else max_candidates
        candidates = ClassicalBounds.bruteforce_candidates(scenario)
        if candidates > limit:
            raise CapacityError(
                f"brute force over {candidates} strategy triples in {scenario} exceeds the limit of {limit}"
            )

    @staticmethod
    def one_bit_bound_bruteforce(functional: BellFunctional, max_candidates: Optional[int] = None) -> int:
        """Score every deterministic triple (f, h, g) and keep the maximum."""
        scenario = functional.scenario
        ClassicalBounds._check_capacity(scenario, max_candidates)
        tensor = _exact_tensor(functional)
        m_a, m_b = scenario.m_a, scenario.m_b
        bob_inputs = np.arange(m_b)

        best = None
        for h in itertools.product((0, 1), repeat=m_a):
            for g in itertools.product(range(scenario.o_b), repeat=2 * m_b):
                answers = (list(g[:m_b]), list(g[m_b:]))
                # row x holds sum_y V(a, g(y, h(x)) | x, y) for every a
                rows = [tensor[x, bob_inputs, :, answers[h[x]]].sum(axis=0) for x in range(m_a)]
                # every f: outer sum over Alice's inputs
                grid = rows[0]
                for row in rows[1:]:
                    grid = np.add.outer(grid, row).reshape(-1)
                value = int(grid.max())
                if best is None or value > best:
                    best = value
        return best

    @staticmethod
    def behavior_of_strategy(strategy: Strategy, scenario: Scenario) -> Behavior:
        """Deterministic behavior p(a,b|x,y) = [a = f(x)] [b = g(y, h(x))]."""
        if isinstance(strategy, LocalStrategy):
            strategy = OneBitStrategy.from_local(strategy)
        if len(strategy.alice_outputs) != scenario.m_a or len(strategy.comm) != scenario.m_a:
            raise DomainError(f"Alice maps must cover {scenario.m_a} inputs")
        if len(strategy.bob_outputs) != scenario.m_b:
            raise DomainError(f"Bob map must cover {scenario.m_b} inputs")
        if any(not 0 <= a < scenario.o_a for a in strategy.alice_outputs):
            raise DomainError(f"Alice outputs must lie in [0, {scenario.o_a})")
        if any(not 0 <= b < scenario.o_b for pair in strategy.bob_outputs for b in pair):
            raise DomainError(f"Bob outputs must lie in [0, {scenario.o_b})")

        p = np.zeros(scenario.shape)
        for x in range(scenario.m_a):
            for y in range(scenario.m_b):
                p[x, y, strategy.alice_outputs[x], strategy.bob_outputs[y][strategy.comm[x]]] = 1.0
        return Behavior.from_array(scenario, p)

    @staticmethod
    def witness_behavior(result: BoundResult, scenario: Scenario) -> Behavior:
        strategy = result.witness()
        if strategy is None:
            raise DomainError("bound result carries no witness strategy")
        return ClassicalBounds.behavior_of_strategy(strategy, scenario)

    @staticmethod
    def iter_onebit_strategies(scenario: Scenario) -> Iterator[OneBitStrategy]:
        m_a, m_b = scenario.m_a, scenario.m_b
        for f in itertools.product(range(scenario.o_a), repeat=m_a):
            for h in itertools.product((0, 1), repeat=m_a):
                for g in itertools.product(range(scenario.o_b), repeat=2 * m_b):
                    yield OneBitStrategy(
                        alice_outputs=f, comm=h, bob_outputs=tuple(zip(g[:m_b], g[m_b:]))
                    )

    @staticmethod
    def enumerate_onebit_behaviors(scenario: Scenario, max_candidates: Optional[int] = None) -> set[tuple[int, ...]]:
        """Distinct deterministic one-bit behaviors, each as a flat 0/1 tuple."""
        ClassicalBounds._check_capacity(scenario, max_candidates)
        m_b = scenario.m_b
        distinct = set()
        for strategy in ClassicalBounds.iter_onebit_strategies(scenario):
            flat = [0] * scenario.probability_dimension()
            for x, (a, c) in enumerate(zip(strategy.alice_outputs, strategy.comm)):
                for y in range(m_b):
                    flat[GameService.flat_index(scenario, x, y, a, strategy.bob_outputs[y][c])] = 1
            distinct.add(tuple(flat))
        return distinct

    @staticmethod
    def count_onebit_vertices(scenario: Scenario) -> int:
        """o_A^m_A [o_B^m_B + (2^(m_A-1) - 1)(o_B^(2 m_B) - o_B^m_B)]."""
        o_a, o_b, m_a, m_b = scenario.o_a, scenario.o_b, scenario.m_a, scenario.m_b
        return o_a ** m_a * (o_b ** m_b + (2 ** (m_a - 1) - 1) * (o_b ** (2 * m_b) - o_b ** m_b))
