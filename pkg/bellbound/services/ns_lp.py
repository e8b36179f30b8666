import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

from bellbound.exceptions import BellboundError
from bellbound.schemas.scenario import BellFunctional
from bellbound.services.games import GameService

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class StandardFormLP:
    """maximize c.x subject to A x = b, x >= 0."""

    objective: tuple[Fraction, ...]
    equality_matrix: tuple[tuple[Fraction, ...], ...]
    equality_rhs: tuple[Fraction, ...]
    variable_count: int

    def __post_init__(self):
        if len(self.objective) != self.variable_count:
            raise ValueError("objective length must equal variable_count")
        if len(self.equality_matrix) != len(self.equality_rhs):
            raise ValueError("equality matrix and rhs disagree on the row count")
        if any(len(row) != self.variable_count for row in self.equality_matrix):
            raise ValueError("every equality row must have variable_count columns")


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    value: Optional[Fraction] = None
    solution: tuple[Fraction, ...] = ()
    reduced_costs: tuple[Fraction, ...] = field(default=(), repr=False)
    pivots: int = 0


class _Tableau:
    """Sparse rational tableau; rows are {column: coefficient} dicts."""

    def __init__(self, rows: list[dict[int, Fraction]], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.reduced: dict[int, Fraction] = {}
        self.value = ZERO
        self.pivots = 0

    def price(self, costs: dict[int, Fraction]) -> None:
        """Reduced costs c_j - c_B B^-1 A_j and objective value for the current basis."""
        reduced = dict(costs)
        value = ZERO
        for row, rhs, basic in zip(self.rows, self.rhs, self.basis):
            weight = costs.get(basic, ZERO)
            if not weight:
                continue
            value += weight * rhs
            for column, entry in row.items():
                reduced[column] = reduced.get(column, ZERO) - weight * entry
        for basic in self.basis:
            reduced.pop(basic, None)
        self.reduced = {column: entry for column, entry in reduced.items() if entry}
        self.value = value

    def pivot(self, r: int, j: int) -> None:
        pivot_row = self.rows[r]
        element = pivot_row[j]
        if element != ONE:
            pivot_row = {column: entry / element for column, entry in pivot_row.items()}
            self.rows[r] = pivot_row
            self.rhs[r] /= element
        rhs_r = self.rhs[r]

        for i, row in enumerate(self.rows):
            if i == r:
                continue
            factor = row.get(j)
            if not factor:
                continue
            for column, entry in pivot_row.items():
                updated = row.get(column, ZERO) - factor * entry
                if updated:
                    row[column] = updated
                else:
                    row.pop(column, None)
            self.rhs[i] -= factor * rhs_r

        factor = self.reduced.get(j)
        if factor:
            for column, entry in pivot_row.items():
                updated = self.reduced.get(column, ZERO) - factor * entry
                if updated:
                    self.reduced[column] = updated
                else:
                    self.reduced.pop(column, None)
            self.value += factor * rhs_r

        self.basis[r] = j
        self.pivots += 1

    def run(self) -> LPStatus:
        """Primal simplex with Bland's rule: lowest-index entering column, lowest-index leaving basic."""
        while True:
            entering = min((column for column, entry in self.reduced.items() if entry > 0), default=None)
            if entering is None:
                return LPStatus.OPTIMAL
            leaving = None
            best = None
            for i, row in enumerate(self.rows):
                entry = row.get(entering)
                if entry is None or entry <= 0:
                    continue
                key = (self.rhs[i] / entry, self.basis[i])
                if best is None or key < best:
                    best, leaving = key, i
            if leaving is None:
                return LPStatus.UNBOUNDED
            self.pivot(leaving, entering)


class NoSignalingBounds:
    """No-signaling bound of a functional via exact rational linear programming."""

    @staticmethod
    def build_ns_lp(functional: BellFunctional) -> StandardFormLP:
        """Normalization rows, then Alice marginals against y=0, then Bob marginals against x=0."""
        scenario = functional.scenario
        m_a, m_b, o_a, o_b = scenario.shape
        n = scenario.probability_dimension()
        index = GameService.flat_index

        rows: list[dict[int, int]] = []
        rhs: list[int] = []
        for x in range(m_a):
            for y in range(m_b):
                rows.append({index(scenario, x, y, a, b): 1 for a in range(o_a) for b in range(o_b)})
                rhs.append(1)
        for x in range(m_a):
            for a in range(o_a):
                for y in range(1, m_b):
                    row = {index(scenario, x, y, a, b): 1 for b in range(o_b)}
                    row.update({index(scenario, x, 0, a, b): -1 for b in range(o_b)})
                    rows.append(row)
                    rhs.append(0)
        for y in range(m_b):
            for b in range(o_b):
                for x in range(1, m_a):
                    row = {index(scenario, x, y, a, b): 1 for a in range(o_a)}
                    row.update({index(scenario, 0, y, a, b): -1 for a in range(o_a)})
                    rows.append(row)
                    rhs.append(0)

        cache = {0: ZERO, 1: ONE, -1: -ONE}
        dense = tuple(
            tuple(cache[row.get(column, 0)] for column in range(n)) for row in rows
        )
        return StandardFormLP(
            objective=tuple(Fraction(c) for c in functional.coefficients),
            equality_matrix=dense,
            equality_rhs=tuple(Fraction(v) for v in rhs),
            variable_count=n,
        )

    @staticmethod
    def simplex_maximize(lp: StandardFormLP) -> LPResult:
        """Two-phase primal simplex in exact arithmetic.

        Phase one starts from one artificial per row; artificials left basic at
        zero are pivoted out, and rows where that is impossible are dropped as
        redundant.
        """
        n = lp.variable_count
        rows: list[dict[int, Fraction]] = []
        rhs: list[Fraction] = []
        for i, (dense_row, b) in enumerate(zip(lp.equality_matrix, lp.equality_rhs)):
            sign = -1 if b < 0 else 1
            row = {column: sign * Fraction(entry) for column, entry in enumerate(dense_row) if entry}
            row[n + i] = ONE
            rows.append(row)
            rhs.append(sign * Fraction(b))

        tableau = _Tableau(rows, rhs, [n + i for i in range(len(rows))])
        tableau.price({n + i: -ONE for i in range(len(rows))})
        tableau.run()
        if tableau.value < 0:
            logger.debug("Phase one ended at %s: infeasible", tableau.value)
            return LPResult(status=LPStatus.INFEASIBLE, pivots=tableau.pivots)

        i = 0
        while i < len(tableau.rows):
            if tableau.basis[i] < n:
                i += 1
                continue
            column = min((c for c, entry in tableau.rows[i].items() if c < n and entry), default=None)
            if column is None:
                del tableau.rows[i], tableau.rhs[i], tableau.basis[i]
                continue
            tableau.pivot(i, column)
            i += 1
        for row in tableau.rows:
            for column in [c for c in row if c >= n]:
                del row[column]

        tableau.price({j: Fraction(c) for j, c in enumerate(lp.objective) if c})
        status = tableau.run()
        if status is LPStatus.UNBOUNDED:
            return LPResult(status=status, pivots=tableau.pivots)

        solution = [ZERO] * n
        for basic, value in zip(tableau.basis, tableau.rhs):
            solution[basic] = value
        reduced = tuple(tableau.reduced.get(j, ZERO) for j in range(n))
        logger.debug("Simplex optimum %s after %d pivots", tableau.value, tableau.pivots)
        return LPResult(
            status=LPStatus.OPTIMAL,
            value=tableau.value,
            solution=tuple(solution),
            reduced_costs=reduced,
            pivots=tableau.pivots,
        )

    @staticmethod
    def ns_bound(functional: BellFunctional) -> Fraction:
        result = NoSignalingBounds.simplex_maximize(NoSignalingBounds.build_ns_lp(functional))
        if result.status is not LPStatus.OPTIMAL:
            # the no-signaling polytope is nonempty and bounded
            raise BellboundError(f"no-signaling LP ended with status {result.status.value}")
        if any(cost > 0 for cost in result.reduced_costs):
            raise BellboundError("no-signaling LP optimum has a positive reduced cost")
        logger.info("No-signaling bound %s on %s", result.value, functional.scenario)
        return result.value

    @staticmethod
    def trivial_upper_bound(functional: BellFunctional) -> int:
        """Sum over (x, y) blocks of the largest coefficient in the block."""
        tensor = functional.tensor()
        m_a, m_b = functional.scenario.m_a, functional.scenario.m_b
        return int(sum(max(tensor[x, y].reshape(-1)) for x in range(m_a) for y in range(m_b)))
