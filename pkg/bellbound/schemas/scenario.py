from typing import Any, Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_serializer, model_validator

SCENARIO_KEYS = ("m_a", "m_b", "o_a", "o_b")

PROBABILITY_RANGE_TOL = 1e-12
NORMALIZATION_TOL = 1e-9


class Scenario(BaseModel):
    m_a: int = Field(..., ge=1, description="Alice input count")
    m_b: int = Field(..., ge=1, description="Bob input count")
    o_a: int = Field(..., ge=1, description="Alice output count")
    o_b: int = Field(..., ge=1, description="Bob output count")

    model_config = ConfigDict(frozen=True)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.m_a, self.m_b, self.o_a, self.o_b)

    def probability_dimension(self) -> int:
        return self.m_a * self.m_b * self.o_a * self.o_b

    def normalized_dimension(self) -> int:
        """Dimension left once each (x, y) block is forced to sum to one."""
        return self.m_a * self.m_b * (self.o_a * self.o_b - 1)

    def no_signaling_dimension(self) -> int:
        return (
            self.m_a * (self.o_a - 1) * self.m_b * (self.o_b - 1)
            + self.m_a * (self.o_a - 1)
            + self.m_b * (self.o_b - 1)
        )

    def __str__(self) -> str:
        return f"({self.m_a},{self.m_b},{self.o_a},{self.o_b})"


def _lift_scenario_header(data: Any, payload_key: str) -> Any:
    # Files carry the scenario as flat m_a/m_b/o_a/o_b keys next to the payload
    if isinstance(data, dict) and "scenario" not in data and all(k in data for k in SCENARIO_KEYS):
        return {
            "scenario": {k: data[k] for k in SCENARIO_KEYS},
            payload_key: data.get(payload_key),
        }
    return data


class BellFunctional(BaseModel):
    """Integer coefficients V(a,b|x,y), flattened row-major in (x, y, a, b)."""

    scenario: Scenario
    coefficients: tuple[int, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="before")
    @classmethod
    def _from_flat_header(cls, data: Any) -> Any:
        return _lift_scenario_header(data, "coefficients")

    @model_validator(mode="after")
    def _check_length(self) -> "BellFunctional":
        expected = self.scenario.probability_dimension()
        if len(self.coefficients) != expected:
            raise ValueError(
                f"functional has {len(self.coefficients)} coefficients, scenario {self.scenario} needs {expected}"
            )
        return self

    @model_serializer(mode="wrap")
    def _to_flat_header(self, handler) -> dict:
        data = handler(self)
        header = data.pop("scenario")
        return {**header, **data}

    def tensor(self) -> np.ndarray:
        """Coefficients as an (m_a, m_b, o_a, o_b) array holding exact Python integers."""
        array = np.empty(len(self.coefficients), dtype=object)
        array[:] = self.coefficients
        return array.reshape(self.scenario.shape)

    def float_tensor(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=float).reshape(self.scenario.shape)


class Behavior(BaseModel):
    """Conditional distribution p(a,b|x,y), same index order as BellFunctional."""

    scenario: Scenario
    probabilities: tuple[float, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="before")
    @classmethod
    def _from_flat_header(cls, data: Any) -> Any:
        return _lift_scenario_header(data, "probabilities")

    @model_validator(mode="after")
    def _check_distribution(self) -> "Behavior":
        expected = self.scenario.probability_dimension()
        if len(self.probabilities) != expected:
            raise ValueError(
                f"behavior has {len(self.probabilities)} entries, scenario {self.scenario} needs {expected}"
            )
        array = self.array()
        if array.size and (array.min() < -PROBABILITY_RANGE_TOL or array.max() > 1 + PROBABILITY_RANGE_TOL):
            raise ValueError("probabilities must lie in [0, 1]")
        block_sums = array.sum(axis=(2, 3))
        worst = float(np.max(np.abs(block_sums - 1.0)))
        if worst > NORMALIZATION_TOL:
            raise ValueError(f"behavior is not normalized (max deviation {worst:.3e})")
        return self

    @model_serializer(mode="wrap")
    def _to_flat_header(self, handler) -> dict:
        data = handler(self)
        header = data.pop("scenario")
        return {**header, **data}

    @classmethod
    def from_array(cls, scenario: Scenario, array: np.ndarray) -> "Behavior":
        flat = np.asarray(array, dtype=float).reshape(-1)
        return cls(scenario=scenario, probabilities=tuple(float(v) for v in flat))

    def array(self) -> np.ndarray:
        return np.asarray(self.probabilities, dtype=float).reshape(self.scenario.shape)


class Bipartition(BaseModel):
    """A subset J of Alice's inputs; the rest of her inputs form the complement.

    Canonical form: the trivial partition is J = all inputs, otherwise input 0 is in J.
    """

    ground_size: int = Field(..., ge=1)
    members: tuple[int, ...]

    model_config = ConfigDict(frozen=True)

    @field_validator("members")
    @classmethod
    def _sorted_unique(cls, members: tuple[int, ...]) -> tuple[int, ...]:
        if len(set(members)) != len(members):
            raise ValueError("bipartition members must be distinct")
        return tuple(sorted(members))

    @model_validator(mode="after")
    def _check_canonical(self) -> "Bipartition":
        if not self.members:
            raise ValueError("bipartition J must be nonempty")
        if self.members[0] < 0 or self.members[-1] >= self.ground_size:
            raise ValueError(f"bipartition members must lie in [0, {self.ground_size})")
        if 0 not in self.members:
            raise ValueError("canonical bipartitions contain input 0")
        return self

    @classmethod
    def trivial(cls, ground_size: int) -> "Bipartition":
        return cls(ground_size=ground_size, members=tuple(range(ground_size)))

    @classmethod
    def of(cls, ground_size: int, members: Iterable[int]) -> "Bipartition":
        """Canonical bipartition for an arbitrary side: swaps to the complement when 0 is missing."""
        side = set(members)
        if 0 not in side:
            side = set(range(ground_size)) - side
        return cls(ground_size=ground_size, members=tuple(side))

    @property
    def is_trivial(self) -> bool:
        return len(self.members) == self.ground_size

    def complement(self) -> tuple[int, ...]:
        inside = set(self.members)
        return tuple(x for x in range(self.ground_size) if x not in inside)

    def __str__(self) -> str:
        inside = ",".join(str(x) for x in self.members)
        outside = ",".join(str(x) for x in self.complement())
        return f"{{{inside}}}|{{{outside}}}"
