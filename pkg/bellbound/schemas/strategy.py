from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_serializer

from bellbound.schemas.scenario import Bipartition


class LocalStrategy(BaseModel):
    """Deterministic product strategy: a = f(x), b = g(y)."""

    alice_outputs: tuple[int, ...] = Field(..., description="f(x) for every Alice input x")
    bob_outputs: tuple[int, ...] = Field(..., description="g(y) for every Bob input y")

    model_config = ConfigDict(frozen=True)


class OneBitStrategy(BaseModel):
    """Deterministic strategy where Alice sends c = h(x) and Bob answers g(y, c)."""

    alice_outputs: tuple[int, ...] = Field(..., description="f(x) for every Alice input x")
    comm: tuple[int, ...] = Field(..., description="h(x) in {0, 1} for every Alice input x")
    bob_outputs: tuple[tuple[int, int], ...] = Field(..., description="(g(y,0), g(y,1)) for every Bob input y")

    model_config = ConfigDict(frozen=True)

    @field_validator("comm")
    @classmethod
    def _bits_only(cls, comm: tuple[int, ...]) -> tuple[int, ...]:
        if any(c not in (0, 1) for c in comm):
            raise ValueError("communication map must take values in {0, 1}")
        return comm

    @classmethod
    def from_local(cls, strategy: LocalStrategy) -> "OneBitStrategy":
        return cls(
            alice_outputs=strategy.alice_outputs,
            comm=(0,) * len(strategy.alice_outputs),
            bob_outputs=tuple((b, b) for b in strategy.bob_outputs),
        )

    def partition(self) -> Bipartition:
        """The bipartition J = {x : h(x) = 0}, in canonical form."""
        return Bipartition.of(len(self.comm), (x for x, c in enumerate(self.comm) if c == 0))


Strategy = Union[LocalStrategy, OneBitStrategy]


class BoundResult(BaseModel):
    value: int
    witness_local: Optional[LocalStrategy] = None
    witness_onebit: Optional[OneBitStrategy] = None
    witness_partition: Optional[Bipartition] = None

    model_config = ConfigDict(frozen=True)

    def witness(self) -> Optional[Strategy]:
        return self.witness_onebit if self.witness_onebit is not None else self.witness_local

    @model_serializer(mode="plain")
    def _as_record(self) -> dict:
        strategy = self.witness()
        record = {
            "value": self.value,
            "partition": list(self.witness_partition.members) if self.witness_partition else None,
            "alice_outputs": None,
            "comm": None,
            "bob_outputs": None,
        }
        if isinstance(strategy, OneBitStrategy):
            record["alice_outputs"] = list(strategy.alice_outputs)
            record["comm"] = list(strategy.comm)
            record["bob_outputs"] = [list(pair) for pair in strategy.bob_outputs]
        elif isinstance(strategy, LocalStrategy):
            record["alice_outputs"] = list(strategy.alice_outputs)
            record["bob_outputs"] = list(strategy.bob_outputs)
        return record
