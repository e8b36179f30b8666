from typing import Optional

from pydantic import BaseModel, Field, model_validator

SCORE_SLACK = 1e-6


def beats_bound(score: float, bound: float) -> bool:
    """A numerical score counts as a violation only when it clears the bound by more than SCORE_SLACK."""
    return score > bound + SCORE_SLACK


class SweepRow(BaseModel):
    sigma: float = Field(..., ge=0.0)
    seed: int
    fidelity: float = Field(..., ge=0.0, le=1.0)
    best_score: float
    beats_onebit: bool = False
    ns_bound: Optional[float] = None

    @model_validator(mode="after")
    def _check_below_ns(self) -> "SweepRow":
        if self.ns_bound is not None and self.best_score > self.ns_bound + SCORE_SLACK:
            raise ValueError(f"score {self.best_score} exceeds the no-signaling bound {self.ns_bound}")
        return self


class BoundsRow(BaseModel):
    d: int = Field(..., ge=2)
    s_local: int
    s_onebit: int
    s_ns: int
    s_quantum_lower: Optional[float] = None

    @model_validator(mode="after")
    def _check_sandwich(self) -> "BoundsRow":
        if not self.s_local <= self.s_onebit <= self.s_ns:
            raise ValueError(f"bounds out of order: {self.s_local}, {self.s_onebit}, {self.s_ns}")
        if self.s_quantum_lower is not None and self.s_quantum_lower > self.s_ns + SCORE_SLACK:
            raise ValueError(f"quantum score {self.s_quantum_lower} exceeds the no-signaling bound {self.s_ns}")
        return self

    @property
    def quantum_gap(self) -> Optional[float]:
        """How far the quantum lower bound clears the one-bit bound (positive means a violation)."""
        if self.s_quantum_lower is None:
            return None
        return self.s_quantum_lower - self.s_onebit


class StructureReport(BaseModel):
    d: int
    score: float
    onebit_bound: int
    beats_onebit: bool
    mub_deviation: float
    neighbor_overlap_spread: float
    # overlaps below this are "close to zero" and exempt from the rough-equality margin
    neighbor_overlap_floor: float
    neighbor_overlap_spread_above_floor: float
    w: float
    residual_l2: float
    no_signaling_residual: float
    normalization_residual: float
