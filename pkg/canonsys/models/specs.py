"""JSON Hamiltonian specifications accepted by the command line."""

from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class _SpecBase(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PowerSpec(_SpecBase):
    kind: Literal["power"]
    rho: List[float] = Field(..., min_length=2, max_length=3)
    kappa: List[float] = Field(..., min_length=2, max_length=3)


class PerturbedPowerSpec(_SpecBase):
    """Power entries multiplied by 1 + amplitude/(1 + |ln t|)."""

    kind: Literal["perturbed_power"]
    rho: List[float] = Field(..., min_length=2, max_length=3)
    kappa: List[float] = Field(..., min_length=2, max_length=3)
    profile: Literal["log_decay"] = "log_decay"
    amplitude: float = Field(0.1, gt=-1)


class SegmentSpec(_SpecBase):
    len: Optional[float] = Field(
        None, gt=0, description="Segment length; null extends the last one to infinity"
    )
    h: List[List[float]]

    @field_validator("h")
    @classmethod
    def _symmetric_2x2(cls, h):
        if len(h) != 2 or any(len(row) != 2 for row in h):
            raise ValueError("h must be a 2x2 matrix")
        if h[0][1] != h[1][0]:
            raise ValueError("h must be symmetric")
        return h


class PiecewiseSpec(_SpecBase):
    kind: Literal["piecewise"]
    segments: List[SegmentSpec] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _only_last_open(self):
        for seg in self.segments[:-1]:
            if seg.len is None:
                raise ValueError("only the last segment may have len null")
        return self


class RapidSpec(_SpecBase):
    """One diagonal entry with primitive exp(-1/t), the other a power."""

    kind: Literal["rapid"]
    rapid_entry: Literal[1, 2] = 2
    rho: float = Field(1.0, gt=0)
    kappa: float = Field(1.0, gt=0)


HamiltonianSpec = Annotated[
    Union[PowerSpec, PerturbedPowerSpec, PiecewiseSpec, RapidSpec],
    Field(discriminator="kind"),
]
