from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from canonsys.core.config import settings


class RunConfig(BaseModel):
    """Validated options of one CLI invocation."""

    command: Literal["power-q", "numeric-q", "predict", "verify", "regvar", "rescale"]
    input_path: Path
    z_list: List[complex] = Field(default_factory=list)
    r_grid: List[float] = Field(default_factory=list)
    angle_grid: List[float] = Field(
        default_factory=list, description="Angles in radians"
    )
    ode_tol: float = Field(default_factory=lambda: settings.ode_tol, gt=0)
    disc_tol: float = Field(default_factory=lambda: settings.disc_tol, gt=0)
    t_max: float = Field(default_factory=lambda: settings.t_max, gt=0)
    output: Optional[Path] = None
    threshold: float = Field(0.05, gt=0)

    @field_validator("r_grid", "angle_grid")
    @classmethod
    def _sorted(cls, v: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("grid must be strictly increasing")
        return v

    @field_validator("r_grid")
    @classmethod
    def _positive(cls, v: List[float]) -> List[float]:
        if any(r <= 0 for r in v):
            raise ValueError("r values must be positive")
        return v

    def header(self) -> List[str]:
        return [
            f"# command={self.command}",
            f"# ode_tol={self.ode_tol:.17g} disc_tol={self.disc_tol:.17g} "
            f"t_max={self.t_max:.17g}",
        ]
