import cmath
import math
from typing import Any, List, Literal, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_core import PydanticCustomError

# Slack on the closed cone |arg w| <= (pi/2)(1 - |alpha|)
CONE_TOL = 1e-10


def cone_half_width(alpha: float) -> float:
    return 0.5 * math.pi * (1.0 - abs(alpha))


class PrimitiveValue(NamedTuple):
    """Entrywise primitive M(t) = [[m1, m3], [m3, m2]] at a single t."""

    m1: float
    m2: float
    m3: float

    @property
    def trace(self) -> float:
        return self.m1 + self.m2

    def as_array(self) -> np.ndarray:
        return np.array([[self.m1, self.m3], [self.m3, self.m2]])


class PowerData(BaseModel):
    """Power Hamiltonian data: h_i(t) = kappa_i * t**(rho_i - 1)."""

    model_config = ConfigDict(frozen=True)

    rho1: float = Field(..., gt=0, description="Index of h1")
    rho2: float = Field(..., gt=0, description="Index of h2")
    rho3: Optional[float] = Field(None, gt=0, description="Index of h3")
    kappa1: float = Field(..., ge=0)
    kappa2: float = Field(..., ge=0)
    kappa3: float = 0.0

    @model_validator(mode="before")
    @classmethod
    def _default_rho3(cls, values):
        if isinstance(values, dict) and values.get("rho3") is None:
            try:
                values = {
                    **values,
                    "rho3": 0.5 * (float(values["rho1"]) + float(values["rho2"])),
                }
            except (KeyError, TypeError, ValueError):
                pass  # field validation reports the missing index
        return values

    @model_validator(mode="after")
    def _membership(self):
        mean = 0.5 * (self.rho1 + self.rho2)
        k1, k2, k3 = self.kappa1, self.kappa2, self.kappa3
        if k1 == 0 and k2 == 0:
            raise ValueError("kappa1 and kappa2 cannot both vanish (trace would be 0)")
        if k3 * k3 > k1 * k2 * (1 + 1e-14):
            raise PydanticCustomError(
                "psd_violation",
                "kappa3**2 = {k3sq} exceeds kappa1*kappa2 = {prod}",
                {"k3sq": k3 * k3, "prod": k1 * k2},
            )
        if k3 != 0 and abs(self.rho3 - mean) > 1e-12 * mean:
            raise ValueError("kappa3 != 0 requires rho3 = (rho1 + rho2) / 2")
        return self

    @property
    def kappa(self) -> float:
        return math.sqrt(max(self.kappa1 * self.kappa2 - self.kappa3**2, 0.0))

    @property
    def alpha(self) -> float:
        return (self.rho2 - self.rho1) / (self.rho2 + self.rho1)

    @property
    def boundary(self) -> Optional[str]:
        """'q_infinite' / 'q_zero' for the two boundary classes, None otherwise."""
        if self.kappa2 == 0:
            return "q_infinite"
        if self.kappa1 == 0:
            return "q_zero"
        return None

    def coefficients(self) -> Tuple[float, float, float]:
        """Leading coefficients c_i = kappa_i / rho_i of the primitives."""
        return (
            self.kappa1 / self.rho1,
            self.kappa2 / self.rho2,
            self.kappa3 / self.rho3,
        )


class PowerLaw(BaseModel):
    """q(z) = i*omega*(z/i)**alpha."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., ge=-1, le=1)
    omega: complex

    @model_validator(mode="after")
    def _cone(self):
        if self.omega != 0:
            arg = cmath.phase(self.omega)
            if abs(arg) > cone_half_width(self.alpha) + CONE_TOL:
                raise PydanticCustomError(
                    "cone_violation",
                    "|arg omega| = {arg} outside the cone for alpha = {alpha}",
                    {"arg": abs(arg), "alpha": self.alpha},
                )
        return self

    @property
    def arg_omega(self) -> float:
        return cmath.phase(self.omega)


class KummerParameters(BaseModel):
    model_config = ConfigDict(frozen=True)

    a_plus: complex
    a_minus: complex
    b_plus: complex
    b_minus: complex


class StepData(BaseModel):
    """Two-segment step Hamiltonian switching between diag(1,0) and diag(0,1)."""

    model_config = ConfigDict(frozen=True)

    omega: float = Field(..., gt=0)
    transposed: bool = False


class BoundaryVerdict(BaseModel):
    kind: Literal["q_infinite", "q_zero", "power_law"]
    law: Optional[PowerLaw] = None


class InverseSolution(BaseModel):
    data: PowerData
    gamma: float = Field(..., gt=0)


class ReparamWitness(BaseModel):
    beta: float = Field(..., gt=0)
    c: float = Field(..., gt=0)


class IndivisibleStart(BaseModel):
    variant: Literal["none", "type0", "typeHalfPi"] = "none"
    epsilon: Optional[float] = None


class FundamentalMatrix(BaseModel):
    """W(t, z) with W(0, z) = I."""

    model_config = ConfigDict(frozen=True)

    t: float = Field(..., ge=0)
    z: complex
    w11: complex
    w12: complex
    w21: complex
    w22: complex

    @classmethod
    def from_array(cls, t: float, z: complex, w: np.ndarray) -> "FundamentalMatrix":
        return cls(
            t=t,
            z=z,
            w11=complex(w[0, 0]),
            w12=complex(w[0, 1]),
            w21=complex(w[1, 0]),
            w22=complex(w[1, 1]),
        )

    def as_array(self) -> np.ndarray:
        return np.array([[self.w11, self.w12], [self.w21, self.w22]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.w11 * self.w22 - self.w12 * self.w21

    def mobius(self, tau: complex) -> complex:
        """Image of tau; tau = inf maps to w11/w21, poles map to inf."""
        if cmath.isinf(tau):
            num, den = self.w11, self.w21
        else:
            num = self.w11 * tau + self.w12
            den = self.w21 * tau + self.w22
        if den == 0:
            return complex(math.inf, 0.0)
        return num / den


class WeylDisc(BaseModel):
    center: Optional[complex] = None
    radius: float = Field(math.inf, ge=0)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.radius)


class WeylEstimate(BaseModel):
    """Result of the nested-disc loop with its diagnostics."""

    z: complex
    value: Optional[complex] = None
    disc: WeylDisc
    t_reached: float
    radius_history: List[Tuple[float, float]] = Field(default_factory=list)
    det_deviation: float = 0.0
    # other outcomes raise; CellOutcome records them for grid runs
    status: Literal["ok"] = "ok"


class ConstantsLedger(BaseModel):
    rho1: float = Field(..., gt=0)
    rho2: float = Field(..., gt=0)
    sigma: float = Field(..., gt=0)
    alpha: float = Field(..., ge=-1, le=1)
    delta: float
    omega: complex
    omega_prime: complex
    arg_omega: float
    c1: float
    c2: float
    c3: float

    @model_validator(mode="after")
    def _consistency(self):
        if abs(self.sigma - min(self.rho1, self.rho2)) > 1e-12 * self.sigma:
            raise ValueError("sigma must equal min(rho1, rho2)")
        bound = math.sqrt(max(1.0 - self.alpha**2, 0.0))
        if abs(self.delta) > bound + CONE_TOL:
            raise ValueError("|delta| exceeds sqrt(1 - alpha**2)")
        if abs(self.arg_omega) > cone_half_width(self.alpha) + CONE_TOL:
            raise ValueError("arg omega outside the cone")
        return self


class RegVarReport(BaseModel):
    index: float
    rapid: bool = False
    scale: float
    fit_residual: float = Field(..., ge=0)
    decades_used: float = Field(..., ge=3)
    samples_used: int


class KasaharaScalers(BaseModel):
    b1: float = Field(..., gt=0)
    b2: float = Field(..., gt=0)


class LimitPrimitives(BaseModel):
    """Indices and off-diagonal limit of the rescaled primitives; an infinite index is rapid."""

    rho1: float = Field(..., gt=0)
    rho2: float = Field(..., gt=0)
    delta: float = 0.0

    @property
    def rapid(self) -> bool:
        return math.isinf(self.rho1) or math.isinf(self.rho2)

    @property
    def rho3(self) -> float:
        return 0.5 * (self.rho1 + self.rho2)


class RescalingDeviation(BaseModel):
    r: float
    breve_t: float
    m1: float = Field(..., ge=0)
    m2: float = Field(..., ge=0)
    m3: float = Field(..., ge=0)

    @property
    def deviation(self) -> float:
        return max(self.m1, self.m2, self.m3)


class AsymptoticsVerdict(BaseModel):
    r_grid: List[float]
    angles: List[float]
    # relative_errors[i][j] belongs to (r_grid[i], angles[j]); None marks a failed cell
    relative_errors: List[List[Optional[float]]]
    statuses: List[List[str]]
    threshold: float
    decreasing: bool
    passed: bool

    @field_validator("r_grid", "angles")
    @classmethod
    def _strictly_increasing(cls, v: List[float]) -> List[float]:
        if not v or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("grid must be nonempty and strictly increasing")
        return v

    @field_validator("relative_errors")
    @classmethod
    def _nonnegative(cls, v):
        for row in v:
            for e in row:
                if e is not None and e < 0:
                    raise ValueError("relative errors are nonnegative")
        return v

    def stolz_angles(self) -> List[Tuple[float, List[Optional[float]]]]:
        """Per-angle error columns along r_grid."""
        return [
            (phi, [row[j] for row in self.relative_errors])
            for j, phi in enumerate(self.angles)
        ]


class CellOutcome(BaseModel):
    """One grid cell after retries: its value, or the status it failed with."""

    index: int
    value: Optional[Any] = None
    status: Literal["ok", "nonconverged", "at_infinity", "indeterminate", "failed"] = (
        "ok"
    )
    attempts: int = 1
    t_max: float
    message: Optional[str] = None
    last_disc: Optional[WeylDisc] = None
    t_reached: Optional[float] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"
