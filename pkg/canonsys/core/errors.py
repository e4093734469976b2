from __future__ import annotations

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from canonsys.models import WeylDisc


class CanonsysError(Exception):
    """Base class; exit_code is what the CLI returns when this escapes a command."""

    exit_code = 1


# ---- Input errors ----


class SpecError(CanonsysError):
    exit_code = 2


class DomainViolation(CanonsysError, ValueError):
    exit_code = 4


class HamiltonianDomainError(DomainViolation):
    pass


class BoundaryCaseError(DomainViolation):
    """Power data on the boundary of the model class (some kappa_i = 0)."""


class HypothesisViolation(DomainViolation):
    pass


class ConeViolation(DomainViolation):
    """Angle or delta outside the admissible cone |arg w| <= (pi/2)(1 - |alpha|)."""


class InsufficientData(CanonsysError, ValueError):
    exit_code = 5


# ---- Numerical failures ----


class NumericFailure(CanonsysError):
    exit_code = 3


class SpecialFunctionError(NumericFailure):
    pass


class GammaPoleError(SpecialFunctionError, ValueError):
    pass


class SpecialFunctionOverflow(SpecialFunctionError, OverflowError):
    pass


class KummerParameterPole(SpecialFunctionError, ValueError):
    pass


class KummerNonConvergence(SpecialFunctionError):
    pass


class PrimitiveIntegrationError(NumericFailure):
    pass


class TraceInverseError(NumericFailure):
    pass


class StepSizeUnderflow(NumericFailure):
    pass


class WeylNonConvergence(NumericFailure):
    def __init__(self, message: str, disc: Optional["WeylDisc"] = None, t: float = 0.0):
        super().__init__(message)
        self.disc = disc
        self.t = t


class WeylIndeterminate(NumericFailure):
    pass


class WeylAtInfinity(CanonsysError):
    """q_H is identically infinity; raised as a signal, not a numerical failure."""

    exit_code = 3
