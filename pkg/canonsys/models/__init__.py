from .models import (
    AsymptoticsVerdict,
    BoundaryVerdict,
    CellOutcome,
    ConstantsLedger,
    FundamentalMatrix,
    IndivisibleStart,
    InverseSolution,
    KasaharaScalers,
    KummerParameters,
    LimitPrimitives,
    PowerData,
    PowerLaw,
    PrimitiveValue,
    RegVarReport,
    ReparamWitness,
    RescalingDeviation,
    StepData,
    WeylDisc,
    WeylEstimate,
    cone_half_width,
)
from .run_config import RunConfig
from .specs import (
    HamiltonianSpec,
    PerturbedPowerSpec,
    PiecewiseSpec,
    PowerSpec,
    RapidSpec,
    SegmentSpec,
)

__all__ = [
    "AsymptoticsVerdict",
    "BoundaryVerdict",
    "CellOutcome",
    "ConstantsLedger",
    "FundamentalMatrix",
    "HamiltonianSpec",
    "IndivisibleStart",
    "InverseSolution",
    "KasaharaScalers",
    "KummerParameters",
    "LimitPrimitives",
    "PerturbedPowerSpec",
    "PiecewiseSpec",
    "PowerData",
    "PowerLaw",
    "PowerSpec",
    "PrimitiveValue",
    "RapidSpec",
    "RegVarReport",
    "ReparamWitness",
    "RescalingDeviation",
    "RunConfig",
    "SegmentSpec",
    "StepData",
    "WeylDisc",
    "WeylEstimate",
    "cone_half_width",
]
