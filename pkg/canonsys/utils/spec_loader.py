"""JSON Hamiltonian specifications: parsing, validation and construction."""

import json
import logging
import math
from pathlib import Path
from typing import Union

from pydantic import TypeAdapter, ValidationError

from canonsys.core.errors import DomainViolation, SpecError
from canonsys.models import (
    HamiltonianSpec,
    PerturbedPowerSpec,
    PiecewiseSpec,
    PowerData,
    PowerSpec,
    RapidSpec,
)
from canonsys.services.hamiltonian import (
    Hamiltonian,
    PerturbedPowerHamiltonian,
    PiecewiseHamiltonian,
    PowerHamiltonian,
    RapidHamiltonian,
)

logger = logging.getLogger(__name__)

_SPEC_ADAPTER = TypeAdapter(HamiltonianSpec)

SpecModel = Union[PowerSpec, PerturbedPowerSpec, PiecewiseSpec, RapidSpec]


def _location(err: dict) -> str:
    return ".".join(str(part) for part in err.get("loc", ())) or "<root>"


def _raise_from_validation(exc: ValidationError, source: str) -> None:
    errors = exc.errors()
    for err in errors:
        if err["type"] == "psd_violation":
            raise DomainViolation(f"{source}: {err['msg']}") from exc
    first = errors[0]
    raise SpecError(
        f"{source}: invalid value at {_location(first)}: {first['msg']}"
    ) from exc


def parse_spec(text: str, source: str = "<spec>") -> SpecModel:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(
            f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return _SPEC_ADAPTER.validate_python(raw)
    except ValidationError as exc:
        _raise_from_validation(exc, source)


def load_spec(path: Union[str, Path]) -> SpecModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_spec(text, str(path))


def power_data(spec: Union[PowerSpec, PerturbedPowerSpec]) -> PowerData:
    """PowerData from [rho1, rho2(, rho3)] and [kappa1, kappa2(, kappa3)]."""
    rho = list(spec.rho)
    kappa = list(spec.kappa) + [0.0] * (3 - len(spec.kappa))
    try:
        return PowerData(
            rho1=rho[0],
            rho2=rho[1],
            rho3=rho[2] if len(rho) > 2 else None,
            kappa1=kappa[0],
            kappa2=kappa[1],
            kappa3=kappa[2],
        )
    except ValidationError as exc:
        _raise_from_validation(exc, f"{spec.kind} spec")


def build_hamiltonian(spec: SpecModel) -> Hamiltonian:
    if isinstance(spec, PowerSpec):
        return PowerHamiltonian(power_data(spec))
    if isinstance(spec, PerturbedPowerSpec):
        return PerturbedPowerHamiltonian(power_data(spec), amplitude=spec.amplitude)
    if isinstance(spec, RapidSpec):
        return RapidHamiltonian(spec.rapid_entry, rho=spec.rho, kappa=spec.kappa)
    segments = [
        (math.inf if seg.len is None else seg.len, seg.h) for seg in spec.segments
    ]
    logger.debug("[SpecLoader] piecewise spec with %d segments", len(segments))
    return PiecewiseHamiltonian(segments)


def load_hamiltonian(path: Union[str, Path]) -> Hamiltonian:
    return build_hamiltonian(load_spec(path))
