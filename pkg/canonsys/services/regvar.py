"""
Regular and rapid variation at t = 0, estimated from samples.

The index is the least-squares log-log slope over the three smallest decades
of the samples. Rapid variation shows up as a local slope above
RAPID_SLOPE that keeps growing toward t = 0 for at least a decade.
"""

import logging
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np

from canonsys.core.errors import HypothesisViolation, InsufficientData
from canonsys.models import RegVarReport
from canonsys.services.hamiltonian import Hamiltonian
from canonsys.utils.quadrature import accumulate_power_law

logger = logging.getLogger(__name__)

MIN_SAMPLES = 20
MIN_DECADES = 3.0
FIT_DECADES = 3.0
RAPID_SLOPE = 50.0
RAPID_SPAN_DECADES = 1.0
# delta is averaged over this many grid points below DELTA_CUTOFF
DELTA_POINTS = 3
DELTA_CUTOFF = 1e-3


def _clean(samples: Sequence[Tuple[float, float]]) -> Tuple[np.ndarray, np.ndarray]:
    """Positive finite samples, sorted by t."""
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    keep = (arr[:, 0] > 0) & (arr[:, 1] > 0) & np.isfinite(arr).all(axis=1)
    arr = arr[keep]
    arr = arr[np.argsort(arr[:, 0])]
    return arr[:, 0], arr[:, 1]


def _decades(t: np.ndarray) -> float:
    return float(np.log10(t[-1] / t[0])) if len(t) > 1 else 0.0


def _rapid_run(log_t: np.ndarray, log_v: np.ndarray) -> bool:
    """Local slopes above RAPID_SLOPE from the smallest t on, growing toward 0, for a decade."""
    slopes = np.diff(log_v) / np.diff(log_t)
    n = 0
    while n < len(slopes) and slopes[n] > RAPID_SLOPE:
        n += 1
    if n == 0:
        return False
    run = slopes[:n]
    if np.any(np.diff(run) > 0):
        return False
    span = (log_t[n] - log_t[0]) / math.log(10.0)
    return span >= RAPID_SPAN_DECADES


def estimate_regvar_index(samples: Sequence[Tuple[float, float]]) -> RegVarReport:
    """
    Index of regular variation at 0 from (t, value) samples.

    Nonpositive values (underflowed primitives) are dropped before checking
    coverage: at least 20 samples over at least three decades of t.
    """
    t, v = _clean(samples)
    decades = _decades(t)
    if len(t) < MIN_SAMPLES or decades < MIN_DECADES:
        raise InsufficientData(
            f"{len(t)} usable samples over {decades:.2f} decades; "
            f"need {MIN_SAMPLES} over {MIN_DECADES:g}"
        )
    log_t, log_v = np.log(t), np.log(v)
    # the fit window reaches the first sample at least FIT_DECADES above t[0]
    edge = int(np.searchsorted(t, t[0] * 10.0**FIT_DECADES * (1.0 - 1e-12)))
    window = np.arange(len(t)) <= edge
    slope, intercept = np.polyfit(log_t[window], log_v[window], 1)
    fitted = slope * log_t[window] + intercept
    residual = float(np.sqrt(np.mean((log_v[window] - fitted) ** 2)))
    rapid = _rapid_run(log_t, log_v)
    if rapid:
        logger.info("[RegVar] rapid variation: local slopes exceed %g", RAPID_SLOPE)
    return RegVarReport(
        index=math.inf if rapid else float(slope),
        rapid=rapid,
        scale=float(math.exp(intercept)),
        fit_residual=residual,
        decades_used=_decades(t[window]) if not rapid else decades,
        samples_used=int(window.sum()),
    )


def karamata_ratio(f_samples: Sequence[Tuple[float, float]], rho: float) -> float:
    """
    max |F(t) (rho+1) / (t f(t)) - 1| over the smallest decade of the samples,
    F the accumulated primitive of f.
    """
    if not math.isfinite(rho):
        raise HypothesisViolation(
            "the primitive ratio needs a finite index; use estimate_regvar_index for rho = inf"
        )
    if rho <= -1:
        raise HypothesisViolation(f"index must exceed -1, got {rho}")
    t, f = _clean(f_samples)
    if len(t) < 2:
        raise InsufficientData("need at least two positive samples")
    F = accumulate_power_law(t, f)
    decade = t <= 10.0 * t[0]
    ratio = F[decade] * (rho + 1.0) / (t[decade] * f[decade])
    return float(np.max(np.abs(ratio - 1.0)))


def estimate_delta(H: Hamiltonian, t_grid: Sequence[float]) -> float:
    """Average of m3 / sqrt(m1 m2) over the three smallest grid points below 1e-3."""
    small = sorted(t for t in t_grid if 0 < t < DELTA_CUTOFF)
    if len(small) < DELTA_POINTS:
        raise InsufficientData(
            f"{len(small)} grid points below t = {DELTA_CUTOFF:g}; need {DELTA_POINTS}"
        )
    ratios: List[float] = []
    for t in small[:DELTA_POINTS]:
        p = H.primitive(t)
        if p.m3 == 0:
            ratios.append(0.0)
            continue
        if p.m1 <= 0 or p.m2 <= 0:
            raise HypothesisViolation(f"m1 or m2 vanishes at t = {t:g}")
        ratios.append(p.m3 / math.sqrt(p.m1 * p.m2))
    delta = float(np.mean(ratios))
    return min(1.0, max(-1.0, delta))


def sample_grid(t_min: float, t_max: float, samples: int) -> np.ndarray:
    if not 0 < t_min < t_max or samples < 2:
        raise HypothesisViolation("need 0 < t_min < t_max and at least two samples")
    return np.geomspace(t_min, t_max, samples)


def primitive_samples(H: Hamiltonian, grid: Sequence[float]) -> Dict[str, List[Tuple[float, float]]]:
    """(t, m_j(t)) sample lists for j = 1, 2, 3."""
    out: Dict[str, List[Tuple[float, float]]] = {"m1": [], "m2": [], "m3": []}
    for t in grid:
        p = H.primitive(float(t))
        out["m1"].append((float(t), p.m1))
        out["m2"].append((float(t), p.m2))
        out["m3"].append((float(t), p.m3))
    return out


def analyze_primitives(
    H: Hamiltonian, t_min: float = 1e-6, t_max: float = 10.0, samples: int = 61
) -> Tuple[RegVarReport, RegVarReport, float]:
    """Index reports for m1 and m2 together with the delta estimate."""
    grid = sample_grid(t_min, t_max, samples)
    data = primitive_samples(H, grid)
    return (
        estimate_regvar_index(data["m1"]),
        estimate_regvar_index(data["m2"]),
        estimate_delta(H, grid),
    )
