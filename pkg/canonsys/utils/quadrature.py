"""Quadrature helpers for integrands with a power-type singularity at t = 0."""

import math
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from canonsys.core.errors import PrimitiveIntegrationError

# ratio between the two sample points of the endpoint rule
PROBE_RATIO = 0.5
# the endpoint rule covers (0, t * TAIL_FRACTION]
TAIL_FRACTION = 1e-10
# quadpack warnings are tolerated while the error estimate stays this close
ACCEPT_FACTOR = 100.0


def power_law_exponent(t_hi: float, f_hi: float, t_lo: float, f_lo: float) -> float:
    """Exponent p of f ~ C t^p fitted through two sample points."""
    if f_hi <= 0 or f_lo <= 0:
        return math.nan
    return math.log(f_hi / f_lo) / math.log(t_hi / t_lo)


def power_law_tail(f: Callable[[float], float], t0: float) -> float:
    """integral_0^t0 f assuming f ~ C t^p below t0, p fitted from f(t0), f(t0/2)."""
    f_hi = f(t0)
    if f_hi == 0:
        return 0.0
    f_lo = f(PROBE_RATIO * t0)
    p = power_law_exponent(t0, abs(f_hi), PROBE_RATIO * t0, abs(f_lo))
    if not math.isfinite(p) or p <= -1:
        raise PrimitiveIntegrationError(
            f"integrand not integrable at 0 (fitted exponent {p:.3g})"
        )
    return t0 * f_hi / (p + 1.0)


def log_quad(f: Callable[[float], float], a: float, b: float, rel_tol: float) -> float:
    """integral_a^b f(t) dt computed as integral of f(e^s) e^s ds, split at t = 1."""
    if b <= a:
        return 0.0
    lo, hi = math.log(a), math.log(b)
    pieces = [lo, hi] if not lo < 0 < hi else [lo, 0.0, hi]
    total = 0.0
    for s0, s1 in zip(pieces, pieces[1:]):
        result = integrate.quad(
            lambda s: f(math.exp(s)) * math.exp(s),
            s0,
            s1,
            epsabs=0.0,
            epsrel=rel_tol,
            limit=200,
            full_output=1,
        )
        value, abserr = result[0], result[1]
        # a 4-tuple carries quadpack's failure message
        if len(result) == 4 and abserr > ACCEPT_FACTOR * rel_tol * abs(value):
            raise PrimitiveIntegrationError(
                f"quadrature failed on [{math.exp(s0):.3g}, {math.exp(s1):.3g}]: "
                f"{result[3]}"
            )
        total += value
    return total


def primitive_from_origin(f: Callable[[float], float], t: float, rel_tol: float) -> float:
    """integral_0^t f with the endpoint rule on (0, t0] and adaptive quadrature above."""
    if t <= 0:
        return 0.0
    t0 = t * TAIL_FRACTION
    return power_law_tail(f, t0) + log_quad(f, t0, t, rel_tol)


def accumulate_power_law(ts: Sequence[float], fs: Sequence[float]) -> np.ndarray:
    """
    Running integral_0^{t_k} f from positive samples, exact for pure powers.

    Each gap uses the local power law through its two endpoints; the stretch
    below the first sample uses the exponent of the first gap.
    """
    t = np.asarray(ts, dtype=float)
    f = np.asarray(fs, dtype=float)
    order = np.argsort(t)
    t, f = t[order], f[order]
    if len(t) < 2 or np.any(f <= 0):
        raise ValueError("need at least two positive samples")
    p = np.log(f[1:] / f[:-1]) / np.log(t[1:] / t[:-1])
    if p[0] <= -1:
        raise PrimitiveIntegrationError("samples not integrable at 0")
    out = np.empty_like(t)
    out[0] = t[0] * f[0] / (p[0] + 1.0)
    for k in range(1, len(t)):
        q = p[k - 1]
        if abs(q + 1.0) < 1e-12:
            gap = t[k - 1] * f[k - 1] * math.log(t[k] / t[k - 1])
        else:
            gap = (t[k] * f[k] - t[k - 1] * f[k - 1]) / (q + 1.0)
        out[k] = out[k - 1] + gap
    inverse = np.empty_like(order)
    inverse[order] = np.arange(len(order))
    return out[inverse]
