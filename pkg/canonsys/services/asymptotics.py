"""
High-energy asymptotics of q_H: the constants relating (alpha, delta, omega),
the scaling functions breve_t and a_H, Kasahara rescalings, and the numerical
verification of q_H(r z) ~ i omega' (r z / i)**alpha.
"""

import asyncio
import cmath
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from canonsys.core.config import settings
from canonsys.core.errors import (
    BoundaryCaseError,
    ConeViolation,
    DomainViolation,
    HypothesisViolation,
)
from canonsys.models import (
    AsymptoticsVerdict,
    CellOutcome,
    ConstantsLedger,
    KasaharaScalers,
    LimitPrimitives,
    PowerData,
    PowerLaw,
    RescalingDeviation,
    cone_half_width,
)
from canonsys.models.models import CONE_TOL
from canonsys.services.grid_batcher import GridBatcher
from canonsys.services.hamiltonian import (
    Hamiltonian,
    PerturbedPowerHamiltonian,
    PiecewiseHamiltonian,
    PowerHamiltonian,
    RapidHamiltonian,
    RescaledHamiltonian,
    invert_increasing,
    trace_inverse,
)
from canonsys.services.power_model import q_power_eval, rescale_power
from canonsys.services.regvar import analyze_primitives
from canonsys.services.specfun import gamma_ratio
from canonsys.services.weyl_numeric import weyl_coefficient

logger = logging.getLogger(__name__)

# 1 - alpha^2 - delta^2 below this fraction of 1 - alpha^2 is the boundary |delta| = sqrt(1 - alpha^2)
DEGENERATE_DELTA = 1e-14
# relative errors below this level count as converged when checking monotone decay
ERROR_NOISE_FLOOR = 1e-5


# ---- constants ledger ----


def alpha_from_indices(rho1: float, rho2: float) -> float:
    """(rho2 - rho1)/(rho2 + rho1); +1 when rho2 is infinite, -1 when rho1 is."""
    if rho1 <= 0 or rho2 <= 0:
        raise DomainViolation("indices must be positive")
    if math.isinf(rho1) and math.isinf(rho2):
        raise DomainViolation("at most one index may be infinite")
    if math.isinf(rho2):
        return 1.0
    if math.isinf(rho1):
        return -1.0
    return (rho2 - rho1) / (rho2 + rho1)


def _check_alpha_delta(alpha: float, delta: float) -> float:
    """Returns 1 - alpha^2 - delta^2, clipped at 0."""
    if not -1 <= alpha <= 1:
        raise DomainViolation(f"alpha must lie in [-1, 1], got {alpha}")
    bound = math.sqrt(1.0 - alpha * alpha)
    if abs(delta) > bound + CONE_TOL:
        raise ConeViolation(f"|delta| = {abs(delta):.6g} exceeds sqrt(1 - alpha^2) = {bound:.6g}")
    return max(1.0 - alpha * alpha - delta * delta, 0.0)


def _on_delta_boundary(alpha: float, gap: float) -> bool:
    return gap <= DEGENERATE_DELTA * (1.0 - alpha * alpha)


def omega_from_alpha_delta(alpha: float, delta: float) -> complex:
    """omega of the trace-normalised ledger as a function of (alpha, delta)."""
    gap = _check_alpha_delta(alpha, delta)
    if abs(alpha) == 1:
        return 1.0 + 0j
    if alpha == 0:
        delta = max(-1.0, min(1.0, delta))
        return complex(math.sqrt(1.0 - delta * delta), -delta)
    base = gamma_ratio(-alpha, 2.0 + alpha)
    if _on_delta_boundary(alpha, gap):
        return (1j * alpha * delta) ** (1.0 + alpha) * base
    s = math.sqrt(gap)
    u = delta / s
    num = 1.0 + 0.5 * alpha * complex(1.0, u)
    den = -0.5 * alpha * complex(1.0, -u)
    return (2.0 * s) ** (1.0 + alpha) * base * gamma_ratio(num, den)


def arg_omega_from_alpha_delta(alpha: float, delta: float) -> float:
    gap = _check_alpha_delta(alpha, delta)
    if abs(alpha) == 1 or delta == 0:
        return 0.0
    if alpha == 0:
        return -math.asin(max(-1.0, min(1.0, delta)))
    half = cone_half_width(alpha)
    if _on_delta_boundary(alpha, gap):
        return -math.copysign(half, delta)
    return -math.atan(
        math.tan(half) * math.tanh(0.5 * math.pi * abs(alpha) * delta / math.sqrt(gap))
    )


def delta_from_arg_omega(alpha: float, arg_omega: float) -> float:
    """Inverse of arg_omega_from_alpha_delta at fixed alpha."""
    if not -1 <= alpha <= 1:
        raise DomainViolation(f"alpha must lie in [-1, 1], got {alpha}")
    half = cone_half_width(alpha)
    if abs(arg_omega) > half + CONE_TOL:
        raise ConeViolation(
            f"|arg omega| = {abs(arg_omega):.6g} outside the cone {half:.6g}"
        )
    if arg_omega == 0 or abs(alpha) == 1:
        return 0.0
    if alpha == 0:
        return -math.sin(arg_omega)
    bound = math.sqrt(1.0 - alpha * alpha)
    ratio = math.tan(arg_omega) / math.tan(half)
    if abs(arg_omega) >= half or abs(ratio) >= 1.0:
        return -math.copysign(bound, arg_omega)
    c = 2.0 / (math.pi * abs(alpha)) * math.atanh(ratio)
    return -c * bound / math.sqrt(1.0 + c * c)


def predict_power_asymptotics(
    c1: float, c2: float, c3: float, rho1: float, rho2: float
) -> PowerLaw:
    """
    Law (alpha, omega') of q for primitives m_i ~ c_i t^rho_i at 0:
    omega' = c1^((alpha+1)/2) c2^((alpha-1)/2) omega(alpha, c3/sqrt(c1 c2)).
    """
    if c1 <= 0 or c2 <= 0:
        raise BoundaryCaseError("c1 and c2 must be positive")
    alpha = alpha_from_indices(rho1, rho2)
    delta = c3 / math.sqrt(c1 * c2)
    omega = omega_from_alpha_delta(alpha, delta)
    omega_prime = c1 ** (0.5 * (alpha + 1.0)) * c2 ** (0.5 * (alpha - 1.0)) * omega
    return PowerLaw(alpha=alpha, omega=omega_prime)


def constants_ledger(data: PowerData) -> ConstantsLedger:
    if data.boundary is not None:
        raise BoundaryCaseError(f"no ledger for the boundary class {data.boundary}")
    c1, c2, c3 = data.coefficients()
    alpha = alpha_from_indices(data.rho1, data.rho2)
    delta = c3 / math.sqrt(c1 * c2)
    omega = omega_from_alpha_delta(alpha, delta)
    law = predict_power_asymptotics(c1, c2, c3, data.rho1, data.rho2)
    return ConstantsLedger(
        rho1=data.rho1,
        rho2=data.rho2,
        sigma=min(data.rho1, data.rho2),
        alpha=alpha,
        delta=delta,
        omega=omega,
        omega_prime=law.omega,
        arg_omega=arg_omega_from_alpha_delta(alpha, delta),
        c1=c1,
        c2=c2,
        c3=c3,
    )


# ---- scaling functions ----


def breve_t(H: Hamiltonian, r: float) -> float:
    """The t with m1(t) m2(t) = 1/r^2."""
    if r <= 0:
        raise DomainViolation(f"r must be positive, got {r}")
    if isinstance(H, PowerHamiltonian):
        c1, c2, _ = H.data.coefficients()
        if c1 == 0 or c2 == 0:
            raise BoundaryCaseError("m1 m2 vanishes identically")
        return (c1 * c2 * r * r) ** (-1.0 / (H.data.rho1 + H.data.rho2))

    def product(t: float) -> float:
        p = H.primitive(t)
        return p.m1 * p.m2

    return invert_increasing(product, 1.0 / (r * r), H.length)


def a_H(H: Hamiltonian, r: float) -> float:
    """sqrt(m1/m2) at breve_t(r); equals r m1(breve_t) = 1/(r m2(breve_t))."""
    p = H.primitive(breve_t(H, r))
    if p.m2 <= 0:
        raise HypothesisViolation("m2 vanishes at breve_t")
    return math.sqrt(p.m1 / p.m2)


def kasahara_scalers(H: Hamiltonian, r: float) -> KasaharaScalers:
    """b1 = r sqrt(t m2(t)), b2 = r sqrt(t m1(t)) at t = breve_t(r); b1 b2 / r = breve_t."""
    t = breve_t(H, r)
    p = H.primitive(t)
    return KasaharaScalers(b1=r * math.sqrt(t * p.m2), b2=r * math.sqrt(t * p.m1))


def rescale(H: Hamiltonian, r: float, b1: float, b2: float) -> Hamiltonian:
    """
    Entries b1^2 h1(lam t), b2^2 h2(lam t), b1 b2 h3(lam t) with lam = b1 b2 / r;
    the Weyl coefficient becomes (b1/b2) q_H(r z).
    """
    if r <= 0 or b1 <= 0 or b2 <= 0:
        raise DomainViolation("r, b1 and b2 must be positive")
    if isinstance(H, PowerHamiltonian):
        return PowerHamiltonian(rescale_power(H.data, r, b1, b2))
    pieces = H.constant_pieces()
    if pieces is not None:
        lam = b1 * b2 / r
        scale = np.array([[b1 * b1, b1 * b2], [b1 * b2, b2 * b2]])
        return PiecewiseHamiltonian([((b - a) / lam, m * scale) for a, b, m in pieces])
    return RescaledHamiltonian(H, r, b1, b2)


# ---- rescaling limits ----


def limit_primitives(H: Hamiltonian) -> LimitPrimitives:
    """Indices and delta of the rescaling limit; estimated from samples when not known."""
    if isinstance(H, (PowerHamiltonian, PerturbedPowerHamiltonian)):
        c1, c2, c3 = H.data.coefficients()
        return LimitPrimitives(
            rho1=H.data.rho1, rho2=H.data.rho2, delta=c3 / math.sqrt(c1 * c2)
        )
    if isinstance(H, RapidHamiltonian):
        if H.rapid_entry == 2:
            return LimitPrimitives(rho1=H.rho, rho2=math.inf)
        return LimitPrimitives(rho1=math.inf, rho2=H.rho)
    m1, m2, delta = analyze_primitives(H)
    return LimitPrimitives(rho1=m1.index, rho2=m2.index, delta=delta)


def _indicator_limit(rapid_entry: int, T: float):
    """Trace-normalised limit primitives when one entry varies rapidly."""
    slow, fast = min(T, 1.0), max(T - 1.0, 0.0)
    return (slow, fast) if rapid_entry == 2 else (fast, slow)


def rescaling_limit_check(
    H: Hamiltonian,
    r_values: Sequence[float],
    x_grid: Sequence[float],
    limit: Optional[LimitPrimitives] = None,
) -> List[RescalingDeviation]:
    """
    Per r, the largest deviation of the Kasahara-rescaled primitives from the
    limit x^rho1, x^rho2, delta x^rho3 over x_grid. With a rapidly varying
    entry, x_grid holds trace values T and the trace-normalised primitives are
    compared with min(T, 1) and max(T - 1, 0).
    """
    if any(b <= a for a, b in zip(r_values, r_values[1:])):
        raise DomainViolation("r values must be strictly increasing")
    limit = limit or limit_primitives(H)
    rows: List[RescalingDeviation] = []
    for r in r_values:
        t = breve_t(H, r)
        scalers = kasahara_scalers(H, r)
        Hr = rescale(H, r, scalers.b1, scalers.b2)
        dev = [0.0, 0.0, 0.0]
        for x in x_grid:
            if limit.rapid:
                T = float(x)
                p = Hr.primitive(trace_inverse(Hr, T))
                target = _indicator_limit(2 if math.isinf(limit.rho2) else 1, T)
                got = (p.m1, p.m2, p.m3)
                want = (*target, 0.0)
            else:
                p = Hr.primitive(float(x))
                got = (p.m1, p.m2, p.m3)
                want = (
                    x**limit.rho1,
                    x**limit.rho2,
                    limit.delta * x**limit.rho3,
                )
            for j in range(3):
                dev[j] = max(dev[j], abs(got[j] - want[j]))
        rows.append(RescalingDeviation(r=r, breve_t=t, m1=dev[0], m2=dev[1], m3=dev[2]))
        logger.debug("[Asymptotics] r=%.3g deviation=%.3g", r, rows[-1].deviation)
    return rows


# ---- verification against a power law ----


def _check_angles(angles: Sequence[float]) -> None:
    for phi in angles:
        if not 0 < phi < math.pi:
            raise DomainViolation(f"angle {phi:g} is not in (0, pi)")


def _is_decreasing(column: Sequence[Optional[float]]) -> bool:
    if any(e is None for e in column):
        return False
    return all(b <= max(a, ERROR_NOISE_FLOOR) for a, b in zip(column, column[1:]))


def _verdict(
    law: PowerLaw,
    r_grid: Sequence[float],
    angles: Sequence[float],
    outcomes: List[CellOutcome],
    threshold: float,
) -> AsymptoticsVerdict:
    errors: List[List[Optional[float]]] = []
    statuses: List[List[str]] = []
    k = 0
    for r in r_grid:
        err_row: List[Optional[float]] = []
        status_row: List[str] = []
        for phi in angles:
            outcome = outcomes[k]
            k += 1
            status_row.append(outcome.status)
            if outcome.ok:
                expected = q_power_eval(law, r * cmath.exp(1j * phi))
                err_row.append(abs(outcome.value / expected - 1.0))
            else:
                err_row.append(None)
        errors.append(err_row)
        statuses.append(status_row)
    columns = [[row[j] for row in errors] for j in range(len(angles))]
    decreasing = all(_is_decreasing(col) for col in columns)
    final_ok = all(e is not None and e <= threshold for e in errors[-1])
    return AsymptoticsVerdict(
        r_grid=list(r_grid),
        angles=list(angles),
        relative_errors=errors,
        statuses=statuses,
        threshold=threshold,
        decreasing=decreasing,
        passed=decreasing and final_ok,
    )


async def verify_asymptotics_async(
    H: Hamiltonian,
    law: PowerLaw,
    r_grid: Sequence[float],
    angles: Sequence[float],
    threshold: float = 0.05,
    disc_tol: Optional[float] = None,
    t_max: Optional[float] = None,
    tol: Optional[float] = None,
    batcher: Optional[GridBatcher] = None,
) -> AsymptoticsVerdict:
    """|q_H(r e^{i phi}) / (i omega' (r e^{i phi}/i)^alpha) - 1| on the (r, phi) grid."""
    if not r_grid or any(b <= a for a, b in zip(r_grid, r_grid[1:])):
        raise DomainViolation("r grid must be nonempty and strictly increasing")
    _check_angles(angles)
    if law.omega == 0:
        raise DomainViolation("the comparison law needs omega != 0")
    batcher = batcher or GridBatcher()

    def cell(z: complex):
        def run(horizon: float) -> complex:
            return weyl_coefficient(H, z, disc_tol=disc_tol, t_max=horizon, tol=tol)

        return run

    cells = [cell(r * cmath.exp(1j * phi)) for r in r_grid for phi in angles]
    outcomes = await batcher.run(cells, t_max or settings.t_max)
    verdict = _verdict(law, r_grid, angles, outcomes, threshold)
    logger.info(
        "[Asymptotics] verify: decreasing=%s passed=%s", verdict.decreasing, verdict.passed
    )
    return verdict


def verify_asymptotics(
    H: Hamiltonian,
    law: PowerLaw,
    r_grid: Sequence[float],
    angles: Sequence[float],
    threshold: float = 0.05,
    disc_tol: Optional[float] = None,
    t_max: Optional[float] = None,
    tol: Optional[float] = None,
    batcher: Optional[GridBatcher] = None,
) -> AsymptoticsVerdict:
    return asyncio.run(
        verify_asymptotics_async(
            H,
            law,
            r_grid,
            angles,
            threshold=threshold,
            disc_tol=disc_tol,
            t_max=t_max,
            tol=tol,
            batcher=batcher,
        )
    )
