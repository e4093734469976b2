import cmath
import logging
import math
from typing import Iterator, List, Optional

import numpy as np
from prometheus_client import Counter
from scipy import integrate, linalg, optimize

from canonsys.core.config import settings
from canonsys.core.errors import (
    DomainViolation,
    StepSizeUnderflow,
    WeylAtInfinity,
    WeylIndeterminate,
    WeylNonConvergence,
)
from canonsys.models import FundamentalMatrix, WeylDisc, WeylEstimate
from canonsys.services.hamiltonian import Hamiltonian, detect_indivisible_start

logger = logging.getLogger(__name__)

J = np.array([[0.0, -1.0], [1.0, 0.0]])

WEYL_INTEGRATIONS = Counter(
    "weyl_integrations_total", "Nested-disc integrations started"
)
WEYL_FAILURES = Counter(
    "weyl_failures_total",
    "Integrations that ended without a disc below tolerance",
    ["reason"],
)
ODE_RHS_EVALUATIONS = Counter(
    "ode_rhs_evaluations_total", "Right-hand side evaluations of the transfer ODE"
)

# images this close to collinear are treated as a line
COLLINEAR_TOL = 1e-15
# absolute tolerance relative to the step tolerance
ATOL_SCALE = 1e-10
# the seed is searched downward from here
SEED_SEARCH_START = 1e-3
SEED_SEARCH_FLOOR = 1e-300


def _seed_time(H: Hamiltonian, z: complex, seed_mass: float) -> float:
    """A t where max-entry(M(t)) * max(1, |z|) is about seed_mass."""
    scale = max(1.0, abs(z))

    def log_mass(s: float) -> float:
        p = H.primitive(math.exp(s))
        m = max(p.m1, p.m2, abs(p.m3)) * scale
        return (math.log(m) if m > 0 else -math.inf) - math.log(seed_mass)

    hi = math.log(min(SEED_SEARCH_START, 0.5 * H.length))
    if log_mass(hi) <= 0:
        return math.exp(hi)
    lo = hi
    while log_mass(lo) > 0:
        hi = lo
        lo -= math.log(10.0)
        if lo < math.log(SEED_SEARCH_FLOOR):
            raise StepSizeUnderflow("primitive does not vanish at 0; H not integrable")
    if not math.isfinite(log_mass(lo)):
        # primitive underflows: step back up until finite
        while not math.isfinite(log_mass(lo)) and lo < hi:
            lo += 1.0
        if log_mass(lo) > 0:
            return math.exp(lo - 1.0)
    s = optimize.brentq(log_mass, lo, hi, xtol=1e-6)
    # stay on the safe side of the bound
    return math.exp(s) * (1.0 - 1e-6)


def seed_matrix(H: Hamiltonian, t: float, z: complex) -> np.ndarray:
    """First-order start W(t) = I - z M(t) J, error O((|z| |M(t)|)^2)."""
    return np.eye(2, dtype=complex) - z * (H.primitive(t).as_array() @ J)


class TransferMatrixSolver:
    """
    Propagates W(t, z) of dW/dt J = z W H upward in t.

    One instance is one integration: it owns its state and only moves forward.
    Piecewise-constant H is propagated exactly with matrix exponentials;
    otherwise an embedded Runge-Kutta 5(4) pair runs in s = ln t, starting
    from the first-order seed near the origin.
    """

    def __init__(
        self,
        H: Hamiltonian,
        z: complex,
        tol: Optional[float] = None,
        seed_mass: Optional[float] = None,
    ):
        self.H = H
        self.z = complex(z)
        self.tol = tol or settings.ode_tol
        self.t = 0.0
        self.W = np.eye(2, dtype=complex)
        self.det_deviation = 0.0
        self._pieces = H.constant_pieces()
        self.t_seed = (
            0.0
            if self._pieces is not None
            else _seed_time(H, self.z, seed_mass or settings.seed_mass)
        )

    def _propagate_pieces(self, t: float) -> None:
        W = self.W
        for a, b, m in self._pieces:
            lo, hi = max(a, self.t), min(b, t)
            if hi <= lo:
                continue
            W = W @ linalg.expm(-self.z * (hi - lo) * (m @ J))
        self.W = W

    def _rhs(self, s: float, y: np.ndarray) -> np.ndarray:
        t = math.exp(s)
        W = y.reshape(2, 2)
        return (-self.z * t * (W @ self.H.matrix(t) @ J)).ravel()

    def _integrate(self, t: float) -> None:
        sol = integrate.solve_ivp(
            self._rhs,
            (math.log(self.t), math.log(t)),
            self.W.ravel(),
            method="RK45",
            rtol=self.tol,
            atol=self.tol * ATOL_SCALE,
        )
        ODE_RHS_EVALUATIONS.inc(sol.nfev)
        if sol.status < 0:
            raise StepSizeUnderflow(f"integration stopped near t = {t:g}: {sol.message}")
        self.W = sol.y[:, -1].reshape(2, 2)

    def advance(self, t: float) -> np.ndarray:
        if t < self.t:
            raise ValueError("the solver only moves forward in t")
        self.H.check_domain(t)
        if t == self.t:
            return self.W
        if self._pieces is not None:
            self._propagate_pieces(t)
        elif t <= self.t_seed:
            self.W = seed_matrix(self.H, t, self.z)
        else:
            if self.t < self.t_seed or self.t == 0:
                self.W = seed_matrix(self.H, self.t_seed, self.z)
                self.t = self.t_seed
            self._integrate(t)
        self.t = t
        self.det_deviation = max(self.det_deviation, determinant_deviation(self.W))
        return self.W

    def fundamental_matrix(self) -> FundamentalMatrix:
        return FundamentalMatrix.from_array(self.t, self.z, self.W)


def determinant_deviation(W: np.ndarray) -> float:
    """|det W - 1| relative to the size of the two products forming det W."""
    a = W[0, 0] * W[1, 1]
    b = W[0, 1] * W[1, 0]
    return abs(a - b - 1.0) / max(1.0, abs(a) + abs(b))


def fundamental_solution(
    H: Hamiltonian, t: float, z: complex, tol: Optional[float] = None
) -> FundamentalMatrix:
    if tol is not None and tol <= 0:
        raise DomainViolation("tol must be positive")
    solver = TransferMatrixSolver(H, z, tol)
    solver.advance(t)
    return solver.fundamental_matrix()


def weyl_disc(W: FundamentalMatrix) -> WeylDisc:
    """Circle through the Mobius images of tau = 0, 1, inf."""
    p_inf = W.mobius(complex(math.inf, 0.0))
    p0 = W.mobius(0.0)
    p1 = W.mobius(1.0)
    if any(cmath.isinf(p) or cmath.isnan(p) for p in (p_inf, p0, p1)):
        return WeylDisc()
    a, b = p0 - p_inf, p1 - p_inf
    cross = (a.conjugate() * b).imag
    if abs(cross) <= COLLINEAR_TOL * abs(a) * abs(b):
        return WeylDisc()
    offset = (abs(a) ** 2 * b - abs(b) ** 2 * a) / (2j * cross)
    return WeylDisc(center=p_inf + offset, radius=abs(offset))


def checkpoint_schedule(
    t_start: float, t_max: float, t0: float, length: float = math.inf
) -> Iterator[float]:
    """t_k = t0 * 2^k above t_start, ending at t_max (or approaching a finite L)."""
    k = 0 if t_start <= 0 else math.floor(math.log2(t_start / t0)) + 1
    t = t0 * 2.0**k
    while t < min(t_max, length):
        yield t
        k += 1
        t = t0 * 2.0**k
    if t_max < length:
        yield t_max
    else:
        last = t0 * 2.0 ** (k - 1)
        for j in range(1, 60):
            yield length - (length - last) * 2.0**-j


def weyl_estimate(
    H: Hamiltonian,
    z: complex,
    disc_tol: Optional[float] = None,
    t_max: Optional[float] = None,
    tol: Optional[float] = None,
) -> WeylEstimate:
    """
    Nested-disc limit q_H(z) with diagnostics.

    Raises WeylNonConvergence (carrying the last disc) when the radius is
    still above disc_tol at t_max, WeylAtInfinity when H starts with h2 = 0
    on the whole range, and WeylIndeterminate for any other infinite radius.
    """
    z = complex(z)
    if z.imag <= 0:
        raise DomainViolation(f"Im z must be positive, got z = {z}")
    disc_tol = disc_tol or settings.disc_tol
    t_max = t_max or settings.t_max
    WEYL_INTEGRATIONS.inc()

    solver = TransferMatrixSolver(H, z, tol)
    history: List[tuple] = []
    disc = WeylDisc()
    t = 0.0
    for t in checkpoint_schedule(solver.t_seed, t_max, settings.t0, H.length):
        solver.advance(t)
        disc = weyl_disc(solver.fundamental_matrix())
        history.append((t, disc.radius))
        if disc.radius <= disc_tol:
            logger.debug("[WeylNumeric] z=%s converged at t=%.6g", z, t)
            return WeylEstimate(
                z=z,
                value=disc.center,
                disc=disc,
                t_reached=t,
                radius_history=history,
                det_deviation=solver.det_deviation,
            )

    if disc.is_finite:
        WEYL_FAILURES.labels(reason="nonconverged").inc()
        logger.warning(
            "[WeylNumeric] radius %.3g above %.3g at t_max=%.3g (z=%s)",
            disc.radius,
            disc_tol,
            t,
            z,
        )
        raise WeylNonConvergence(
            f"Weyl disc radius {disc.radius:.3g} > {disc_tol:.3g} at t = {t:.6g}",
            disc=disc,
            t=t,
        )
    start = detect_indivisible_start(H, [t])
    if start.variant == "type0":
        WEYL_FAILURES.labels(reason="at_infinity").inc()
        raise WeylAtInfinity(f"h2 vanishes on (0, {t:.6g}]: q_H = infinity")
    WEYL_FAILURES.labels(reason="indeterminate").inc()
    raise WeylIndeterminate(f"Weyl disc radius still infinite at t = {t:.6g}")


def weyl_coefficient(
    H: Hamiltonian,
    z: complex,
    disc_tol: Optional[float] = None,
    t_max: Optional[float] = None,
    tol: Optional[float] = None,
) -> complex:
    return weyl_estimate(H, z, disc_tol=disc_tol, t_max=t_max, tol=tol).value
