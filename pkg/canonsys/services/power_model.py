"""
Power Hamiltonians h_i(t) = kappa_i t**(rho_i - 1) and their power-law Weyl
coefficients q(z) = i*omega*(z/i)**alpha.

Closed-form direct map, boundary classes, argument law, inverse problem,
reparameterisation kernel, and the Kummer-function fundamental solution.
"""

import cmath
import logging
import math
from typing import Optional, Tuple, Union

from scipy import optimize

from canonsys.core.errors import (
    BoundaryCaseError,
    ConeViolation,
    HypothesisViolation,
)
from canonsys.models import (
    BoundaryVerdict,
    InverseSolution,
    KummerParameters,
    PowerData,
    PowerLaw,
    ReparamWitness,
    StepData,
    cone_half_width,
)
from canonsys.models.models import CONE_TOL
from canonsys.services.specfun import (
    bessel_frak,
    gamma_ratio,
    kummer_M,
    kummer_M_derivative,
    log_sin_pi,
    loggamma_complex,
)

logger = logging.getLogger(__name__)

# kappa**2 <= DEGENERATE_KAPPA * kappa1 * kappa2 counts as kappa = 0
DEGENERATE_KAPPA = 1e-14
RHO_EQUAL_TOL = 1e-12
REPARAM_TOL = 1e-12
REPARAM_KAPPA_TOL = 1e-10
ANGLE_TOL = 1e-12
# relative step of the five-point difference stencils
FD_STEP = 0.01


def q_power_eval(law: PowerLaw, z: complex) -> complex:
    """i*omega*(z/i)**alpha on the principal branch."""
    z = complex(z)
    if law.alpha == 0:
        return 1j * law.omega
    return 1j * law.omega * (z / 1j) ** law.alpha


def _require_interior(data: PowerData) -> None:
    if data.boundary is not None:
        raise BoundaryCaseError(
            f"kappa1 = {data.kappa1:g}, kappa2 = {data.kappa2:g}: "
            f"boundary class {data.boundary}, see boundary_case"
        )


def _rho_equal(data: PowerData) -> bool:
    return abs(data.rho1 - data.rho2) <= RHO_EQUAL_TOL * max(data.rho1, data.rho2)


def _degenerate(data: PowerData) -> bool:
    return data.kappa**2 <= DEGENERATE_KAPPA * data.kappa1 * data.kappa2


def kummer_parameters(data: PowerData) -> KummerParameters:
    """a_pm = (1 +- rho2/rho3 - i (kappa3/kappa)(rho1-rho2)/(rho1+rho2)) / 2, b_pm = 1 +- rho2/rho3."""
    _require_interior(data)
    if _degenerate(data):
        raise HypothesisViolation("Kummer parameters need kappa > 0")
    q = data.rho2 / data.rho3
    shift = 1j * (data.kappa3 / data.kappa) * (data.rho1 - data.rho2) / (
        data.rho1 + data.rho2
    )
    return KummerParameters(
        a_plus=0.5 * (1.0 + q - shift),
        a_minus=0.5 * (1.0 - q - shift),
        b_plus=1.0 + q,
        b_minus=1.0 - q,
    )


def closed_form_q(data: PowerData) -> PowerLaw:
    """
    Exact power law of H_{rho,kappa} for kappa1, kappa2 > 0.

    Three regimes: rho1 = rho2 gives omega = (kappa - i kappa3)/kappa2; kappa = 0
    gives the (i alpha kappa3)**(1+alpha) limit; otherwise the Gamma-ratio formula.
    """
    _require_interior(data)
    alpha = data.alpha
    k1, k2, k3 = data.kappa1, data.kappa2, data.kappa3
    rho3 = data.rho3

    if _rho_equal(data):
        return PowerLaw(alpha=0.0, omega=complex(data.kappa, -k3) / k2)

    base = gamma_ratio(-alpha, 1.0 + alpha) / (k2 * rho3**alpha)
    if _degenerate(data):
        omega = (1j * alpha * k3) ** (1.0 + alpha) * base
    else:
        ratio = k3 / data.kappa
        num = 1.0 + 0.5 * alpha * complex(1.0, ratio)
        den = -0.5 * alpha * complex(1.0, -ratio)
        omega = (2.0 * data.kappa) ** (1.0 + alpha) * base * gamma_ratio(num, den)
    logger.debug("[PowerModel] alpha=%.6g omega=%s", alpha, omega)
    return PowerLaw(alpha=alpha, omega=omega)


def omega_modulus_sine_form(data: PowerData) -> complex:
    """
    omega through |Gamma(1 + (alpha/2)(1 + i k))|^2 sin(pi alpha/2 (1 - i k)) / sin(pi alpha),
    k = kappa3/kappa. Independent of the Gamma-ratio branch of closed_form_q.
    """
    _require_interior(data)
    if _rho_equal(data) or _degenerate(data):
        raise HypothesisViolation("modulus-sine form needs rho1 != rho2 and kappa > 0")
    alpha = data.alpha
    ratio = data.kappa3 / data.kappa
    log_omega = (
        (1.0 + alpha) * math.log(2.0 * data.kappa)
        - math.log(data.kappa2)
        - alpha * math.log(data.rho3)
        + 2.0 * loggamma_complex(1.0 + 0.5 * alpha * complex(1.0, ratio)).real
        - 2.0 * loggamma_complex(1.0 + alpha).real
        + log_sin_pi(0.5 * alpha * complex(1.0, -ratio))
        - log_sin_pi(complex(alpha))
    )
    return cmath.exp(log_omega)


def arg_omega(data: PowerData) -> float:
    """arg omega of closed_form_q(data), without evaluating any Gamma function."""
    _require_interior(data)
    alpha = data.alpha
    k3 = data.kappa3
    if _degenerate(data):
        return -math.copysign(cone_half_width(alpha), k3) if k3 != 0 else 0.0
    if _rho_equal(data):
        return -math.atan(k3 / data.kappa)
    return -math.atan(
        math.tan(cone_half_width(alpha))
        * math.tanh(0.5 * math.pi * abs(alpha) * k3 / data.kappa)
    )


def boundary_case(data: Union[PowerData, StepData]) -> BoundaryVerdict:
    """
    Weyl coefficient of the boundary classes of the model.

    kappa2 = kappa3 = 0 gives q = infinity, kappa1 = kappa3 = 0 gives q = 0.
    The step Hamiltonian diag(1, 0) on (0, omega] then diag(0, 1) gives omega*z;
    its transpose (switch point 1/omega) gives -omega/z.
    """
    if isinstance(data, StepData):
        alpha = -1.0 if data.transposed else 1.0
        return BoundaryVerdict(
            kind="power_law", law=PowerLaw(alpha=alpha, omega=data.omega)
        )
    if data.boundary is None:
        raise BoundaryCaseError(
            "kappa1 and kappa2 are both positive: not a boundary class"
        )
    return BoundaryVerdict(kind=data.boundary)


def indices_from_alpha(alpha: float, sigma: float) -> Tuple[float, float]:
    """(rho1, rho2) with min = sigma and (rho2 - rho1)/(rho2 + rho1) = alpha."""
    if alpha >= 0:
        return sigma, (1.0 + alpha) / (1.0 - alpha) * sigma
    return (1.0 - alpha) / (1.0 + alpha) * sigma, sigma


def inverse_problem(
    alpha: float,
    omega_hat: complex,
    kappa1: float,
    kappa2: float,
    sigma: float,
) -> InverseSolution:
    """
    Power data whose Weyl coefficient is (1/gamma) * i*omega_hat*(z/i)**alpha.

    kappa3 is the root of arg_omega = arg omega_hat on [-sqrt(k1 k2), sqrt(k1 k2)],
    where arg_omega is a strictly decreasing bijection onto the cone.
    """
    if not -1 < alpha < 1:
        raise HypothesisViolation(f"alpha must lie in (-1, 1), got {alpha}")
    if omega_hat == 0:
        raise HypothesisViolation("omega_hat must be nonzero")
    if kappa1 <= 0 or kappa2 <= 0 or sigma <= 0:
        raise HypothesisViolation("kappa1, kappa2 and sigma must be positive")
    target = cmath.phase(omega_hat)
    half = cone_half_width(alpha)
    if abs(target) > half + CONE_TOL:
        raise ConeViolation(
            f"|arg omega_hat| = {abs(target):.6g} exceeds {half:.6g} for alpha = {alpha}"
        )
    rho1, rho2 = indices_from_alpha(alpha, sigma)
    bound = math.sqrt(kappa1 * kappa2)

    def data_for(k3: float) -> PowerData:
        return PowerData(rho1=rho1, rho2=rho2, kappa1=kappa1, kappa2=kappa2, kappa3=k3)

    if abs(target) >= half - ANGLE_TOL:
        kappa3 = -math.copysign(bound, target)
    elif target == 0:
        kappa3 = 0.0
    else:
        kappa3 = optimize.brentq(
            lambda k3: arg_omega(data_for(k3)) - target,
            -bound,
            bound,
            xtol=1e-15 * bound,
            rtol=4.5e-16,
        )
    data = data_for(kappa3)
    omega = closed_form_q(data).omega
    gamma = abs(omega_hat) / abs(omega)
    logger.info(
        "[PowerModel] inverse: rho=(%.6g, %.6g) kappa3=%.12g gamma=%.12g",
        rho1,
        rho2,
        kappa3,
        gamma,
    )
    return InverseSolution(data=data, gamma=gamma)


def reparam_equivalent(d1: PowerData, d2: PowerData) -> Optional[ReparamWitness]:
    """(beta, c) with rho~_i = beta rho_i and kappa~_i = beta c**rho_i kappa_i, or None."""
    _require_interior(d1)
    _require_interior(d2)
    beta = d2.rho1 / d1.rho1
    if abs(d2.rho2 - beta * d1.rho2) > REPARAM_TOL * d2.rho2:
        return None
    c = (d2.kappa1 / (beta * d1.kappa1)) ** (1.0 / d1.rho1)
    expected2 = beta * c**d1.rho2 * d1.kappa2
    if abs(d2.kappa2 - expected2) > REPARAM_KAPPA_TOL * d2.kappa2:
        return None
    expected3 = beta * c**d1.rho3 * d1.kappa3
    scale = math.sqrt(d2.kappa1 * d2.kappa2)
    if abs(d2.kappa3 - expected3) > REPARAM_KAPPA_TOL * scale:
        return None
    return ReparamWitness(beta=beta, c=c)


def rescale_power(data: PowerData, r: float, b1: float, b2: float) -> PowerData:
    """Closed form of the (r, b1, b2) rescaling; q becomes (b1/b2) q(r z)."""
    if r <= 0 or b1 <= 0 or b2 <= 0:
        raise HypothesisViolation("r, b1 and b2 must be positive")
    lam = b1 * b2 / r
    return PowerData(
        rho1=data.rho1,
        rho2=data.rho2,
        rho3=data.rho3,
        kappa1=b1 * b1 * lam ** (data.rho1 - 1.0) * data.kappa1,
        kappa2=b2 * b2 * lam ** (data.rho2 - 1.0) * data.kappa2,
        kappa3=b1 * b2 * lam ** (data.rho3 - 1.0) * data.kappa3,
    )


# ---- fundamental solution of the power Hamiltonian ----


def solution_entries_power(
    data: PowerData, x: float, z: complex
) -> Tuple[complex, complex]:
    """
    (w11, w21)(x, z) in Kummer form:
        w11 = e^{s/2} M(a-, b-, -s),  w21 = -(kappa2/rho2) z x^rho2 e^{s/2} M(a+, b+, -s)
    with s = 2 i kappa z x^rho3 / rho3.
    """
    _require_interior(data)
    if _rho_equal(data) or _degenerate(data):
        raise HypothesisViolation("Kummer form needs rho1 != rho2 and kappa > 0")
    if x < 0:
        raise HypothesisViolation(f"x must be nonnegative, got {x}")
    if x == 0:
        return 1.0 + 0j, 0j
    z = complex(z)
    p = kummer_parameters(data)
    half = 1j * data.kappa * z * x**data.rho3 / data.rho3
    lead = cmath.exp(half)
    w11 = lead * kummer_M(p.a_minus, p.b_minus, -2.0 * half)
    w21 = (
        -data.kappa2
        / data.rho2
        * z
        * x**data.rho2
        * lead
        * kummer_M(p.a_plus, p.b_plus, -2.0 * half)
    )
    return w11, w21


def solution_entries_bessel(
    data: PowerData, x: float, z: complex
) -> Tuple[complex, complex]:
    """
    (w11, w21) for kappa3 = 0 through the entire Bessel-type function:
        w11 = J_{-nu}(y),  w21 = -(kappa2/rho2) z x^rho2 J_{nu}(y),
    nu = rho2/(rho1+rho2), y = sqrt(kappa1 kappa2) z x^rho3 / rho3.
    """
    _require_interior(data)
    if data.kappa3 != 0:
        raise HypothesisViolation("Bessel form needs kappa3 = 0")
    if x == 0:
        return 1.0 + 0j, 0j
    z = complex(z)
    nu = data.rho2 / (data.rho1 + data.rho2)
    y = math.sqrt(data.kappa1 * data.kappa2) * z * x**data.rho3 / data.rho3
    w11 = bessel_frak(-nu, y)
    w21 = -data.kappa2 / data.rho2 * z * x**data.rho2 * bessel_frak(nu, y)
    return w11, w21


def _five_point(f, x: float, h: float) -> Tuple[complex, complex]:
    """First and second derivative from the symmetric five-point stencil."""
    fm2, fm1, f0, fp1, fp2 = (f(x + k * h) for k in (-2, -1, 0, 1, 2))
    d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
    d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h)
    return d1, d2


def power_ode_residual(data: PowerData, x: float, z: complex) -> float:
    """
    Relative residual of the scalar equation for y1 = w11:
        (y1'/h2)' + [z (h3/h2)' + z^2 (h1 - h3^2/h2)] y1 = 0,
    derivatives by five-point differences with step 0.01 x.
    """
    if x <= 0:
        raise HypothesisViolation("residual needs x > 0")
    z = complex(z)
    k2, r1, r2 = data.kappa2, data.rho1, data.rho2
    h = FD_STEP * x

    def y1(t: float) -> complex:
        return solution_entries_power(data, t, z)[0]

    dy, d2y = _five_point(y1, x, h)
    y = y1(x)
    inv_h2 = x ** (1.0 - r2) / k2
    inv_h2_prime = (1.0 - r2) * x ** (-r2) / k2
    coupling = data.kappa3 / k2 * 0.5 * (r1 - r2) * x ** (0.5 * (r1 - r2) - 1.0)
    potential = data.kappa**2 / k2 * x ** (r1 - 1.0)
    terms = (
        inv_h2 * d2y,
        inv_h2_prime * dy,
        z * coupling * y,
        z * z * potential * y,
    )
    scale = max(abs(t) for t in terms)
    return abs(sum(terms)) / scale if scale > 0 else 0.0


# ---- u'' + (c x^(g-2) - d^2 x^(2g-2)) u = 0 ----


def _kummer_checks(d: complex, gamma: float, x: float) -> None:
    if d == 0:
        raise HypothesisViolation("d must be nonzero")
    if gamma <= 0 or gamma == 1:
        raise HypothesisViolation(f"gamma must be positive and != 1, got {gamma}")
    if x <= 0:
        raise HypothesisViolation(f"x must be positive, got {x}")


def kummer_solutions(
    c: complex, d: complex, gamma: float, x: float
) -> Tuple[complex, complex, complex, complex]:
    """(u+, u+', u-, u-') at x, derivatives from M'(a, b, s) = (a/b) M(a+1, b+1, s)."""
    c, d = complex(c), complex(d)
    _kummer_checks(d, gamma, x)
    xg = x**gamma
    s = 2.0 * d / gamma * xg
    env = cmath.exp(-d / gamma * xg)

    a_p = (gamma + 1.0 - c / d) / (2.0 * gamma)
    b_p = (gamma + 1.0) / gamma
    m_p = kummer_M(a_p, b_p, s)
    dm_p = kummer_M_derivative(a_p, b_p, s)

    a_m = (gamma - 1.0 - c / d) / (2.0 * gamma)
    b_m = (gamma - 1.0) / gamma
    m_m = kummer_M(a_m, b_m, s)
    dm_m = kummer_M_derivative(a_m, b_m, s)

    u_plus = x * env * m_p
    du_plus = env * (m_p * (1.0 - d * xg) + 2.0 * d * xg * dm_p)
    u_minus = env * m_m
    du_minus = d * x ** (gamma - 1.0) * env * (2.0 * dm_m - m_m)
    return u_plus, du_plus, u_minus, du_minus


def kummer_wronskian(c: complex, d: complex, gamma: float, x: float) -> complex:
    """u+ u-' - u+' u-; constant -1 for every x."""
    u_p, du_p, u_m, du_m = kummer_solutions(c, d, gamma, x)
    return u_p * du_m - du_p * u_m


def kummer_small_x_expansion(
    c: complex, gamma: float, x: float
) -> Tuple[complex, complex, complex, complex]:
    """Leading terms of (u+, u+', u-, u-') as x -> 0."""
    c = complex(c)
    xg = x**gamma
    return (
        x - c / (gamma * (gamma + 1.0)) * x * xg,
        1.0 - c / gamma * xg,
        1.0 - c / ((gamma - 1.0) * gamma) * xg,
        -c / (gamma - 1.0) * x ** (gamma - 1.0),
    )


def kummer_solutions_check(c: complex, d: complex, gamma: float, x: float) -> float:
    """
    Largest relative ODE residual of u+ and u- at x, together with the
    deviation of their Wronskian from -1.
    """
    c, d = complex(c), complex(d)
    _kummer_checks(d, gamma, x)
    h = FD_STEP * x
    u_p, _, u_m, _ = kummer_solutions(c, d, gamma, x)
    worst = abs(kummer_wronskian(c, d, gamma, x) + 1.0)
    for index, u in ((1, u_p), (3, u_m)):

        def deriv(t: float, index=index) -> complex:
            return kummer_solutions(c, d, gamma, t)[index]

        # u'' from differences of the analytic first derivative
        d2u, _ = _five_point(deriv, x, h)
        potential = (c * x ** (gamma - 2.0), -d * d * x ** (2.0 * gamma - 2.0))
        scale = max(abs(d2u), abs(potential[0] * u), abs(potential[1] * u))
        residual = d2u + (potential[0] + potential[1]) * u
        worst = max(worst, abs(residual) / scale if scale > 0 else 0.0)
    return worst
