"""Complex special functions: Gamma, Kummer M = 1F1 and the entire Bessel-type 0F1."""

import cmath
import logging
import math
from typing import Tuple

import mpmath
from mpmath.libmp import NoConvergence
from scipy import special

from canonsys.core.config import settings
from canonsys.core.errors import (
    DomainViolation,
    GammaPoleError,
    KummerNonConvergence,
    KummerParameterPole,
    SpecialFunctionOverflow,
)

logger = logging.getLogger(__name__)

# Lanczos approximation, g = 7, n = 9
LANCZOS_G = 7.0
LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
LOG_PI = math.log(math.pi)
# largest x with exp(x) finite
LOG_MAX_FLOAT = math.log(1.7976931348623157e308)

KUMMER_DOMAIN = 100.0
KUMMER_STOP_RATIO = 1e-17
KUMMER_STOP_RUN = 3
SERIES_EPS = 2.220446049250313e-16
# digits the double series may lose and still be within 1e-10 relative
KUMMER_LOST_DIGITS = math.log10(1e-10 / SERIES_EPS)
KUMMER_BASE_DPS = 20
KUMMER_MAX_EXTRA_DPS = 60

# below this |x| the 0F1 series is used directly
FRAK_SERIES_RADIUS = 2.0


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


def log_sin_pi(z: complex) -> complex:
    """log(sin(pi*z)) modulo 2*pi*i, stable for large |Im z| and near integers."""
    n = round(z.real)
    w = math.pi * (z - n)
    if abs(w.imag) < 20.0:
        core = cmath.log(cmath.sin(w))
    elif w.imag > 0:
        # sin w = e^{-iw} (e^{2iw} - 1) / (2i)
        core = -1j * w + cmath.log((cmath.exp(2j * w) - 1.0) / 2j)
    else:
        core = 1j * w + cmath.log((1.0 - cmath.exp(-2j * w)) / 2j)
    # sin(pi z) = (-1)^n sin(pi (z - n))
    return core + 1j * math.pi * n


def loggamma_complex(z: complex) -> complex:
    """
    log Gamma(z) up to a multiple of 2*pi*i.

    Lanczos on Re z >= 1/2, reflection Gamma(z)Gamma(1-z) = pi/sin(pi z) below.
    Only exp() of the result, or differences exponentiated, are meaningful.
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise GammaPoleError(f"Gamma has a pole at z = {z.real:g}")
    if z.real < 0.5:
        return LOG_PI - log_sin_pi(z) - loggamma_complex(1.0 - z)
    z -= 1.0
    acc = LANCZOS_COEFFS[0]
    for k in range(1, len(LANCZOS_COEFFS)):
        acc += LANCZOS_COEFFS[k] / (z + k)
    t = z + LANCZOS_G + 0.5
    return LOG_SQRT_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def gamma_complex(z: complex) -> complex:
    z = complex(z)
    lg = loggamma_complex(z)
    if lg.real > LOG_MAX_FLOAT:
        raise SpecialFunctionOverflow(f"|Gamma({z})| exceeds the float range")
    value = cmath.exp(lg)
    if z.imag == 0:
        return complex(value.real, 0.0)
    return value


def gamma_ratio(num: complex, den: complex) -> complex:
    """Gamma(num)/Gamma(den) through log-Gamma, safe when both factors are huge or tiny."""
    lr = loggamma_complex(num) - loggamma_complex(den)
    if lr.real > LOG_MAX_FLOAT:
        raise SpecialFunctionOverflow("Gamma ratio exceeds the float range")
    return cmath.exp(lr)


def _kummer_series(
    a: complex, b: complex, x: complex, max_terms: int
) -> Tuple[complex, float]:
    """Partial sum of 1F1 and the decimal digits its rounding error can reach."""
    term = 1.0 + 0j
    total = 1.0 + 0j
    largest = 1.0
    run = 0
    for n in range(max_terms):
        term *= (a + n) / (b + n) * x / (n + 1)
        total += term
        largest = max(largest, abs(term))
        if abs(term) <= KUMMER_STOP_RATIO * abs(total):
            run += 1
            if run >= KUMMER_STOP_RUN:
                break
        else:
            run = 0
    else:
        raise KummerNonConvergence(
            f"1F1({a}; {b}; {x}) did not settle within {max_terms} terms"
        )
    if total == 0:
        return total, math.inf
    return total, math.log10(largest / abs(total))


def _kummer_extended(a: complex, b: complex, x: complex, lost: float) -> complex:
    """1F1 in mpmath with the working precision raised past the cancelled digits."""
    dps = KUMMER_BASE_DPS + math.ceil(min(lost, KUMMER_MAX_EXTRA_DPS))
    logger.info(
        "[Specfun] 1F1(%s; %s; %s): ~%.1f digits cancel in double precision, using %d digits",
        a,
        b,
        x,
        lost,
        dps,
    )
    try:
        with mpmath.workdps(dps):
            value = mpmath.hyp1f1(mpmath.mpc(a), mpmath.mpc(b), mpmath.mpc(x))
    except NoConvergence as exc:
        raise KummerNonConvergence(f"1F1({a}; {b}; {x}): {exc}") from exc
    return complex(value)


def kummer_M(a: complex, b: complex, x: complex, max_terms: int | None = None) -> complex:
    """
    Kummer's function M(a, b, x) = 1F1(a; b; x) for |x| <= 100.

    Double-precision series (through Kummer's transformation when Re x < 0)
    while its cancellation stays inside the 1e-10 relative budget; otherwise
    the same function at extended precision.
    """
    a, b, x = complex(a), complex(b), complex(x)
    if _is_nonpositive_integer(b):
        raise KummerParameterPole(f"1F1 undefined for b = {b.real:g}")
    if abs(x) > KUMMER_DOMAIN:
        raise KummerNonConvergence(f"|x| = {abs(x):g} outside the series domain")
    if x == 0:
        return 1.0 + 0j
    cap = max_terms or settings.kummer_max_terms
    if x.real < 0:
        # Kummer transformation keeps the series terms from alternating
        total, lost = _kummer_series(b - a, b, -x, cap)
        total *= cmath.exp(x)
    else:
        total, lost = _kummer_series(a, b, x, cap)
    if lost <= KUMMER_LOST_DIGITS:
        return total
    return _kummer_extended(a, b, x, lost)


def kummer_M_derivative(a: complex, b: complex, x: complex) -> complex:
    """d/dx M(a, b, x) = (a/b) M(a+1, b+1, x)."""
    a, b = complex(a), complex(b)
    return a / b * kummer_M(a + 1.0, b + 1.0, x)


def _frak_series(nu: float, x: complex) -> complex:
    y = -0.25 * x * x
    term = 1.0 + 0j
    total = 1.0 + 0j
    for n in range(200):
        term *= y / ((n + 1) * (nu + 1 + n))
        total += term
        if abs(term) <= KUMMER_STOP_RATIO * abs(total):
            break
    return total


def bessel_frak(nu: float, x: complex) -> complex:
    """
    Entire function 0F1(; nu+1; -x^2/4) = Gamma(nu+1) (x/2)^(-nu) J_nu(x).

    Series near the origin; elsewhere scipy's Bessel J, whose complex branch
    matches the principal power used here so the product is the entire function.
    """
    nu = float(nu)
    if nu <= -1:
        raise DomainViolation(f"bessel_frak requires nu > -1, got {nu}")
    x = complex(x)
    if x == 0:
        return 1.0 + 0j
    if abs(x) <= FRAK_SERIES_RADIUS:
        return _frak_series(nu, x)
    return gamma_complex(nu + 1.0) * (x / 2.0) ** (-nu) * complex(special.jv(nu, x))
