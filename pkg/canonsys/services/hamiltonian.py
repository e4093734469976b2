import bisect
import logging
import math
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from canonsys.core.config import settings
from canonsys.core.errors import HamiltonianDomainError, TraceInverseError
from canonsys.models import IndivisibleStart, PowerData, PrimitiveValue
from canonsys.utils.quadrature import primitive_from_origin

logger = logging.getLogger(__name__)

Entries = Tuple[float, float, float]  # (h1, h2, h3)

PSD_TOL = 1e-12


def _as_matrix(h1: float, h2: float, h3: float) -> np.ndarray:
    return np.array([[h1, h3], [h3, h2]], dtype=float)


class Hamiltonian(ABC):
    """
    Symmetric, positive semidefinite 2x2 coefficient H(t) on (0, L).

    Instances are immutable. Subclasses supply pointwise entries and the
    entrywise primitive M(t) = integral_0^t H.
    """

    kind: str = "abstract"
    length: float = math.inf

    @abstractmethod
    def entries(self, t: float) -> Entries: ...

    @abstractmethod
    def _primitive(self, t: float) -> PrimitiveValue: ...

    def matrix(self, t: float) -> np.ndarray:
        return _as_matrix(*self.entries(t))

    def primitive(self, t: float) -> PrimitiveValue:
        self.check_domain(t)
        if t == 0:
            return PrimitiveValue(0.0, 0.0, 0.0)
        return self._primitive(t)

    def check_domain(self, t: float) -> None:
        if not (0 <= t < self.length):
            raise HamiltonianDomainError(
                f"t = {t:g} outside the domain [0, {self.length:g})"
            )

    def constant_pieces(self) -> Optional[List[Tuple[float, float, np.ndarray]]]:
        """(start, end, matrix) triples when H is piecewise constant, else None."""
        return None


class PowerHamiltonian(Hamiltonian):
    kind = "power"

    def __init__(self, data: PowerData):
        self.data = data

    def entries(self, t: float) -> Entries:
        d = self.data
        h3 = d.kappa3 * t ** (d.rho3 - 1.0) if d.kappa3 else 0.0
        return (
            d.kappa1 * t ** (d.rho1 - 1.0),
            d.kappa2 * t ** (d.rho2 - 1.0),
            h3,
        )

    def _primitive(self, t: float) -> PrimitiveValue:
        c1, c2, c3 = self.data.coefficients()
        d = self.data
        return PrimitiveValue(
            c1 * t**d.rho1,
            c2 * t**d.rho2,
            c3 * t**d.rho3 if c3 else 0.0,
        )


class PiecewiseHamiltonian(Hamiltonian):
    """Constant matrices on consecutive segments; a segment covers (a_k, a_{k+1}]."""

    kind = "piecewise"

    def __init__(self, segments: Sequence[Tuple[float, Sequence[Sequence[float]]]]):
        if not segments:
            raise HamiltonianDomainError("piecewise Hamiltonian needs a segment")
        self._matrices: List[np.ndarray] = []
        self._starts: List[float] = [0.0]
        for k, (length, h) in enumerate(segments):
            m = np.asarray(h, dtype=float)
            if m.shape != (2, 2) or m[0, 1] != m[1, 0]:
                raise HamiltonianDomainError(f"segment {k}: matrix must be symmetric 2x2")
            if m[0, 0] < 0 or m[1, 1] < 0 or np.linalg.det(m) < -PSD_TOL:
                raise HamiltonianDomainError(f"segment {k}: matrix is not PSD")
            if np.trace(m) <= 0:
                raise HamiltonianDomainError(f"segment {k}: trace must be positive")
            if not length > 0:
                raise HamiltonianDomainError(f"segment {k}: length must be positive")
            if math.isinf(length) and k != len(segments) - 1:
                raise HamiltonianDomainError("only the last segment may be infinite")
            self._matrices.append(m)
            self._starts.append(self._starts[-1] + length)
        if math.isfinite(self._starts[-1]):
            raise HamiltonianDomainError(
                "integral of tr H must diverge: the last segment has to be infinite"
            )

    @property
    def segments(self) -> List[Tuple[float, np.ndarray]]:
        return [
            (b - a, m.copy())
            for a, b, m in zip(self._starts, self._starts[1:], self._matrices)
        ]

    def _index(self, t: float) -> int:
        k = bisect.bisect_left(self._starts, t) - 1
        return min(max(k, 0), len(self._matrices) - 1)

    def entries(self, t: float) -> Entries:
        m = self._matrices[self._index(t)]
        return (m[0, 0], m[1, 1], m[0, 1])

    def _primitive(self, t: float) -> PrimitiveValue:
        total = np.zeros((2, 2))
        for a, b, m in zip(self._starts, self._starts[1:], self._matrices):
            if t <= a:
                break
            total += (min(t, b) - a) * m
        return PrimitiveValue(total[0, 0], total[1, 1], total[0, 1])

    def constant_pieces(self):
        return list(zip(self._starts, self._starts[1:], self._matrices))


class SampledHamiltonian(Hamiltonian):
    """
    H given by a pointwise evaluator t -> 2x2. Divergence of the trace integral
    cannot be decided from samples, so it is declared by the caller.
    """

    kind = "sampled"

    def __init__(
        self,
        evaluator: Callable[[float], Sequence[Sequence[float]]],
        length: float = math.inf,
        divergent_trace: bool = True,
        rel_tol: float | None = None,
    ):
        if not divergent_trace:
            raise HamiltonianDomainError("the trace integral must be declared divergent")
        self._evaluator = evaluator
        self.length = length
        self.rel_tol = rel_tol or settings.quad_rel_tol
        self._cached = lru_cache(maxsize=4096)(self._integrate)

    def entries(self, t: float) -> Entries:
        h = self._evaluator(t)
        return (float(h[0][0]), float(h[1][1]), float(h[0][1]))

    def _integrate(self, t: float) -> PrimitiveValue:
        values = [
            primitive_from_origin(lambda s, j=j: self.entries(s)[j], t, self.rel_tol)
            for j in range(3)
        ]
        return PrimitiveValue(*values)

    def _primitive(self, t: float) -> PrimitiveValue:
        return self._cached(t)


def log_decay_profile(amplitude: float) -> Callable[[float], float]:
    """1 + amplitude/(1 + |ln t|), which tends to 1 as t -> 0."""

    def profile(t: float) -> float:
        return 1.0 + amplitude / (1.0 + abs(math.log(t)))

    return profile


class PerturbedPowerHamiltonian(SampledHamiltonian):
    """Power entries times a common slowly varying profile."""

    kind = "perturbed_power"

    def __init__(self, data: PowerData, amplitude: float = 0.1):
        self.data = data
        self.amplitude = amplitude
        self._power = PowerHamiltonian(data)
        self._profile = log_decay_profile(amplitude)
        super().__init__(self._evaluate)

    def _evaluate(self, t: float):
        factor = self._profile(t)
        h1, h2, h3 = self._power.entries(t)
        return [[factor * h1, factor * h3], [factor * h3, factor * h2]]


class RapidHamiltonian(Hamiltonian):
    """Diagonal H: one entry a power kappa*t^(rho-1), the other with primitive exp(-1/t)."""

    kind = "rapid"

    def __init__(self, rapid_entry: int = 2, rho: float = 1.0, kappa: float = 1.0):
        if rapid_entry not in (1, 2):
            raise HamiltonianDomainError("rapid_entry must be 1 or 2")
        self.rapid_entry = rapid_entry
        self.rho = rho
        self.kappa = kappa

    @staticmethod
    def _rapid_density(t: float) -> float:
        return math.exp(-1.0 / t) / (t * t) if t > 0 else 0.0

    def entries(self, t: float) -> Entries:
        regular = self.kappa * t ** (self.rho - 1.0)
        rapid = self._rapid_density(t)
        if self.rapid_entry == 2:
            return (regular, rapid, 0.0)
        return (rapid, regular, 0.0)

    def _primitive(self, t: float) -> PrimitiveValue:
        regular = self.kappa / self.rho * t**self.rho
        rapid = math.exp(-1.0 / t)
        if self.rapid_entry == 2:
            return PrimitiveValue(regular, rapid, 0.0)
        return PrimitiveValue(rapid, regular, 0.0)


class TraceNormalizedHamiltonian(Hamiltonian):
    """H(t^{-1}(x)) (t^{-1})'(x) for a base H without a closed-form normalisation."""

    kind = "trace_normalized"

    def __init__(self, base: Hamiltonian):
        self.base = base
        # the trace integral diverges, so the normalised domain is the half-line
        self.length = math.inf
        self._inverse = lru_cache(maxsize=8192)(lambda x: trace_inverse(base, x))

    def entries(self, t: float) -> Entries:
        h1, h2, h3 = self.base.entries(self._inverse(t))
        tr = h1 + h2
        if tr <= 0:
            raise TraceInverseError(f"trace vanishes at the preimage of t = {t:g}")
        return (h1 / tr, h2 / tr, h3 / tr)

    def _primitive(self, t: float) -> PrimitiveValue:
        return self.base.primitive(self._inverse(t))


class RescaledHamiltonian(Hamiltonian):
    """diag(b1, b2) H(lam t) diag(b1, b2) with lam = b1 b2 / r."""

    kind = "rescaled"

    def __init__(self, base: Hamiltonian, r: float, b1: float, b2: float):
        self.base = base
        self.r, self.b1, self.b2 = r, b1, b2
        self.lam = b1 * b2 / r
        self.length = base.length / self.lam

    def entries(self, t: float) -> Entries:
        h1, h2, h3 = self.base.entries(self.lam * t)
        return (self.b1**2 * h1, self.b2**2 * h2, self.b1 * self.b2 * h3)

    def _primitive(self, t: float) -> PrimitiveValue:
        p = self.base.primitive(self.lam * t)
        return PrimitiveValue(
            self.r * self.b1 / self.b2 * p.m1,
            self.r * self.b2 / self.b1 * p.m2,
            self.r * p.m3,
        )


class ReflectedHamiltonian(Hamiltonian):
    """[[h1, -h3], [-h3, h2]]; its Weyl coefficient is -q_H(-z)."""

    kind = "reflected"

    def __init__(self, base: Hamiltonian):
        self.base = base
        self.length = base.length

    def entries(self, t: float) -> Entries:
        h1, h2, h3 = self.base.entries(t)
        return (h1, h2, -h3)

    def _primitive(self, t: float) -> PrimitiveValue:
        p = self.base.primitive(t)
        return PrimitiveValue(p.m1, p.m2, -p.m3)


# ---- Constructors ----


def constant_hamiltonian(matrix: Sequence[Sequence[float]]) -> PiecewiseHamiltonian:
    return PiecewiseHamiltonian([(math.inf, matrix)])


def step_hamiltonian(omega: float, transposed: bool = False) -> PiecewiseHamiltonian:
    """
    diag(1,0) on (0, omega] then diag(0,1): q(z) = omega*z.
    Transposed: diag(0,1) on (0, 1/omega] then diag(1,0): q(z) = -omega/z.
    """
    if omega <= 0:
        raise HamiltonianDomainError("switch point must be positive")
    upper = [[1.0, 0.0], [0.0, 0.0]]
    lower = [[0.0, 0.0], [0.0, 1.0]]
    if transposed:
        return PiecewiseHamiltonian([(1.0 / omega, lower), (math.inf, upper)])
    return PiecewiseHamiltonian([(omega, upper), (math.inf, lower)])


def reflect_off_diagonal(H: Hamiltonian) -> Hamiltonian:
    if isinstance(H, PowerHamiltonian):
        return PowerHamiltonian(H.data.model_copy(update={"kappa3": -H.data.kappa3}))
    pieces = H.constant_pieces()
    if pieces is not None:
        return PiecewiseHamiltonian(
            [(b - a, m * np.array([[1, -1], [-1, 1]])) for a, b, m in pieces]
        )
    return ReflectedHamiltonian(H)


def validate_on_grid(H: Hamiltonian, grid: Sequence[float], tol: float = PSD_TOL) -> None:
    """Spot-check symmetry-derived PSD conditions and positive trace on a grid."""
    for t in grid:
        h1, h2, h3 = H.entries(t)
        scale = max(h1 * h2, 1.0)
        if h1 < -tol or h2 < -tol or h1 * h2 - h3 * h3 < -tol * scale:
            raise HamiltonianDomainError(f"H({t:g}) is not positive semidefinite")
        if h1 + h2 <= 0:
            raise HamiltonianDomainError(f"tr H({t:g}) is not positive")


# ---- Operations ----


def primitive(H: Hamiltonian, t: float) -> PrimitiveValue:
    return H.primitive(t)


def _piecewise_inverse(pieces, x: float) -> float:
    acc = 0.0
    for a, b, m in pieces:
        tr = float(np.trace(m))
        span = (b - a) * tr
        if x <= acc + span:
            return a + (x - acc) / tr
        acc += span
    raise TraceInverseError(f"trace primitive never reaches {x:g}")


# values below exp(LOG_FLOOR) count as zero when bracketing in log t
LOG_FLOOR = -2000.0


def invert_increasing(
    value: Callable[[float], float],
    x: float,
    length: float = math.inf,
    rel_tol: float | None = None,
) -> float:
    """
    The t in (0, length) with value(t) = x for a nondecreasing value vanishing at 0.

    Brackets by steps of 2 in log t from t = 1, then brentq in log t.
    """
    target = math.log(x)
    upper = math.log(length) if math.isfinite(length) else math.inf

    def f(s: float) -> float:
        v = value(math.exp(s))
        return (math.log(v) if v > 0 else LOG_FLOOR) - target

    lo, hi = -1.0, 1.0
    hi = min(hi, upper - 1e-12) if math.isfinite(upper) else hi
    for _ in range(400):
        if f(lo) < 0:
            break
        lo -= 2.0
    else:
        raise TraceInverseError(f"no lower bracket for value {x:g}")
    for _ in range(400):
        if f(hi) > 0:
            break
        nxt = hi + 2.0
        if nxt >= upper:
            nxt = 0.5 * (hi + upper)
        if nxt == hi:
            raise TraceInverseError(f"value never reaches {x:g}")
        hi = nxt
    else:
        raise TraceInverseError(f"no upper bracket for value {x:g}")
    if f(hi) <= f(lo):
        raise TraceInverseError("function is not increasing")
    tol = rel_tol or settings.inverse_rel_tol
    s = optimize.brentq(f, lo, hi, xtol=tol * 1e-2, rtol=4 * np.finfo(float).eps)
    return math.exp(s)


def trace_inverse(H: Hamiltonian, x: float, rel_tol: float | None = None) -> float:
    """The t with m1(t) + m2(t) = x."""
    if x < 0:
        raise TraceInverseError("trace primitive values are nonnegative")
    if x == 0:
        return 0.0
    pieces = H.constant_pieces()
    if pieces is not None:
        return _piecewise_inverse(pieces, x)
    if isinstance(H, PowerHamiltonian) and H.data.rho1 == H.data.rho2:
        c1, c2, _ = H.data.coefficients()
        return (x / (c1 + c2)) ** (1.0 / H.data.rho1)
    return invert_increasing(lambda t: H.primitive(t).trace, x, H.length, rel_tol)


def trace_normalize(H: Hamiltonian) -> Hamiltonian:
    """The unique reparameterisation with tr H = 1."""
    if isinstance(H, TraceNormalizedHamiltonian):
        return H
    pieces = H.constant_pieces()
    if pieces is not None:
        return PiecewiseHamiltonian(
            [((b - a) * float(np.trace(m)), m / float(np.trace(m))) for a, b, m in pieces]
        )
    if isinstance(H, PowerHamiltonian) and H.data.rho1 == H.data.rho2:
        d = H.data
        s = d.kappa1 + d.kappa2
        return constant_hamiltonian(
            [[d.kappa1 / s, d.kappa3 / s], [d.kappa3 / s, d.kappa2 / s]]
        )
    logger.debug("[Hamiltonian] wrapping %s in a trace normalisation", H.kind)
    return TraceNormalizedHamiltonian(H)


def detect_indivisible_start(
    H: Hamiltonian, epsilon_grid: Sequence[float], tol: float = 1e-12
) -> IndivisibleStart:
    """Largest grid epsilon on which h2 (type0) or h1 (typeHalfPi) vanishes."""
    found = IndivisibleStart()
    for eps in sorted(epsilon_grid):
        if not 0 < eps < H.length:
            raise HamiltonianDomainError(f"epsilon = {eps:g} outside (0, L)")
        p = H.primitive(eps)
        if p.m2 <= tol * p.trace:
            found = IndivisibleStart(variant="type0", epsilon=eps)
        elif p.m1 <= tol * p.trace:
            found = IndivisibleStart(variant="typeHalfPi", epsilon=eps)
    return found


def normalized_primitive(H: Hamiltonian, x: float) -> PrimitiveValue:
    """Primitive of the trace-normalised reparameterisation at x."""
    return H.primitive(trace_inverse(H, x))


def convergence_distance(
    H1: Hamiltonian, H2: Hamiltonian, T: float, grid_size: int = 101
) -> float:
    """Max over x in [0, T] of the max-abs-entry distance of normalised primitives."""
    if T <= 0 or grid_size < 2:
        raise ValueError("need T > 0 and at least two grid points")
    worst = 0.0
    for x in np.linspace(0.0, T, grid_size):
        p = normalized_primitive(H1, float(x))
        q = normalized_primitive(H2, float(x))
        worst = max(worst, abs(p.m1 - q.m1), abs(p.m2 - q.m2), abs(p.m3 - q.m3))
    return worst
