import math

import numpy as np
import pytest

from canonsys.core.errors import HamiltonianDomainError, TraceInverseError
from canonsys.models import PowerData
from canonsys.services.hamiltonian import (
    PerturbedPowerHamiltonian,
    PiecewiseHamiltonian,
    PowerHamiltonian,
    RapidHamiltonian,
    SampledHamiltonian,
    constant_hamiltonian,
    convergence_distance,
    detect_indivisible_start,
    invert_increasing,
    normalized_primitive,
    reflect_off_diagonal,
    step_hamiltonian,
    trace_inverse,
    trace_normalize,
    validate_on_grid,
)

IDENTITY = [[1.0, 0.0], [0.0, 1.0]]


def test_power_primitive_closed_form():
    H = PowerHamiltonian(PowerData(rho1=1, rho2=3, kappa1=2, kappa2=3, kappa3=1))
    p = H.primitive(2.0)
    assert p.m1 == pytest.approx(4.0)
    assert p.m2 == pytest.approx(8.0)
    assert p.m3 == pytest.approx(2.0**2 / 2)
    assert H.primitive(0.0) == (0.0, 0.0, 0.0)


def test_sampled_primitive_matches_power():
    """Quadrature with the endpoint rule reproduces integrable singularities."""
    data = PowerData(rho1=0.5, rho2=2, kappa1=1, kappa2=1)
    exact = PowerHamiltonian(data)
    sampled = SampledHamiltonian(exact.matrix)
    for t in (1e-4, 0.3, 7.0):
        assert sampled.primitive(t).m1 == pytest.approx(exact.primitive(t).m1, rel=1e-8)
        assert sampled.primitive(t).m2 == pytest.approx(exact.primitive(t).m2, rel=1e-8)


def test_sampled_requires_divergent_trace():
    with pytest.raises(HamiltonianDomainError):
        SampledHamiltonian(lambda t: IDENTITY, divergent_trace=False)


def test_piecewise_primitive_and_entries():
    H = PiecewiseHamiltonian([(1.0, [[1, 0], [0, 0]]), (math.inf, [[0, 0], [0, 2]])])
    assert H.entries(0.5) == (1.0, 0.0, 0.0)
    assert H.entries(3.0) == (0.0, 2.0, 0.0)
    assert H.primitive(3.0) == pytest.approx((1.0, 4.0, 0.0))
    assert [length for length, _ in H.segments] == [1.0, math.inf]


@pytest.mark.parametrize(
    "segments",
    [
        [],
        [(1.0, [[1, 0], [0, 1]])],
        [(math.inf, [[1, 2], [2, 1]])],
        [(math.inf, [[1, 0.5], [0.4, 1]])],
        [(math.inf, [[0, 0], [0, 0]])],
        [(math.inf, IDENTITY), (math.inf, IDENTITY)],
        [(-1.0, IDENTITY), (math.inf, IDENTITY)],
    ],
)
def test_piecewise_rejects_bad_segments(segments):
    with pytest.raises(HamiltonianDomainError):
        PiecewiseHamiltonian(segments)


def test_primitive_outside_domain():
    with pytest.raises(HamiltonianDomainError):
        constant_hamiltonian(IDENTITY).primitive(-1.0)


def test_step_hamiltonian_layout():
    H = step_hamiltonian(2.0)
    assert H.entries(1.0) == (1.0, 0.0, 0.0)
    assert H.entries(3.0) == (0.0, 1.0, 0.0)
    T = step_hamiltonian(2.0, transposed=True)
    assert T.entries(0.25) == (0.0, 1.0, 0.0)
    assert T.entries(1.0) == (1.0, 0.0, 0.0)
    with pytest.raises(HamiltonianDomainError):
        step_hamiltonian(0.0)


def test_reflect_off_diagonal_flips_h3():
    H = PowerHamiltonian(PowerData(rho1=1, rho2=1, kappa1=1, kappa2=1, kappa3=0.5))
    assert reflect_off_diagonal(H).entries(1.0) == pytest.approx((1.0, 1.0, -0.5))
    P = PiecewiseHamiltonian([(math.inf, [[1, 0.5], [0.5, 1]])])
    assert reflect_off_diagonal(P).entries(1.0) == pytest.approx((1.0, 1.0, -0.5))
    R = reflect_off_diagonal(SampledHamiltonian(P.matrix))
    assert R.primitive(2.0).m3 == pytest.approx(-1.0, rel=1e-8)


def test_trace_inverse_variants():
    assert trace_inverse(constant_hamiltonian(IDENTITY), 3.0) == pytest.approx(1.5)
    same = PowerHamiltonian(PowerData(rho1=2, rho2=2, kappa1=1, kappa2=1))
    # m1 + m2 = t^2
    assert trace_inverse(same, 4.0) == pytest.approx(2.0)
    mixed = PowerHamiltonian(PowerData(rho1=1, rho2=2, kappa1=1, kappa2=2))
    t = trace_inverse(mixed, 2.0)
    assert mixed.primitive(t).trace == pytest.approx(2.0, rel=1e-10)
    assert trace_inverse(mixed, 0.0) == 0.0
    with pytest.raises(TraceInverseError):
        trace_inverse(mixed, -1.0)


def test_invert_increasing_on_bounded_domain():
    """value(t) = t/(1 - t) on (0, 1)."""
    t = invert_increasing(lambda t: t / (1.0 - t), 9.0, length=1.0)
    assert t == pytest.approx(0.9, rel=1e-10)


def test_trace_normalize_keeps_weyl_data():
    """Normalised piecewise H has unit trace and stretched segments."""
    H = PiecewiseHamiltonian([(1.0, [[2, 0], [0, 0]]), (math.inf, [[0, 0], [0, 3]])])
    N = trace_normalize(H)
    assert N.entries(1.0) == pytest.approx((1.0, 0.0, 0.0))
    assert N.entries(3.0) == pytest.approx((0.0, 1.0, 0.0))
    assert N.segments[0][0] == pytest.approx(2.0)


def test_trace_normalize_power_with_equal_indices():
    H = PowerHamiltonian(PowerData(rho1=2, rho2=2, kappa1=1, kappa2=3, kappa3=1))
    N = trace_normalize(H)
    assert N.entries(5.0) == pytest.approx((0.25, 0.75, 0.25))


def test_trace_normalize_general_entries():
    H = PowerHamiltonian(PowerData(rho1=1, rho2=2, kappa1=1, kappa2=1))
    N = trace_normalize(H)
    h1, h2, h3 = N.entries(0.7)
    assert h1 + h2 == pytest.approx(1.0)
    assert N.primitive(0.7).trace == pytest.approx(0.7, rel=1e-10)
    assert trace_normalize(N) is N


def test_detect_indivisible_start():
    grid = [0.1, 0.5, 1.5]
    assert detect_indivisible_start(step_hamiltonian(1.0), grid).variant == "type0"
    assert detect_indivisible_start(step_hamiltonian(1.0), grid).epsilon == 0.5
    transposed = detect_indivisible_start(step_hamiltonian(1.0, transposed=True), grid)
    assert transposed.variant == "typeHalfPi"
    assert detect_indivisible_start(constant_hamiltonian(IDENTITY), grid).variant == "none"


def test_detect_indivisible_start_rejects_epsilon():
    with pytest.raises(HamiltonianDomainError):
        detect_indivisible_start(constant_hamiltonian(IDENTITY), [0.0])


def test_normalized_primitive_of_identity():
    p = normalized_primitive(constant_hamiltonian(IDENTITY), 2.0)
    assert p == pytest.approx((1.0, 1.0, 0.0))


def test_convergence_distance():
    """Zero against itself; identity against diag(1, 0) separates by T/2 at x = T."""
    H = constant_hamiltonian(IDENTITY)
    assert convergence_distance(H, H, 2.0) == 0.0
    D = PiecewiseHamiltonian([(math.inf, [[1, 0], [0, 0]])])
    assert convergence_distance(H, D, 2.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        convergence_distance(H, D, 0.0)


def test_validate_on_grid():
    validate_on_grid(PowerHamiltonian(PowerData(rho1=1, rho2=1, kappa1=1, kappa2=1, kappa3=1)), [0.1, 1.0])
    bad = SampledHamiltonian(lambda t: [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(HamiltonianDomainError):
        validate_on_grid(bad, [0.5])


def test_perturbed_power_entries():
    data = PowerData(rho1=1, rho2=2, kappa1=1, kappa2=1)
    H = PerturbedPowerHamiltonian(data, amplitude=0.1)
    h1, h2, _ = H.entries(math.e**-1)
    assert h1 == pytest.approx(1.05)
    assert h2 == pytest.approx(1.05 * math.e**-1)


def test_rapid_hamiltonian():
    H = RapidHamiltonian(rapid_entry=1, rho=2.0, kappa=4.0)
    p = H.primitive(0.5)
    assert p.m1 == pytest.approx(math.exp(-2.0))
    assert p.m2 == pytest.approx(2.0 * 0.25)
    h1, h2, _ = H.entries(0.5)
    assert h1 == pytest.approx(math.exp(-2.0) / 0.25)
    assert h2 == pytest.approx(2.0)
    with pytest.raises(HamiltonianDomainError):
        RapidHamiltonian(rapid_entry=3)


def test_matrix_is_symmetric():
    H = PowerHamiltonian(PowerData(rho1=1, rho2=1, kappa1=1, kappa2=1, kappa3=0.5))
    m = H.matrix(1.0)
    assert np.array_equal(m, m.T)


def test_piecewise_primitive_across_switch():
    H = PiecewiseHamiltonian([(1.0, [[1, 0], [0, 0]]), (math.inf, [[0, 0], [0, 1]])])
    assert H.primitive(1.5) == pytest.approx((1.0, 0.5, 0.0))


def test_indivisible_start_before_identity():
    grid = [0.25, 0.5, 1.0]
    type0 = PiecewiseHamiltonian([(1.0, [[1, 0], [0, 0]]), (math.inf, IDENTITY)])
    found = detect_indivisible_start(type0, grid)
    assert (found.variant, found.epsilon) == ("type0", 1.0)
    half_pi = PiecewiseHamiltonian([(0.5, [[0, 0], [0, 1]]), (math.inf, IDENTITY)])
    assert detect_indivisible_start(half_pi, grid).variant == "typeHalfPi"


def test_convergence_distance_of_opposite_diagonals():
    """diag(1, 0) against diag(0, 1): primitives diag(x, 0) and diag(0, x) differ by T."""
    upper = constant_hamiltonian([[1, 0], [0, 0]])
    lower = constant_hamiltonian([[0, 0], [0, 1]])
    assert convergence_distance(upper, lower, 3.0) == pytest.approx(3.0)


@pytest.mark.parametrize(
    "H",
    [
        constant_hamiltonian([[2.0, 0.0], [0.0, 0.0]]),
        PowerHamiltonian(PowerData(rho1=1, rho2=1, kappa1=1, kappa2=1)),
        PowerHamiltonian(PowerData(rho1=1, rho2=2, kappa1=1, kappa2=1, kappa3=0.5)),
    ],
)
def test_distance_to_trace_normalisation_vanishes(H):
    assert convergence_distance(H, trace_normalize(H), 2.0, grid_size=21) <= 1e-8


def test_reparameterisation_has_distance_zero():
    """H(2t) * 2 is a reparameterisation of H."""
    H = PowerHamiltonian(PowerData(rho1=1, rho2=2, kappa1=1, kappa2=1))
    G = SampledHamiltonian(lambda t: 2.0 * H.matrix(2.0 * t))
    assert convergence_distance(H, G, 2.0, grid_size=11) <= 1e-8


def test_convergence_distance_symmetry_and_triangle():
    A = constant_hamiltonian([[1, 0], [0, 0]])
    B = constant_hamiltonian(IDENTITY)
    C = PiecewiseHamiltonian([(1.0, [[0, 0], [0, 1]]), (math.inf, IDENTITY)])
    ab, ba = convergence_distance(A, B, 2.0), convergence_distance(B, A, 2.0)
    assert ab == ba
    assert convergence_distance(A, C, 2.0) <= ab + convergence_distance(B, C, 2.0) + 1e-12


def test_primitives_monotone_and_cauchy_schwarz():
    H = PerturbedPowerHamiltonian(PowerData(rho1=1, rho2=2, kappa1=1, kappa2=1, kappa3=0.9))
    grid = np.geomspace(1e-4, 10.0, 15)
    values = [H.primitive(float(t)) for t in grid]
    assert all(b.m1 >= a.m1 and b.m2 >= a.m2 for a, b in zip(values, values[1:]))
    assert all(p.m3**2 <= p.m1 * p.m2 * (1 + 1e-12) for p in values)


def test_trace_normalize_examples():
    N = trace_normalize(constant_hamiltonian([[2.0, 0.0], [0.0, 0.0]]))
    assert N.entries(0.3) == pytest.approx((1.0, 0.0, 0.0))
    P = trace_normalize(PowerHamiltonian(PowerData(rho1=1, rho2=1, kappa1=1, kappa2=1)))
    assert P.entries(0.3) == pytest.approx((0.5, 0.5, 0.0))
    assert trace_normalize(P).entries(4.0) == pytest.approx(P.entries(4.0), abs=1e-9)


@pytest.mark.parametrize(
    "H",
    [
        PiecewiseHamiltonian([(1.0, [[2, 0], [0, 0]]), (math.inf, [[0, 0], [0, 3]])]),
        PowerHamiltonian(PowerData(rho1=2, rho2=2, kappa1=1, kappa2=3, kappa3=1)),
        PowerHamiltonian(PowerData(rho1=1, rho2=2, kappa1=1, kappa2=1, kappa3=0.5)),
        PerturbedPowerHamiltonian(PowerData(rho1=1, rho2=2, kappa1=1, kappa2=1, kappa3=0.3)),
    ],
)
def test_trace_normalize_is_idempotent(H):
    N = trace_normalize(H)
    NN = trace_normalize(N)
    for t in (0.05, 0.7, 1.5, 4.0):
        assert NN.entries(t) == pytest.approx(N.entries(t), abs=1e-9)
    assert convergence_distance(N, NN, 3.0, grid_size=11) <= 1e-9
