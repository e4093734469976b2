import cmath
import math

import numpy as np
import pytest

from canonsys.core.errors import DomainViolation, WeylAtInfinity, WeylNonConvergence
from canonsys.models import PowerData
from canonsys.services.asymptotics import rescale
from canonsys.services.hamiltonian import (
    PowerHamiltonian,
    constant_hamiltonian,
    reflect_off_diagonal,
    step_hamiltonian,
)
from canonsys.services.power_model import closed_form_q, q_power_eval, solution_entries_power
from canonsys.services.weyl_numeric import (
    TransferMatrixSolver,
    checkpoint_schedule,
    determinant_deviation,
    fundamental_solution,
    seed_matrix,
    weyl_coefficient,
    weyl_disc,
    weyl_estimate,
)

IDENTITY = [[1.0, 0.0], [0.0, 1.0]]


def power_h(rho1, rho2, k1=1.0, k2=1.0, k3=0.0):
    return PowerHamiltonian(
        PowerData(rho1=rho1, rho2=rho2, kappa1=k1, kappa2=k2, kappa3=k3)
    )


def ac1_grid():
    for rho1 in (1.0, 1.5, 2.0):
        for rho2 in (1.0, 2.0, 3.0):
            for ratio in (-0.9, -0.5, 0.0, 0.5, 0.9):
                # kappa3 != 0 needs rho3 = (rho1 + rho2)/2, which is the default
                yield rho1, rho2, ratio


def test_identity_hamiltonian_gives_i():
    """H = I: q = i with the disc below tolerance."""
    est = weyl_estimate(constant_hamiltonian(IDENTITY), 1j)
    assert abs(est.value - 1j) < 1e-8
    assert est.disc.radius <= 1e-8
    assert est.status == "ok"


def test_power_identity_through_integrator():
    """rho = (1, 1), kappa = (1, 1, 0) runs the Runge-Kutta path and still gives i."""
    assert abs(weyl_coefficient(power_h(1, 1), 2j) - 1j) < 1e-7


def test_indivisible_start_signals_infinity():
    """H = diag(1, 0) throughout: q = infinity."""
    H = constant_hamiltonian([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(WeylAtInfinity):
        weyl_estimate(H, 1j, t_max=10.0)


def test_rejects_lower_half_plane():
    with pytest.raises(DomainViolation):
        weyl_estimate(constant_hamiltonian(IDENTITY), 1.0 - 0.5j)


def test_non_convergence_carries_last_disc():
    """A short horizon leaves the disc open; the exception keeps it for the caller."""
    with pytest.raises(WeylNonConvergence) as info:
        weyl_estimate(power_h(1, 2), 1j, disc_tol=1e-12, t_max=0.5)
    assert info.value.disc is not None
    assert info.value.disc.radius > 1e-12
    assert info.value.t == 0.5


@pytest.mark.parametrize("omega", [0.5, 3.0])
def test_step_hamiltonians(omega):
    """Switch point omega gives q = omega z; the transposed step gives -omega/z."""
    kwargs = dict(disc_tol=1e-7, t_max=1e10)
    q = weyl_coefficient(step_hamiltonian(omega), 1j, **kwargs)
    assert abs(q - omega * 1j) < 1e-6
    q = weyl_coefficient(step_hamiltonian(omega, transposed=True), 1j, **kwargs)
    assert abs(q - (-omega / 1j)) < 1e-6


@pytest.mark.parametrize("rho1, rho2, ratio", list(ac1_grid()))
def test_numeric_matches_closed_form(rho1, rho2, ratio):
    """Nested discs agree with the closed form to 1e-5; det W, nesting and positivity hold."""
    H = power_h(rho1, rho2, 1.0, 1.0, ratio)
    law = closed_form_q(H.data)
    for z in (1j, 2j, 1 + 1j):
        est = weyl_estimate(H, z, disc_tol=1e-8)
        expected = q_power_eval(law, z)
        assert abs(est.value - expected) / abs(expected) <= 1e-5
        assert est.det_deviation <= 1e-9
        radii = [r for _, r in est.radius_history]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(radii, radii[1:]))
        assert est.value.imag >= -1e-8


def test_conjugate_symmetry():
    """Real coefficients: W(t, conj z) = conj W(t, z)."""
    H = power_h(1.0, 2.0, 1.0, 1.0, 0.4)
    z = 0.7 + 1.3j
    W = fundamental_solution(H, 2.0, z).as_array()
    W_conj = fundamental_solution(H, 2.0, z.conjugate()).as_array()
    assert np.max(np.abs(W_conj - W.conj())) <= 1e-8 * max(1.0, np.max(np.abs(W)))


def test_tau_independence():
    """Images of tau = i and 1 + i lie in the final disc."""
    H = power_h(1.0, 3.0, 1.0, 2.0, 0.0)
    z = 1 + 1j
    est = weyl_estimate(H, z, disc_tol=1e-8)
    W = fundamental_solution(H, est.t_reached, z)
    for tau in (1j, 1 + 1j):
        assert abs(W.mobius(tau) - est.value) <= est.disc.radius * 1.001 + 1e-10


def test_reflection_conjugates_weyl_coefficient():
    """Flipping h3 maps q(z) to -conj q(-conj z)."""
    H = power_h(1.0, 2.0, 1.0, 1.0, 0.5)
    z = 0.5 + 1j
    q = weyl_coefficient(H, -z.conjugate())
    q_reflected = weyl_coefficient(reflect_off_diagonal(H), z)
    assert abs(q_reflected + q.conjugate()) < 1e-6


def test_rescaling_identity_random_parameters():
    """q of the (r, b1, b2) rescaling equals (b1/b2) q(r z), numerically on both sides."""
    rng = np.random.default_rng(39)
    H = power_h(1.0, 2.0, 1.0, 1.0, 0.5)
    for r, b1, b2 in rng.uniform(0.1, 10.0, size=(50, 3)):
        lhs = weyl_coefficient(rescale(H, r, b1, b2), 1j, disc_tol=1e-9)
        rhs = b1 / b2 * weyl_coefficient(H, r * 1j, disc_tol=1e-9)
        assert abs(lhs - rhs) <= 1e-5 * abs(rhs)


def test_seed_matrix_is_first_order_start():
    """I - z M(t) J has determinant 1 up to second order."""
    H = power_h(1.0, 2.0)
    W = seed_matrix(H, 1e-6, 1j)
    assert abs(W[0, 0] - 1) < 1e-5
    assert determinant_deviation(W) < 1e-11


def test_solver_only_moves_forward():
    solver = TransferMatrixSolver(constant_hamiltonian(IDENTITY), 1j)
    solver.advance(1.0)
    with pytest.raises(ValueError):
        solver.advance(0.5)


def test_weyl_disc_of_identity_matrix():
    """W = I maps the upper half-plane to itself: no finite disc."""
    W = fundamental_solution(constant_hamiltonian(IDENTITY), 0.0, 1j)
    assert math.isinf(weyl_disc(W).radius)


def test_checkpoint_schedule_doubles_to_t_max():
    points = list(checkpoint_schedule(0.0, 0.01, 1e-3))
    assert points[:4] == pytest.approx([1e-3, 2e-3, 4e-3, 8e-3])
    assert points[-1] == 0.01


def test_checkpoint_schedule_starts_above_seed():
    points = list(checkpoint_schedule(3e-3, 0.05, 1e-3))
    assert points[0] == pytest.approx(4e-3)
    assert all(b > a for a, b in zip(points, points[1:]))


def test_identity_disc_in_closed_form():
    """H = I at z = i: center i coth(2t), radius 1/sinh(2t)."""
    t = 3.0
    disc = weyl_disc(fundamental_solution(constant_hamiltonian(IDENTITY), t, 1j))
    assert disc.radius == pytest.approx(1 / math.sinh(2 * t), rel=1e-9)
    assert abs(disc.center - 1j / math.tanh(2 * t)) < 1e-12


@pytest.mark.parametrize("k3", [0.0, 0.5, -0.9])
def test_fundamental_solution_matches_kummer_form(k3):
    """First column of W(1, i) from the integrator equals the Kummer-function entries."""
    H = power_h(1.0, 2.0, 1.0, 1.0, k3)
    W = fundamental_solution(H, 1.0, 1j)
    w11, w21 = solution_entries_power(H.data, 1.0, 1j)
    assert abs(W.w11 - w11) <= 1e-8 * max(1.0, abs(w11))
    assert abs(W.w21 - w21) <= 1e-8 * max(1.0, abs(w21))


def test_fundamental_solution_matches_kummer_form_at_real_energy():
    """Real z puts the Kummer argument on the imaginary axis (|s| about 23)."""
    H = power_h(1.0, 2.0, 1.0, 1.0, 0.5)
    W = fundamental_solution(H, 1.0, 20.0)
    w11, w21 = solution_entries_power(H.data, 1.0, 20.0)
    assert abs(W.w11 - w11) <= 1e-6 * max(1.0, abs(w11))
    assert abs(W.w21 - w21) <= 1e-6 * max(1.0, abs(w21))


@pytest.mark.parametrize("z", [1j, 1 + 1j, 2 + 0.5j])
@pytest.mark.parametrize("t", [0.5, 3.0])
def test_identity_fundamental_matrix_closed_form(z, t):
    """H = I: W(t, z) = [[cos zt, sin zt], [-sin zt, cos zt]], exactly and by Runge-Kutta."""
    c, s = cmath.cos(z * t), cmath.sin(z * t)
    expected = np.array([[c, s], [-s, c]])
    scale = np.max(np.abs(expected))
    exact = fundamental_solution(constant_hamiltonian(IDENTITY), t, z).as_array()
    assert np.max(np.abs(exact - expected)) <= 1e-12 * scale
    integrated = fundamental_solution(power_h(1, 1), t, z).as_array()
    assert np.max(np.abs(integrated - expected)) <= 1e-7 * scale


@pytest.mark.parametrize(
    "H, t, z",
    [
        (power_h(1.0, 2.0, 1.0, 1.0, 0.5), 1.0, 1 + 1j),
        (power_h(1.0, 3.0, 1.0, 2.0, 0.0), 0.7, 0.5j),
        (step_hamiltonian(0.5), 2.0, 1j),
    ],
)
def test_real_line_images_lie_on_weyl_circle(H, t, z):
    """tau = 0, 1, -1, inf map onto the boundary of weyl_disc; tau = i maps inside."""
    W = fundamental_solution(H, t, z)
    disc = weyl_disc(W)
    assert disc.is_finite
    for tau in (0.0, 1.0, -1.0, complex(math.inf, 0.0)):
        assert abs(abs(W.mobius(tau) - disc.center) - disc.radius) <= 1e-9 * max(1.0, disc.radius)
    assert abs(W.mobius(1j) - disc.center) < disc.radius


def test_disc_radius_is_absolute_at_large_q():
    """diag(100, 1) has q(i) = 10i; the accepted disc is within disc_tol, not disc_tol * |q|."""
    est = weyl_estimate(constant_hamiltonian([[100.0, 0.0], [0.0, 1.0]]), 1j, disc_tol=1e-8)
    assert est.disc.radius <= 1e-8
    assert abs(est.value - 10j) <= 1e-8
