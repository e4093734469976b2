import logging

import click
from pydantic import ValidationError

from canonsys.commands.common import (
    angles_from_pi,
    build_config,
    complex_callback,
    dump_metrics,
    emit,
    list_callback,
    metrics_option,
    r_grid_option,
    shared_options,
)
from canonsys.core.errors import ConeViolation, SpecError
from canonsys.models import PerturbedPowerSpec, PowerLaw, PowerSpec
from canonsys.services.asymptotics import constants_ledger, verify_asymptotics
from canonsys.utils.spec_loader import build_hamiltonian, load_spec, power_data
from canonsys.utils.tables import csv_lines, pairs_line

logger = logging.getLogger(__name__)


def _law(spec, alpha, omega) -> PowerLaw:
    """Predicted law of the spec, with --alpha / --omega taking precedence."""
    if alpha is None or omega is None:
        if not isinstance(spec, (PowerSpec, PerturbedPowerSpec)):
            raise SpecError(f"{spec.kind} spec: pass both --alpha and --omega")
        ledger = constants_ledger(power_data(spec))
        alpha = ledger.alpha if alpha is None else alpha
        omega = ledger.omega_prime if omega is None else omega
    try:
        return PowerLaw(alpha=alpha, omega=omega)
    except ValidationError as exc:
        raise ConeViolation(exc.errors()[0]["msg"]) from exc


@click.command("verify")
@shared_options
@r_grid_option
@click.option(
    "--angles",
    "angles",
    default="0.5",
    callback=list_callback(float),
    help="Comma-separated angles in multiples of pi",
)
@click.option("--threshold", type=float, default=0.05, help="Final-r relative error bound")
@click.option("--alpha", type=float, default=None, help="Override the predicted alpha")
@click.option(
    "--omega",
    default=None,
    callback=complex_callback,
    help="Override the predicted omega'",
)
@metrics_option
def verify(spec_path, ode_tol, disc_tol, t_max, out_path, r_grid, angles, threshold, alpha, omega, metrics):
    """Compare q_H(r e^{i phi}) with i omega' (z/i)^alpha over an (r, phi) grid."""
    config = build_config(
        "verify",
        spec_path,
        ode_tol=ode_tol,
        disc_tol=disc_tol,
        t_max=t_max,
        output=out_path,
        r_grid=r_grid,
        angle_grid=angles_from_pi(angles),
        threshold=threshold,
    )
    if not config.r_grid or not config.angle_grid:
        raise SpecError("verify needs a nonempty --r-grid and --angles")
    spec = load_spec(spec_path)
    law = _law(spec, alpha, omega)
    H = build_hamiltonian(spec)
    logger.info(
        "[Verify] alpha=%.6g omega=%s on %d cells",
        law.alpha,
        law.omega,
        len(config.r_grid) * len(config.angle_grid),
    )

    verdict = verify_asymptotics(
        H,
        law,
        config.r_grid,
        config.angle_grid,
        threshold=config.threshold,
        disc_tol=config.disc_tol,
        t_max=config.t_max,
        tol=config.ode_tol,
    )
    rows = []
    for i, r in enumerate(verdict.r_grid):
        for j, multiple in enumerate(angles):
            rows.append((r, multiple, verdict.relative_errors[i][j], verdict.statuses[i][j]))
    lines = csv_lines(["r", "phi_over_pi", "rel_error", "status"], rows)
    lines.append(pairs_line([("verdict", "PASS" if verdict.passed else "FAIL")]))
    emit(
        config,
        lines,
        extra_header=["# " + pairs_line([("alpha", law.alpha), ("omega", law.omega)])],
    )
    if metrics:
        dump_metrics()
