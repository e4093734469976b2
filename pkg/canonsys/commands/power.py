import cmath
import logging

import click

from canonsys.commands.common import build_config, emit, power_spec_data, shared_options, z_option
from canonsys.services.power_model import boundary_case, closed_form_q, q_power_eval
from canonsys.utils.tables import csv_lines, pairs_line

logger = logging.getLogger(__name__)

BOUNDARY_LINES = {
    "q_infinite": "q = infinity (kappa2 = 0: indivisible start of type 0)",
    "q_zero": "q = 0 (kappa1 = 0: indivisible start of type pi/2)",
}


@click.command("power-q")
@shared_options
@z_option
def power_q(spec_path, ode_tol, disc_tol, t_max, out_path, z_list):
    """Closed-form power law (alpha, omega) of a power Hamiltonian."""
    config = build_config(
        "power-q",
        spec_path,
        ode_tol=ode_tol,
        disc_tol=disc_tol,
        t_max=t_max,
        output=out_path,
        z_list=z_list,
    )
    data = power_spec_data(spec_path)
    if data.boundary is not None:
        verdict = boundary_case(data)
        logger.info("[PowerQ] boundary class %s", verdict.kind)
        emit(config, [BOUNDARY_LINES[verdict.kind], f"boundary={verdict.kind}"])
        return

    law = closed_form_q(data)
    omega = law.omega
    lines = [
        pairs_line([("alpha", law.alpha), ("omega", omega)]),
        pairs_line([("omega_re", omega.real)]),
        pairs_line([("omega_im", omega.imag)]),
        pairs_line([("omega_abs", abs(omega))]),
        pairs_line([("omega_arg", cmath.phase(omega))]),
    ]
    if config.z_list:
        rows = []
        for z in config.z_list:
            q = q_power_eval(law, z)
            rows.append((z.real, z.imag, q.real, q.imag))
        lines += csv_lines(["z_re", "z_im", "Q_re", "Q_im"], rows)
    emit(config, lines)
