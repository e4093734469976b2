import logging

import click

from canonsys.commands.common import build_config, emit, shared_options, z_option
from canonsys.core.errors import DomainViolation, NumericFailure, SpecError
from canonsys.services.grid_batcher import GridBatcher
from canonsys.services.weyl_numeric import weyl_estimate
from canonsys.utils.spec_loader import load_hamiltonian
from canonsys.utils.tables import csv_lines

logger = logging.getLogger(__name__)

COLUMNS = ["z_re", "z_im", "q_re", "q_im", "radius", "t_reached", "status"]


def _cell(H, z, disc_tol, tol):
    def run(horizon: float):
        return weyl_estimate(H, z, disc_tol=disc_tol, t_max=horizon, tol=tol)

    return run


@click.command("numeric-q")
@shared_options
@z_option
def numeric_q(spec_path, ode_tol, disc_tol, t_max, out_path, z_list):
    """Weyl coefficient by nested discs, one CSV row per z."""
    config = build_config(
        "numeric-q",
        spec_path,
        ode_tol=ode_tol,
        disc_tol=disc_tol,
        t_max=t_max,
        output=out_path,
        z_list=z_list,
    )
    if not config.z_list:
        raise SpecError("numeric-q needs --z")
    off = [z for z in config.z_list if z.imag <= 0]
    if off:
        raise DomainViolation(f"Im z must be positive, got z = {off[0]}")
    H = load_hamiltonian(spec_path)

    cells = [_cell(H, z, config.disc_tol, config.ode_tol) for z in config.z_list]
    outcomes = GridBatcher().run_sync(cells, config.t_max)

    rows = []
    for z, outcome in zip(config.z_list, outcomes):
        if outcome.ok:
            est = outcome.value
            rows.append(
                (z.real, z.imag, est.value.real, est.value.imag, est.disc.radius, est.t_reached, "ok")
            )
            continue
        radius = outcome.last_disc.radius if outcome.last_disc is not None else None
        rows.append((z.real, z.imag, None, None, radius, outcome.t_reached, outcome.status))
    emit(config, csv_lines(COLUMNS, rows))

    if not any(o.ok for o in outcomes):
        raise NumericFailure(f"no z converged ({len(outcomes)} cells)")
    logger.info("[NumericQ] %d/%d cells converged", sum(o.ok for o in outcomes), len(outcomes))
