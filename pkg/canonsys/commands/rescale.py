import click

from canonsys.commands.common import (
    build_config,
    dump_metrics,
    emit,
    list_callback,
    metrics_option,
    r_grid_option,
    shared_options,
)
from canonsys.core.errors import SpecError
from canonsys.services.asymptotics import a_H, kasahara_scalers, rescaling_limit_check
from canonsys.utils.spec_loader import load_hamiltonian
from canonsys.utils.tables import csv_lines, pairs_line


@click.command("rescale")
@shared_options
@r_grid_option
@click.option(
    "--x-grid",
    "x_grid",
    default="0.5,1,2",
    callback=list_callback(float),
    help="Points where rescaled primitives are compared with the limit",
)
@metrics_option
def rescale(spec_path, ode_tol, disc_tol, t_max, out_path, r_grid, x_grid, metrics):
    """Scaling functions per r and the distance of the rescaled primitives to their limit."""
    config = build_config(
        "rescale",
        spec_path,
        ode_tol=ode_tol,
        disc_tol=disc_tol,
        t_max=t_max,
        output=out_path,
        r_grid=r_grid,
    )
    if not config.r_grid or not x_grid:
        raise SpecError("rescale needs a nonempty --r-grid and --x-grid")
    H = load_hamiltonian(spec_path)

    deviations = rescaling_limit_check(H, config.r_grid, x_grid)
    rows = []
    for dev in deviations:
        scalers = kasahara_scalers(H, dev.r)
        rows.append((dev.r, dev.breve_t, a_H(H, dev.r), scalers.b1, scalers.b2, dev.deviation))
    lines = csv_lines(["r", "breve_t", "a_H", "b1", "b2", "deviation"], rows)
    lines.append(
        pairs_line(
            [
                ("max_m1", max(d.m1 for d in deviations)),
                ("max_m2", max(d.m2 for d in deviations)),
                ("max_m3", max(d.m3 for d in deviations)),
            ]
        )
    )
    emit(config, lines, extra_header=["# x_grid=" + ",".join(format(x, ".17g") for x in x_grid)])
    if metrics:
        dump_metrics()
