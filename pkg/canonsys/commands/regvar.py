import click

from canonsys.commands.common import build_config, emit, shared_options
from canonsys.services.regvar import analyze_primitives
from canonsys.utils.spec_loader import load_hamiltonian
from canonsys.utils.tables import pairs_line


@click.command("regvar")
@shared_options
@click.option("--t-min", type=float, default=1e-6, help="Smallest sample point")
@click.option("--t-max-sample", type=float, default=10.0, help="Largest sample point")
@click.option("--samples", type=int, default=61, help="Geometric sample count")
def regvar(spec_path, ode_tol, disc_tol, t_max, out_path, t_min, t_max_sample, samples):
    """Regular/rapid variation of m1 and m2 at 0, and the off-diagonal limit delta."""
    config = build_config(
        "regvar", spec_path, ode_tol=ode_tol, disc_tol=disc_tol, t_max=t_max, output=out_path
    )
    H = load_hamiltonian(spec_path)
    m1, m2, delta = analyze_primitives(H, t_min=t_min, t_max=t_max_sample, samples=samples)
    lines = [
        pairs_line(
            [
                ("primitive", name),
                ("index", report.index),
                ("rapid", report.rapid),
                ("scale", report.scale),
                ("fit_residual", report.fit_residual),
                ("decades_used", report.decades_used),
                ("samples_used", report.samples_used),
            ]
        )
        for name, report in (("m1", m1), ("m2", m2))
    ]
    lines.append(pairs_line([("delta", delta)]))
    emit(config, lines)
