import click

from canonsys.commands.common import build_config, emit, power_spec_data, shared_options
from canonsys.services.asymptotics import constants_ledger
from canonsys.utils.tables import pairs_line

# formula family each ledger entry is computed with
SOURCES = {
    "rho1": "power_index",
    "rho2": "power_index",
    "sigma": "min_index",
    "alpha": "index_ratio",
    "delta": "leading_coefficients",
    "omega": "trace_normalized_gamma_ratio",
    "omega_prime": "coefficient_normalization",
    "arg_omega": "tanh_argument",
    "c1": "kappa_over_rho",
    "c2": "kappa_over_rho",
    "c3": "kappa_over_rho",
}


@click.command("predict")
@shared_options
def predict(spec_path, ode_tol, disc_tol, t_max, out_path):
    """Asymptotic constants of a power or perturbed-power spec, with provenance."""
    config = build_config(
        "predict", spec_path, ode_tol=ode_tol, disc_tol=disc_tol, t_max=t_max, output=out_path
    )
    ledger = constants_ledger(power_spec_data(spec_path))
    values = ledger.model_dump()
    lines = [pairs_line([(name, values[name]), ("source", source)]) for name, source in SOURCES.items()]
    emit(config, lines)
