import math
from typing import Callable, List, Optional

import click
from prometheus_client import generate_latest
from pydantic import ValidationError

from canonsys.core.errors import SpecError
from canonsys.models import PerturbedPowerSpec, PowerData, PowerSpec, RunConfig
from canonsys.utils.spec_loader import load_spec, power_data
from canonsys.utils.tables import parse_complex, parse_list


def list_callback(item):
    def callback(ctx, param, value):
        try:
            return parse_list(value, item)
        except ValueError as exc:
            raise click.BadParameter(str(exc)) from exc

    return callback


def complex_callback(ctx, param, value):
    if value is None:
        return None
    try:
        return parse_complex(value)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc


def shared_options(f: Callable) -> Callable:
    """--spec, tolerances, horizon and --out, in that order on every subcommand."""
    options = [
        click.option(
            "--spec",
            "spec_path",
            required=True,
            type=click.Path(dir_okay=False),
            help="JSON Hamiltonian specification",
        ),
        click.option("--ode-tol", type=float, default=None, help="Local ODE tolerance"),
        click.option("--disc-tol", type=float, default=None, help="Accepted disc radius"),
        click.option("--t-max", type=float, default=None, help="Integration horizon"),
        click.option(
            "--out",
            "out_path",
            type=click.Path(dir_okay=False, writable=True),
            default=None,
            help="Output file (default stdout)",
        ),
    ]
    for option in reversed(options):
        f = option(f)
    return f


z_option = click.option(
    "--z",
    "z_list",
    default=None,
    callback=list_callback(parse_complex),
    help="Comma-separated complex numbers, e.g. i,2i,1+1i",
)
r_grid_option = click.option(
    "--r-grid",
    "r_grid",
    default=None,
    callback=list_callback(float),
    help="Comma-separated increasing r values",
)
metrics_option = click.option(
    "--metrics", is_flag=True, default=False, help="Dump metrics to stderr"
)


def build_config(command: str, spec_path: str, **fields) -> RunConfig:
    """RunConfig with None-valued options left at their settings defaults."""
    values = {k: v for k, v in fields.items() if v is not None}
    try:
        return RunConfig(command=command, input_path=spec_path, **values)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise SpecError(f"invalid option {where}: {first['msg']}") from exc


def angles_from_pi(multiples: List[float]) -> List[float]:
    return [m * math.pi for m in multiples]


def emit(config: RunConfig, lines: List[str], extra_header: Optional[List[str]] = None) -> None:
    """Header plus lines, to --out or stdout."""
    out = str(config.output) if config.output is not None else "-"
    with click.open_file(out, "w", encoding="utf-8") as fh:
        for line in config.header() + (extra_header or []) + lines:
            fh.write(line + "\n")


def dump_metrics() -> None:
    click.echo(generate_latest().decode("utf-8"), err=True, nl=False)


def power_spec_data(spec_path: str) -> PowerData:
    """PowerData of a power or perturbed-power spec; other kinds are a spec error."""
    spec = load_spec(spec_path)
    if not isinstance(spec, (PowerSpec, PerturbedPowerSpec)):
        raise SpecError(f"{spec_path}: expected a power or perturbed_power spec, got {spec.kind}")
    return power_data(spec)
