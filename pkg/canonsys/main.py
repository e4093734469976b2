import logging

import click

from canonsys.commands import numeric, power, predict, regvar, rescale, verify
from canonsys.core.errors import CanonsysError
from canonsys.core.log_setup import configure_logging

logger = logging.getLogger(__name__)


class CanonsysGroup(click.Group):
    """Maps library errors to their exit codes: 2 spec, 3 numeric, 4 domain, 5 data."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except CanonsysError as exc:
            logger.debug("[CLI] %s", type(exc).__name__, exc_info=True)
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)


def create_cli() -> click.Group:
    """
    Factory function to create the canonsys command group.
    """

    @click.group(cls=CanonsysGroup)
    @click.option(
        "--log-level",
        type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
        default=None,
        help="Overrides CANONSYS_LOG_LEVEL",
    )
    def cli(log_level):
        """Weyl coefficients of canonical systems: closed form, numerics, asymptotics."""
        configure_logging(log_level)

    cli.add_command(power.power_q)
    cli.add_command(numeric.numeric_q)
    cli.add_command(predict.predict)
    cli.add_command(verify.verify)
    cli.add_command(regvar.regvar)
    cli.add_command(rescale.rescale)
    return cli


cli = create_cli()

if __name__ == "__main__":
    cli()
