import logging
from typing import Annotated

import sentry_sdk
import typer

from app import __version__
from app.cli.commands import bounds, crossover, eight_sensor, intel, simulate, snapshot
from app.core.config import settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

app = typer.Typer(
    name="qfusion",
    help="Quantum sensor fusion workbench.",
    no_args_is_help=True,
    add_completion=False,
)


def _version(value: bool) -> None:
    if value:
        typer.echo(f"{settings.PROJECT_NAME} {__version__}")
        raise typer.Exit()


@app.callback()
def configure(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging.")] = False,
    version: Annotated[  # noqa: ARG001
        bool,
        typer.Option("--version", callback=_version, is_eager=True, help="Show version."),
    ] = False,
) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else settings.LOG_LEVEL, format=LOG_FORMAT
    )
    if settings.error_reporting_enabled:
        sentry_sdk.init(dsn=str(settings.SENTRY_DSN), environment=settings.ENVIRONMENT)


app.command("bounds")(bounds.bounds)
app.command("simulate")(simulate.simulate)
app.command("crossover")(crossover.crossover)
app.command("eight-sensor")(eight_sensor.eight_sensor)
app.command("snapshot")(snapshot.snapshot)
app.command("intel")(intel.intel)
app.command("fetch-intel")(intel.fetch_intel)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
