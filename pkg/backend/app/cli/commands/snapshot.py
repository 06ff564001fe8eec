from typing import Annotated

import typer

from app.cli.deps import (
    CommandRun,
    ConfigOpt,
    OutDirOpt,
    SeedOpt,
    build_config,
    cli_errors,
    resolve_out_dir,
)
from app.core.config import settings
from app.models import ExperimentConfig, Scenario
from app.services.montecarlo import overlap_snapshot


def snapshot(
    scenario: Annotated[
        Scenario, typer.Option("--scenario", case_sensitive=False)
    ] = Scenario.NO_FAULT,
    sensors: Annotated[int, typer.Option("--sensors", min=1)] = 10,
    fault_frac: Annotated[float | None, typer.Option("--fault-frac")] = None,
    visibility: Annotated[float | None, typer.Option("--visibility")] = None,
    seed: SeedOpt = None,
    out: OutDirOpt = None,
    config: ConfigOpt = None,
) -> None:
    """One trial's intervals, overlap regions and estimates as JSON."""
    with cli_errors("snapshot"):
        experiment = build_config(
            ExperimentConfig,
            config,
            {"fault_fraction": fault_frac, "visibility": visibility, "seed": seed},
            defaults={"seed": settings.DEFAULT_SEED},
        )
        result = overlap_snapshot(experiment, scenario, sensors)
        run = CommandRun(f"snapshot_{scenario.value}", resolve_out_dir(out))
        run.document(f"snapshot_{scenario.value}", result.to_dict())
        run.finish(experiment, seed=experiment.seed)
