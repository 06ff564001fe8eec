from typing import Annotated

import pandas as pd
import typer

from app.cli.deps import (
    CommandRun,
    ConfigOpt,
    FormatOpt,
    OutDirOpt,
    OutputFormat,
    build_config,
    cli_errors,
    resolve_out_dir,
)
from app.models import EightSensorConfig
from app.services.eight_sensor import eight_sensor_report


def eight_sensor(
    atoms: Annotated[int | None, typer.Option("--N", help="Atoms per sensor.")] = None,
    eta: Annotated[float | None, typer.Option("--eta", help="Sensitivity.")] = None,
    alpha: Annotated[float | None, typer.Option("--alpha")] = None,
    out: OutDirOpt = None,
    fmt: FormatOpt = OutputFormat.CSV,
    config: ConfigOpt = None,
) -> None:
    """
    Fuse the embedded eight-sensor dataset and report bounds and the
    range-to-atoms mapping. The report is always JSON; --format csv also
    writes the per-sensor table.
    """
    with cli_errors("eight-sensor"):
        report_config = build_config(
            EightSensorConfig,
            config,
            {"atoms": atoms, "sensitivity": eta, "alpha": alpha},
        )
        report = eight_sensor_report(report_config)
        run = CommandRun("eight_sensor", resolve_out_dir(out), fmt)
        run.document("eight_sensor", report)
        if fmt is OutputFormat.CSV:
            run.table("eight_sensor_sensors", pd.DataFrame(report["sensors"]))
        run.finish(report_config)
