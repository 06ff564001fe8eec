import logging
import math
from itertools import product
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
from app.core.exceptions import FaultBudgetExceeded, InvalidInput
from app.models import BoundQuery, BoundsSweep
from app.services.bounds import outlier_advantage_db, sql_variance, unified_bound
from app.utils import parse_float_list, parse_int_list, parse_sensor_counts, parse_str_list

logger = logging.getLogger(__name__)

COLUMNS = [
    "M",
    "f",
    "V",
    "strategy",
    "m_eff",
    "mse_lower",
    "rmse_lower",
    "gain_db",
    "advantage_db",
]


def bounds_table(sweep: BoundsSweep) -> pd.DataFrame:
    """
    One row per (M, f, V, strategy) inside the strategy's fault budget.

    gain_db compares the bound with the fault-free SQL at M sensors.
    """
    rows = []
    grid = product(sweep.sensors, sweep.faults, sweep.visibilities, sweep.strategies)
    for sensors, faults, visibility, strategy in grid:
        query = BoundQuery(
            atoms=sweep.atoms,
            sensitivity=sweep.sensitivity,
            sensors=sensors,
            faults=faults,
            visibility=visibility,
            strategy=strategy,
        )
        try:
            bound = unified_bound(query)
        except FaultBudgetExceeded as e:
            logger.warning(f"Skipping grid point: {e}")
            continue
        sql = sql_variance(sweep.atoms, sweep.sensitivity, sensors)
        advantage = (
            outlier_advantage_db(sensors, faults)
            if sensors - 2 * faults > 0
            else math.nan
        )
        rows.append(
            {
                "M": sensors,
                "f": faults,
                "V": visibility,
                "strategy": strategy.value,
                "m_eff": bound.m_eff,
                "mse_lower": bound.mse_lower,
                "rmse_lower": bound.rmse_lower,
                "gain_db": 10.0 * math.log10(sql / bound.mse_lower),
                "advantage_db": advantage,
            }
        )
    if not rows:
        raise InvalidInput("no grid point lies within a fault budget")
    return pd.DataFrame(rows, columns=COLUMNS)


def bounds(
    sensors: Annotated[
        str | None, typer.Option("--M", help="Sensor counts: a..b (doubling) or a,b,c.")
    ] = None,
    faults: Annotated[str | None, typer.Option("--f", help="Fault counts, comma list.")] = None,
    visibilities: Annotated[
        str | None, typer.Option("--V", help="Visibilities in [0, 1], comma list.")
    ] = None,
    strategies: Annotated[
        str | None, typer.Option("--strategy", help="bft, outlier or both (comma list).")
    ] = None,
    atoms: Annotated[int | None, typer.Option("--N", help="Atoms per sensor.")] = None,
    eta: Annotated[float | None, typer.Option("--eta", help="Sensitivity.")] = None,
    out: OutDirOpt = None,
    fmt: FormatOpt = OutputFormat.CSV,
    config: ConfigOpt = None,
) -> None:
    """Unified MSE lower bounds over an (M, f, V, strategy) grid."""
    with cli_errors("bounds"):
        sweep = build_config(
            BoundsSweep,
            config,
            {
                "sensors": parse_sensor_counts(sensors) if sensors else None,
                "faults": parse_int_list(faults) if faults else None,
                "visibilities": parse_float_list(visibilities) if visibilities else None,
                "strategies": parse_str_list(strategies) if strategies else None,
                "atoms": atoms,
                "sensitivity": eta,
            },
        )
        run = CommandRun("bounds", resolve_out_dir(out), fmt)
        run.table("bounds", bounds_table(sweep))
        run.finish(sweep)
