import logging
import math
from collections.abc import Sequence
from typing import Annotated

import pandas as pd
import typer

from app.cli.deps import (
    CommandRun,
    ConfigOpt,
    FormatOpt,
    OutDirOpt,
    OutputFormat,
    SeedOpt,
    TrialsOpt,
    build_config,
    cli_errors,
    resolve_out_dir,
)
from app.core.config import settings
from app.models import ExperimentConfig, FusionMethod, TrialStats
from app.services.montecarlo import (
    bound_dominance,
    fit_loglog_slope,
    local_slope_curve,
    recovery_gains,
    run_experiment,
)
from app.utils import parse_sensor_counts, parse_str_list

logger = logging.getLogger(__name__)

COLUMNS = [
    "method",
    "sensors",
    "faults",
    "rmse",
    "rmse_stderr",
    "mean_bias",
    "fallback_trials",
    "recovery_gain_db",
    "slope",
    "local_slope",
    "mse_bound",
    "bound_margin_z",
]


def _slopes(
    stats: Sequence[TrialStats],
) -> tuple[dict[FusionMethod, float], dict[tuple[FusionMethod, int], float]]:
    fitted: dict[FusionMethod, float] = {}
    local: dict[tuple[FusionMethod, int], float] = {}
    for method in dict.fromkeys(s.method for s in stats):
        points = [(float(s.sensors), s.rmse) for s in stats if s.method is method]
        if any(rmse <= 0 for _, rmse in points):
            continue
        if len(points) >= 3:
            fitted[method] = fit_loglog_slope(points)
        if len(points) >= 2:
            for sensors, slope in local_slope_curve(points):
                local[(method, int(sensors))] = slope
    return fitted, local


def simulation_table(config: ExperimentConfig, stats: Sequence[TrialStats]) -> pd.DataFrame:
    gains = recovery_gains(stats)
    fitted, local = _slopes(stats)
    dominance = {
        (row.method, row.sensors): row
        for row in bound_dominance(config, stats=stats)
    }
    rows = []
    for s in stats:
        bound = dominance.get((s.method, s.sensors))
        rows.append(
            {
                "method": s.method.value,
                "sensors": s.sensors,
                "faults": s.faults,
                "rmse": s.rmse,
                "rmse_stderr": s.rmse_stderr,
                "mean_bias": s.mean_bias,
                "fallback_trials": s.fallback_trials,
                "recovery_gain_db": gains.get((s.sensors, s.method), math.nan),
                "slope": fitted.get(s.method, math.nan),
                "local_slope": local.get((s.method, s.sensors), math.nan),
                "mse_bound": bound.mse_bound if bound else math.nan,
                "bound_margin_z": bound.z_margin if bound else math.nan,
            }
        )
    return pd.DataFrame(rows, columns=COLUMNS)


def simulate(
    sensors: Annotated[
        str | None, typer.Option("--M", help="Sensor counts: a..b (doubling) or a,b,c.")
    ] = None,
    methods: Annotated[
        str | None, typer.Option("--methods", help="Comma list of fusion methods.")
    ] = None,
    fault_frac: Annotated[
        float | None, typer.Option("--fault-frac", help="Byzantine fraction f/M.")
    ] = None,
    visibility: Annotated[float | None, typer.Option("--visibility")] = None,
    tau_prep: Annotated[float | None, typer.Option("--tau-prep")] = None,
    alpha: Annotated[float | None, typer.Option("--alpha")] = None,
    atoms: Annotated[int | None, typer.Option("--N", help="Atoms per sensor.")] = None,
    eta: Annotated[float | None, typer.Option("--eta", help="Sensitivity.")] = None,
    workers: Annotated[int | None, typer.Option("--workers")] = None,
    seed: SeedOpt = None,
    trials: TrialsOpt = None,
    out: OutDirOpt = None,
    fmt: FormatOpt = OutputFormat.CSV,
    config: ConfigOpt = None,
) -> None:
    """Monte Carlo RMSE per (method, M) with slopes, recovery gains and bound margins."""
    with cli_errors("simulate"):
        experiment = build_config(
            ExperimentConfig,
            config,
            {
                "sensor_counts": parse_sensor_counts(sensors) if sensors else None,
                "methods": parse_str_list(methods) if methods else None,
                "fault_fraction": fault_frac,
                "visibility": visibility,
                "tau_prep": tau_prep,
                "alpha": alpha,
                "atoms": atoms,
                "sensitivity": eta,
                "workers": workers,
                "seed": seed,
                "trials": trials,
            },
            defaults={
                "seed": settings.DEFAULT_SEED,
                "trials": settings.DEFAULT_TRIALS,
                "workers": settings.WORKERS,
            },
        )
        stats = run_experiment(experiment)
        run = CommandRun("simulate", resolve_out_dir(out), fmt)
        run.table("simulate", simulation_table(experiment, stats))
        run.finish(experiment, seed=experiment.seed)
