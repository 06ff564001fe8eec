import logging
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
from app.models import CrossoverSweep
from app.services.bounds import critical_visibility_literal, critical_visibility_scaling
from app.services.montecarlo import empirical_crossover
from app.utils import parse_float_list

logger = logging.getLogger(__name__)

ZERO_FAULT_NOTE = (
    "fault_frac = 0 rows: the entangled side still has to beat plain averaging of "
    "M_eff sensors at the standard quantum limit, so V* is where 1/(V M_eff) meets "
    "1/sqrt(M_eff), i.e. exp(tau)/sqrt(M_eff), not 0"
)

COLUMNS = [
    "fault_frac",
    "tau_prep",
    "v_star_empirical",
    "v_star_literal",
    "no_crossing",
    "v_star_scaling",
]


def crossover_table(sweep: CrossoverSweep) -> pd.DataFrame:
    """Phase diagram over fault fraction x preparation overhead."""
    rows = []
    for frac in sweep.fault_fracs:
        for tau in sweep.taus:
            point = sweep.model_copy(update={"fault_fraction": frac, "tau_prep": tau})
            result = empirical_crossover(point, sweep.strategy)
            rows.append(
                {
                    "fault_frac": frac,
                    "tau_prep": tau,
                    "v_star_empirical": result.v_star,
                    "v_star_literal": critical_visibility_literal(result.m_eff, tau),
                    "no_crossing": result.no_crossing,
                    "v_star_scaling": critical_visibility_scaling(result.m_eff, tau),
                }
            )
    logger.info(f"Crossover grid: {len(rows)} points at M={sweep.crossover_sensors}")
    return pd.DataFrame(rows, columns=COLUMNS)


def crossover(
    fault_fracs: Annotated[
        str | None, typer.Option("--fault-fracs", help="Comma list of f/M values.")
    ] = None,
    taus: Annotated[
        str | None, typer.Option("--taus", help="Comma list of preparation overheads.")
    ] = None,
    strategy: Annotated[
        str | None, typer.Option("--strategy", help="bft or outlier.")
    ] = None,
    sensors: Annotated[int | None, typer.Option("--sensors", help="Network size M.")] = None,
    atoms: Annotated[int | None, typer.Option("--N", help="Atoms per sensor.")] = None,
    eta: Annotated[float | None, typer.Option("--eta", help="Sensitivity.")] = None,
    seed: SeedOpt = None,
    trials: TrialsOpt = None,
    out: OutDirOpt = None,
    fmt: FormatOpt = OutputFormat.CSV,
    config: ConfigOpt = None,
) -> None:
    """Critical visibility V* over fault fraction and preparation overhead."""
    with cli_errors("crossover"):
        sweep = build_config(
            CrossoverSweep,
            config,
            {
                "fault_fracs": parse_float_list(fault_fracs) if fault_fracs else None,
                "taus": parse_float_list(taus) if taus else None,
                "strategy": strategy,
                "crossover_sensors": sensors,
                "atoms": atoms,
                "sensitivity": eta,
                "seed": seed,
                "crossover_trials": trials,
            },
            defaults={"seed": settings.DEFAULT_SEED},
        )
        run = CommandRun("crossover", resolve_out_dir(out), fmt)
        run.table("crossover", crossover_table(sweep))
        notes = [ZERO_FAULT_NOTE] if 0.0 in sweep.fault_fracs else []
        run.finish(sweep, seed=sweep.seed, notes=notes)
