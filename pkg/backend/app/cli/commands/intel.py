import logging
from typing import Annotated

import pandas as pd
import typer

from app.cli.deps import (
    CommandRun,
    ConfigOpt,
    DataDirOpt,
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
from app.core.exceptions import FusionWorkbenchError
from app.models import IntelConfig
from app.services.intel import IntelPipelineState, get_intel_pipeline
from app.services.intel.fetch import fetch_intel_dataset

logger = logging.getLogger(__name__)

CLUSTER_COLUMNS = ["cluster", "M", "classical_db", "sql_db", "hl_db", "gain_db"]


def cluster_table(state: IntelPipelineState) -> pd.DataFrame:
    rows = [
        {
            "cluster": f"C{row.cluster}",
            "M": row.sensors,
            "classical_db": row.classical_db,
            "sql_db": row.sql_db,
            "hl_db": row.hl_db,
            "gain_db": row.gain_db,
        }
        for row in state.snr
    ]
    return pd.DataFrame(rows, columns=CLUSTER_COLUMNS)


def intel(
    data_dir: DataDirOpt = None,
    clusters: Annotated[int | None, typer.Option("--clusters", help="k for k-means.")] = None,
    exclude_windows: Annotated[
        bool | None,
        typer.Option(
            "--exclude-windows/--include-windows",
            help="Leave window motes out of the SNR table and curves.",
        ),
    ] = None,
    tolerance: Annotated[
        float | None, typer.Option("--tolerance", help="Reading half-width in degC.")
    ] = None,
    wall_margin: Annotated[float | None, typer.Option("--wall-margin")] = None,
    z_thresh: Annotated[float | None, typer.Option("--z-thresh")] = None,
    epochs: Annotated[int | None, typer.Option("--epochs")] = None,
    atoms: Annotated[int | None, typer.Option("--atoms", "--N")] = None,
    seed: SeedOpt = None,
    trials: TrialsOpt = None,
    out: OutDirOpt = None,
    fmt: FormatOpt = OutputFormat.CSV,
    config: ConfigOpt = None,
) -> None:
    """Intel Lab mote pipeline: clusters, window motes, agreement, SNR and curves."""
    with cli_errors("intel"):
        intel_config = build_config(
            IntelConfig,
            config,
            {
                "data_dir": data_dir,
                "clusters": clusters,
                "exclude_windows": exclude_windows,
                "tolerance": tolerance,
                "wall_margin": wall_margin,
                "z_thresh": z_thresh,
                "epochs": epochs,
                "atoms": atoms,
                "seed": seed,
                "trials": trials,
            },
            defaults={"seed": settings.DEFAULT_SEED},
        )
        directory = intel_config.data_dir or settings.DATA_DIR
        intel_config = intel_config.model_copy(update={"data_dir": directory})

        state = get_intel_pipeline().execute(intel_config, directory)
        if state.error:
            raise FusionWorkbenchError(state.error)

        run = CommandRun("intel", resolve_out_dir(out), fmt)
        run.table("intel_clusters", cluster_table(state))
        run.document("intel_agreement", state.summary())
        run.finish(
            intel_config,
            seed=intel_config.seed,
            inputs={
                state.data_path.name: state.data_path,
                state.locations_path.name: state.locations_path,
            },
        )


def fetch_intel(data_dir: DataDirOpt = None) -> None:
    """Download the Intel Lab data and location files into the data directory."""
    with cli_errors("fetch-intel"):
        written = fetch_intel_dataset(data_dir or settings.DATA_DIR)
        for path in written.values():
            typer.echo(str(path))
