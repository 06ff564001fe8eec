import logging
import time
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, TypeVar

import pandas as pd
import typer
import yaml
from pydantic import BaseModel, ValidationError

from app import __version__
from app.core.config import settings
from app.core.exceptions import (
    DataNotFound,
    FaultBudgetExceeded,
    FusionWorkbenchError,
    InvalidInput,
)
from app.models import RunManifest
from app.utils import json_safe, sha256_file, write_json

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

EXIT_USAGE = 2
EXIT_MISSING_DATA = 3
EXIT_INTERNAL = 4
CSV_FLOAT_FORMAT = "%.6g"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


SeedOpt = Annotated[int | None, typer.Option("--seed", help="Master RNG seed.")]
TrialsOpt = Annotated[
    int | None, typer.Option("--trials", help="Monte Carlo trials per configuration.")
]
OutDirOpt = Annotated[
    Path | None, typer.Option("--out", help="Output directory (default OUTPUT_DIR).")
]
DataDirOpt = Annotated[
    Path | None,
    typer.Option("--data-dir", help="Intel dataset directory (default DATA_DIR)."),
]
FormatOpt = Annotated[
    OutputFormat, typer.Option("--format", help="Table format.", case_sensitive=False)
]
ConfigOpt = Annotated[
    Path | None,
    typer.Option("--config", help="YAML/JSON config file or a run manifest."),
]


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ValidationError, InvalidInput, FaultBudgetExceeded)):
        return EXIT_USAGE
    if isinstance(exc, DataNotFound):
        return EXIT_MISSING_DATA
    return EXIT_INTERNAL


@contextmanager
def cli_errors(command: str) -> Iterator[None]:
    """Report errors and exit with the mapped code; anything unexpected exits 4."""
    try:
        yield
    except (typer.Exit, typer.Abort):
        raise
    except (ValidationError, FusionWorkbenchError) as e:
        code = exit_code_for(e)
        if code == EXIT_INTERNAL:
            logger.error(f"{command} failed: {e}", exc_info=True)
        else:
            logger.debug(f"{command} rejected: {e}")
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code)
    except Exception as e:
        logger.error(f"{command} crashed: {e}", exc_info=True)
        typer.echo(f"Internal error: {e}", err=True)
        raise typer.Exit(EXIT_INTERNAL)


def load_config_file(path: Path | None) -> dict[str, Any]:
    """Values from a YAML/JSON file; a run manifest contributes its config block."""
    if path is None:
        return {}
    if not path.is_file():
        raise InvalidInput(f"config file not found: {path}")
    try:
        loaded = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise InvalidInput(f"cannot parse config file {path}: {e}")
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise InvalidInput(f"config file {path} must hold a mapping")
    if "command" in loaded and isinstance(loaded.get("config"), dict):
        return dict(loaded["config"])
    return loaded


def build_config(
    model: type[ModelT],
    config_file: Path | None,
    overrides: Mapping[str, Any],
    defaults: Mapping[str, Any] | None = None,
) -> ModelT:
    """
    Flags override the config file, which overrides ``defaults`` (environment
    settings), which override the model defaults.
    """
    values = {**(defaults or {}), **load_config_file(config_file)}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return model.model_validate(values)


def resolve_out_dir(out: Path | None) -> Path:
    out_dir = out or settings.OUTPUT_DIR
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


@dataclass
class CommandRun:
    """Collects one command's outputs and writes its manifest last."""

    command: str
    out_dir: Path
    fmt: OutputFormat = OutputFormat.CSV
    started: float = field(default_factory=time.perf_counter)
    outputs: list[Path] = field(default_factory=list)

    def table(self, name: str, frame: pd.DataFrame) -> Path:
        if self.fmt is OutputFormat.CSV:
            path = self.out_dir / f"{name}.csv"
            frame.to_csv(
                path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
            )
            logger.info(f"Wrote {path}")
        else:
            path = write_json(
                frame.to_dict(orient="records"), self.out_dir / f"{name}.json"
            )
        self.outputs.append(path)
        return path

    def document(self, name: str, payload: Any) -> Path:
        path = write_json(payload, self.out_dir / f"{name}.json")
        self.outputs.append(path)
        return path

    def finish(
        self,
        config: BaseModel,
        seed: int | None = None,
        inputs: Mapping[str, Path] | None = None,
        notes: list[str] | None = None,
    ) -> Path:
        manifest = RunManifest(
            command=self.command,
            config=json_safe(config),
            seed=seed,
            version=__version__,
            outputs=[str(p) for p in self.outputs],
            duration_seconds=time.perf_counter() - self.started,
            input_checksums={
                name: sha256_file(path) for name, path in (inputs or {}).items()
            },
            notes=notes or [],
        )
        path = write_json(manifest, self.out_dir / f"{self.command}.manifest.json")
        logger.info(
            f"{self.command} finished in {manifest.duration_seconds:.2f}s, "
            f"{len(self.outputs)} outputs"
        )
        return path
