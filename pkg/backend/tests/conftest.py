from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from app.core.config import settings
from app.models import ExperimentConfig

FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240229)


@pytest.fixture(scope="session")
def intel_mini_dir() -> Path:
    return FIXTURES_DIR / "intel_mini"


@pytest.fixture(scope="session")
def intel_data_dir() -> Path:
    """The full Intel Lab dataset; tests using it skip when it is absent."""
    data_dir = settings.DATA_DIR
    if not (settings.intel_data_path.is_file() and settings.intel_locations_path.is_file()):
        pytest.skip(f"Intel Lab dataset not found in {data_dir} (run `qfusion fetch-intel`)")
    return data_dir


@pytest.fixture(scope="module")
def runner() -> Generator[CliRunner, None, None]:
    yield CliRunner()


@pytest.fixture
def small_experiment() -> ExperimentConfig:
    return ExperimentConfig(sensor_counts=[4, 8, 16], trials=400, seed=7)
