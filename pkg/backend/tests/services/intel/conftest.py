from pathlib import Path

import pandas as pd
import pytest

from app.core.config import INTEL_DATA_FILE, INTEL_LOCATIONS_FILE
from app.models import ClusterAssignment, MoteLocation
from app.services.intel.clustering import kmeans_clusters
from app.services.intel.parsing import (
    clean_mote_data,
    parse_mote_data,
    parse_mote_locations,
    read_lines,
)


@pytest.fixture
def mini_locations(intel_mini_dir: Path) -> list[MoteLocation]:
    return parse_mote_locations(read_lines(intel_mini_dir / INTEL_LOCATIONS_FILE))


@pytest.fixture
def mini_frame(intel_mini_dir: Path, mini_locations: list[MoteLocation]) -> pd.DataFrame:
    parsed = parse_mote_data(read_lines(intel_mini_dir / INTEL_DATA_FILE))
    return clean_mote_data(parsed.frame, mini_locations).frame


@pytest.fixture
def mini_assignment(mini_locations: list[MoteLocation]) -> ClusterAssignment:
    return kmeans_clusters(mini_locations, k=1, seed=0)
