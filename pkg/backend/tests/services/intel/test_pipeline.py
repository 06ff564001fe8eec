"""Tests for the Intel Lab pipeline orchestration."""

import math

import pytest

from app.core.config import INTEL_DATA_FILE, INTEL_LOCATIONS_FILE
from app.core.exceptions import DataNotFound
from app.models import IntelConfig
from app.services.intel import IntelPipeline, get_intel_pipeline

EXPECTED_NODES = [
    "load_inputs",
    "clean_readings",
    "cluster_motes",
    "flag_window_motes",
    "select_well_covered_epochs",
    "measure_agreement",
    "compare_snr",
    "missing_data_curves",
]


@pytest.fixture
def pipeline() -> IntelPipeline:
    return IntelPipeline()


@pytest.fixture
def mini_config() -> IntelConfig:
    return IntelConfig(clusters=1, trials=500)


class TestIntelPipeline:
    """Test the end-to-end pipeline on the mini fixture."""

    def test_runs_every_node(self, pipeline, mini_config, intel_mini_dir):
        """Test nodes execute in order without error."""
        state = pipeline.execute(mini_config, intel_mini_dir)
        assert state.error is None
        assert state.nodes_executed == EXPECTED_NODES

    def test_summary(self, pipeline, mini_config, intel_mini_dir):
        """Test the agreement summary."""
        summary = pipeline.execute(mini_config, intel_mini_dir).summary()
        assert summary["readings"] == 29
        assert summary["skipped_lines"] == 2
        assert summary["dropped_temperature"] == 1
        assert summary["dropped_unlocated"] == 2
        assert summary["window_motes"] == [3]
        assert summary["epochs"] == 10
        assert summary["agreement_all"]["percent"] == pytest.approx(65.0)
        assert summary["agreement_excluded"]["percent"] == pytest.approx(100.0)
        assert summary["improvement_pp"] == pytest.approx(35.0)
        assert summary["clusters"][0]["motes"] == [1, 2, 3]
        assert summary["curves"]["missing"][0]["agreement"] == pytest.approx(65.0)

    def test_exclude_windows_shrinks_snr_cluster(self, pipeline, intel_mini_dir):
        """Test --exclude-windows drops the window mote from SNR."""
        config = IntelConfig(clusters=1, trials=200, exclude_windows=True)
        state = pipeline.execute(config, intel_mini_dir)
        (row,) = state.snr
        assert row.sensors == 2
        assert state.excluded_motes == {3}

    def test_snr_rows(self, pipeline, mini_config, intel_mini_dir):
        """Test the single cluster row with all motes."""
        (row,) = pipeline.execute(mini_config, intel_mini_dir).snr
        assert row.sensors == 3
        assert row.hl_db - row.sql_db == pytest.approx(10 * math.log10(3))

    def test_missing_files(self, pipeline, mini_config, tmp_path):
        """Test a missing dataset raises before any node runs."""
        with pytest.raises(DataNotFound) as exc_info:
            pipeline.execute(mini_config, tmp_path)
        assert str(tmp_path / INTEL_DATA_FILE) in exc_info.value.missing

    def test_empty_data_stops_at_load(self, pipeline, mini_config, intel_mini_dir, tmp_path):
        """Test an empty data file sets the error and stops."""
        (tmp_path / INTEL_DATA_FILE).write_text("")
        (tmp_path / INTEL_LOCATIONS_FILE).write_text(
            (intel_mini_dir / INTEL_LOCATIONS_FILE).read_text()
        )
        state = pipeline.execute(mini_config, tmp_path)
        assert state.error is not None
        assert "No readings" in state.error
        assert state.nodes_executed == []

    def test_too_many_clusters_reports_error(self, pipeline, intel_mini_dir):
        """Test a k above the mote count fails inside the cluster node."""
        state = pipeline.execute(IntelConfig(clusters=6), intel_mini_dir)
        assert state.error is not None
        assert state.nodes_executed == ["load_inputs", "clean_readings"]


def test_compiled_graph_holds_every_node(pipeline):
    """Test the compiled graph wires each node between START and END."""
    drawn = pipeline.compiled_graph.get_graph()
    assert set(EXPECTED_NODES) <= set(drawn.nodes)
    assert {"__start__", "__end__"} <= set(drawn.nodes)


def test_shared_pipeline_is_reused():
    """Test the CLI-facing accessor compiles the graph once."""
    assert get_intel_pipeline() is get_intel_pipeline()


def test_pipeline_structure(pipeline):
    """Test the linear structure description."""
    structure = pipeline.get_pipeline_structure()
    assert structure["nodes"] == EXPECTED_NODES
    assert structure["edges"][0] == {"from": "START", "to": "load_inputs"}
    assert structure["edges"][-1] == {"from": "missing_data_curves", "to": "END"}
