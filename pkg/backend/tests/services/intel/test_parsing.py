"""Tests for the Intel Lab file parsers."""

import datetime as dt
import math

import pandas as pd
import pytest

from app.core.config import INTEL_DATA_FILE, INTEL_LOCATIONS_FILE
from app.core.exceptions import DataNotFound
from app.models import MoteLocation
from app.services.intel.parsing import (
    clean_mote_data,
    parse_mote_data,
    parse_mote_locations,
    read_lines,
    require_intel_files,
)

EXAMPLE = "2004-03-31 03:38:15.757551 2 1 122.153 -3.91901 11.04 2.03397"


class TestParseMoteData:
    """Test mote data parsing."""

    def test_full_line(self):
        """Test every column of a complete row."""
        parsed = parse_mote_data([EXAMPLE])
        row = parsed.frame.iloc[0]
        assert parsed.skipped == 0
        assert (row["date"], row["time"]) == ("2004-03-31", "03:38:15.757551")
        assert (row["epoch"], row["mote_id"]) == (2, 1)
        assert row["temperature"] == pytest.approx(122.153)
        assert row["voltage"] == pytest.approx(2.03397)

    def test_trailing_columns_missing(self):
        """Test absent measurements become NaN."""
        parsed = parse_mote_data(["2004-03-31 03:38:15.757551 2 1 19.9 37.1 45.08"])
        assert math.isnan(parsed.frame.iloc[0]["voltage"])
        parsed = parse_mote_data(["2004-03-31 03:38:15 2 1"])
        assert parsed.frame.iloc[0][["temperature", "humidity", "light", "voltage"]].isna().all()

    @pytest.mark.parametrize(
        "line",
        [
            "",
            "garbage",
            "2004-03-31 03:38:15 two 1 20.0",
            "2004-03-31 03:38:15 2 59 20.0",
            "2004-03-31 03:38:15 2 0 20.0",
            "2004-03-31 03:38:15 -1 1 20.0",
            "03/31/2004 03:38:15 2 1 20.0",
            "2004-03-31 03:38:15 2 1 20.0 1.0 2.0 3.0 4.0",
            "2004-03-31 03:38:15 2 1 hot",
        ],
    )
    def test_malformed_lines_skipped(self, line):
        """Test malformed and blank lines are counted, not parsed."""
        parsed = parse_mote_data([EXAMPLE, line])
        assert len(parsed.frame) == 1
        assert parsed.skipped == 1

    def test_preserves_order(self):
        """Test rows keep file order."""
        lines = [
            "2004-03-01 00:00:01 9 3 20.0",
            "2004-03-01 00:00:00 1 1 21.0",
        ]
        assert parse_mote_data(lines).frame["epoch"].tolist() == [9, 1]

    def test_empty_input(self):
        """Test an empty file gives an empty frame with the full schema."""
        parsed = parse_mote_data([])
        assert parsed.frame.empty
        assert list(parsed.frame.columns) == [
            "date", "time", "epoch", "mote_id",
            "temperature", "humidity", "light", "voltage",
        ]

    def test_to_lines_reparses(self):
        """Test serialized rows parse back to the same frame."""
        lines = [
            EXAMPLE,
            "2004-03-31 03:38:15.757551 2 4 19.9 37.1 45.08",
            "2004-03-31 03:38:16 3 5",
        ]
        parsed = parse_mote_data(lines)
        again = parse_mote_data(list(parsed.to_lines()))
        pd.testing.assert_frame_equal(parsed.frame, again.frame)

    def test_to_records(self):
        """Test records carry typed dates and None for missing values."""
        parsed = parse_mote_data(["2004-03-31 03:38:15.757551 2 1 19.9 37.1 45.08"])
        (record,) = parsed.to_records()
        assert record.date == dt.date(2004, 3, 31)
        assert record.time == dt.time(3, 38, 15, 757551)
        assert record.temperature == pytest.approx(19.9)
        assert record.voltage is None

    def test_mini_fixture(self, intel_mini_dir):
        """Test the mini fixture's counts."""
        parsed = parse_mote_data(read_lines(intel_mini_dir / INTEL_DATA_FILE))
        assert parsed.skipped == 2
        assert len(parsed.frame) == 32
        assert sorted(parsed.frame["mote_id"].unique()) == [1, 2, 3, 4]


class TestParseLocations:
    """Test mote location parsing."""

    def test_parses_and_skips(self):
        """Test valid rows parse; blank lines are ignored; bad rows skipped."""
        lines = ["1 21.5 23", "", "2 24.5", "3 x 1.0", "4 1.0 2.0 3.0", "5 0.5 17"]
        locations = parse_mote_locations(lines)
        assert locations == [
            MoteLocation(mote_id=1, x=21.5, y=23.0),
            MoteLocation(mote_id=5, x=0.5, y=17.0),
        ]

    def test_non_finite_coordinates_skipped(self):
        """Test NaN coordinates are treated as malformed."""
        assert parse_mote_locations(["1 nan 2.0"]) == []


class TestCleaning:
    """Test reading cleanup."""

    def test_mini_fixture(self, intel_mini_dir):
        """Test the out-of-range reading and the unlocated mote are dropped."""
        parsed = parse_mote_data(read_lines(intel_mini_dir / INTEL_DATA_FILE))
        locations = parse_mote_locations(read_lines(intel_mini_dir / INTEL_LOCATIONS_FILE))
        cleaned = clean_mote_data(parsed.frame, locations)
        assert cleaned.dropped_temperature == 1
        assert cleaned.dropped_unlocated == 2
        assert len(cleaned.frame) == 29
        assert cleaned.frame["temperature"].between(0.0, 50.0).all()
        assert 4 not in set(cleaned.frame["mote_id"])

    def test_missing_temperature_dropped(self):
        """Test a row without temperature is removed."""
        parsed = parse_mote_data(["2004-03-31 03:38:15 2 1", "2004-03-31 03:38:16 2 2 20.0"])
        cleaned = clean_mote_data(
            parsed.frame,
            [MoteLocation(mote_id=1, x=0.0, y=0.0), MoteLocation(mote_id=2, x=1.0, y=0.0)],
        )
        assert cleaned.dropped_temperature == 1
        assert cleaned.frame["mote_id"].tolist() == [2]


def test_require_intel_files_lists_missing(tmp_path):
    """Test both missing paths are reported."""
    with pytest.raises(DataNotFound) as exc_info:
        require_intel_files(tmp_path / INTEL_DATA_FILE, tmp_path / INTEL_LOCATIONS_FILE)
    assert len(exc_info.value.missing) == 2
    assert INTEL_DATA_FILE in str(exc_info.value)
