"""
Intel Berkeley Lab file formats.

Mote data rows are whitespace separated:
``date time epoch mote_id temperature humidity light voltage``; trailing
measurement columns may be absent. Location rows are ``mote_id x y``.
"""

import logging
import math
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from app.core.exceptions import DataNotFound
from app.models import MoteLocation, MoteRecord

logger = logging.getLogger(__name__)

MEASUREMENTS = ("temperature", "humidity", "light", "voltage")
COLUMNS = ("date", "time", "epoch", "mote_id", *MEASUREMENTS)
MIN_FIELDS = 4
MAX_MOTE_ID = 58
TEMPERATURE_RANGE = (0.0, 50.0)

_DATE = re.compile(r"\d{4}-\d{2}-\d{2}$")
_TIME = re.compile(r"\d{2}:\d{2}:\d{2}(\.\d+)?$")


@dataclass
class ParsedMoteData:
    """Parsed mote readings in file order plus the count of skipped lines."""

    frame: pd.DataFrame
    skipped: int = 0

    def to_records(self) -> list[MoteRecord]:
        records = []
        for row in self.frame.itertuples(index=False):
            values = {
                name: None if math.isnan(v) else float(v)
                for name, v in zip(
                    MEASUREMENTS, (row.temperature, row.humidity, row.light, row.voltage),
                    strict=True,
                )
            }
            records.append(
                MoteRecord(
                    date=row.date,
                    time=row.time,
                    epoch=int(row.epoch),
                    mote_id=int(row.mote_id),
                    **values,
                )
            )
        return records

    def to_lines(self) -> Iterator[str]:
        """Serialize back to the source format; trailing missing columns are dropped."""
        for row in self.frame.itertuples(index=False):
            fields = [row.date, row.time, str(int(row.epoch)), str(int(row.mote_id))]
            measured = [row.temperature, row.humidity, row.light, row.voltage]
            while measured and math.isnan(measured[-1]):
                measured.pop()
            fields.extend("nan" if math.isnan(v) else repr(float(v)) for v in measured)
            yield " ".join(fields)


def _parse_line(line: str) -> tuple[str, str, int, int, list[float]] | None:
    fields = line.split()
    if not MIN_FIELDS <= len(fields) <= len(COLUMNS):
        return None
    date, time = fields[0], fields[1]
    if not (_DATE.match(date) and _TIME.match(time)):
        return None
    try:
        epoch = int(fields[2])
        mote_id = int(fields[3])
        values = [float(v) for v in fields[4:]]
    except ValueError:
        return None
    if epoch < 0 or not 1 <= mote_id <= MAX_MOTE_ID:
        return None
    values.extend([math.nan] * (len(MEASUREMENTS) - len(values)))
    return date, time, epoch, mote_id, values


def parse_mote_data(lines: Iterable[str]) -> ParsedMoteData:
    """
    Parse mote data lines, preserving row order.

    Malformed lines (wrong field count, bad date/time, non-numeric values,
    negative epoch, mote id outside 1..58) are skipped and counted; blank
    lines count as skipped too.
    """
    dates: list[str] = []
    times: list[str] = []
    epochs: list[int] = []
    motes: list[int] = []
    measured: list[list[float]] = []
    skipped = 0

    for line in lines:
        parsed = _parse_line(line)
        if parsed is None:
            skipped += 1
            logger.debug(f"Skipping malformed mote line: {line.rstrip()!r}")
            continue
        date, time, epoch, mote_id, values = parsed
        dates.append(date)
        times.append(time)
        epochs.append(epoch)
        motes.append(mote_id)
        measured.append(values)

    if skipped:
        logger.warning(f"Skipped {skipped} malformed mote data lines")

    values_array = (
        np.asarray(measured, dtype=np.float64)
        if measured
        else np.empty((0, len(MEASUREMENTS)))
    )
    frame = pd.DataFrame(
        {
            "date": pd.Series(dates, dtype=object),
            "time": pd.Series(times, dtype=object),
            "epoch": pd.Series(epochs, dtype=np.int64),
            "mote_id": pd.Series(motes, dtype=np.int64),
            **{name: values_array[:, i] for i, name in enumerate(MEASUREMENTS)},
        }
    )
    logger.info(f"Parsed {len(frame)} mote readings")
    return ParsedMoteData(frame=frame, skipped=skipped)


def parse_mote_locations(lines: Iterable[str]) -> list[MoteLocation]:
    locations: list[MoteLocation] = []
    skipped = 0
    for line in lines:
        fields = line.split()
        if not fields:
            continue
        try:
            if len(fields) != 3:
                raise ValueError(f"expected 3 fields, got {len(fields)}")
            locations.append(
                MoteLocation(
                    mote_id=int(fields[0]), x=float(fields[1]), y=float(fields[2])
                )
            )
        except ValueError:
            skipped += 1
            logger.debug(f"Skipping malformed location line: {line.rstrip()!r}")
    if skipped:
        logger.warning(f"Skipped {skipped} malformed location lines")
    return locations


@dataclass
class CleanedMoteData:
    frame: pd.DataFrame
    dropped_temperature: int
    dropped_unlocated: int


def clean_mote_data(
    frame: pd.DataFrame, locations: Iterable[MoteLocation]
) -> CleanedMoteData:
    """Drop missing or out-of-range temperatures, then readings from unlocated motes."""
    low, high = TEMPERATURE_RANGE
    in_range = frame["temperature"].between(low, high)
    dropped_temperature = int((~in_range).sum())
    kept = frame[in_range]

    located = {loc.mote_id for loc in locations}
    has_location = kept["mote_id"].isin(located)
    dropped_unlocated = int((~has_location).sum())
    kept = kept[has_location].reset_index(drop=True)

    if dropped_temperature:
        logger.warning(
            f"Dropped {dropped_temperature} readings with temperature outside "
            f"[{low}, {high}] or missing"
        )
    if dropped_unlocated:
        logger.warning(f"Dropped {dropped_unlocated} readings from unlocated motes")
    return CleanedMoteData(
        frame=kept,
        dropped_temperature=dropped_temperature,
        dropped_unlocated=dropped_unlocated,
    )


def require_intel_files(data_path: Path, locations_path: Path) -> None:
    missing = [str(p) for p in (data_path, locations_path) if not p.is_file()]
    if missing:
        raise DataNotFound(missing)


def read_lines(path: Path) -> Iterator[str]:
    with path.open(encoding="utf-8", errors="replace") as stream:
        yield from stream
