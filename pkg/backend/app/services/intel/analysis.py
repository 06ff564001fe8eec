"""
Per-cluster analyses over cleaned mote readings: window-mote detection,
epoch selection, overlap agreement, SNR against the quantum limits and the
missing-data vs decoherence curves.
"""

import logging
import math
from collections.abc import Collection, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from app.core.exceptions import InvalidInput
from app.models import ClusterAssignment, FloatArray, MoteLocation
from app.services.bounds import hl_variance, sql_variance
from app.services.fusion import overlap_sweep
from app.services.sensor_model import parameter_sigma, z_quantile

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.5
DEFAULT_WALL_MARGIN = 2.0
DEFAULT_Z_THRESH = 1.0
MISSING_STREAM = 0x1D47
DECOHERENCE_STREAM = 0xDEC0


def _amplitude_db(signal: float, noise: float) -> float:
    if not (noise > 0 and signal > 0):
        return math.nan
    return 20.0 * math.log10(signal / noise)


def detect_window_motes(
    frame: pd.DataFrame,
    locations: Sequence[MoteLocation],
    z_thresh: float = DEFAULT_Z_THRESH,
    wall_margin: float = DEFAULT_WALL_MARGIN,
) -> set[int]:
    """
    Motes near the walls that read consistently warm.

    A mote qualifies when its distance to the bounding box of all locations
    is at most ``wall_margin`` and the z-score of its mean temperature
    against the global mean exceeds ``z_thresh``. The z-score spread is the
    population std of the per-mote means; zero spread gives z = 0.
    """
    if frame.empty:
        raise InvalidInput("window detection needs at least one reading")
    if not locations:
        raise InvalidInput("window detection needs mote locations")

    global_mean = float(frame["temperature"].mean())
    mote_means = frame.groupby("mote_id")["temperature"].mean()
    spread = float(mote_means.std(ddof=0))
    if spread > 0:
        z = (mote_means - global_mean) / spread
    else:
        z = pd.Series(0.0, index=mote_means.index)

    xs = np.array([loc.x for loc in locations])
    ys = np.array([loc.y for loc in locations])
    x_min, x_max, y_min, y_max = xs.min(), xs.max(), ys.min(), ys.max()

    flagged = set()
    for loc in locations:
        if loc.mote_id not in z.index:
            continue
        wall_distance = min(loc.x - x_min, x_max - loc.x, loc.y - y_min, y_max - loc.y)
        score = float(z[loc.mote_id])
        if wall_distance <= wall_margin and score > z_thresh:
            flagged.add(loc.mote_id)
    logger.info(
        f"Window motes {sorted(flagged)} (global mean {global_mean:.4g}, "
        f"z > {z_thresh}, margin {wall_margin} m)"
    )
    return flagged


def select_epochs(frame: pd.DataFrame, count: int) -> list[int]:
    """The ``count`` epochs with the most distinct motes; ties go to the lower epoch."""
    if count < 1:
        raise InvalidInput(f"epoch count must be >= 1, got {count}")
    coverage = frame.groupby("epoch")["mote_id"].nunique().reset_index(name="coverage")
    best = coverage.sort_values(
        ["coverage", "epoch"], ascending=[False, True], kind="mergesort"
    ).head(count)
    return sorted(int(e) for e in best["epoch"])


def _temperature_table(frame: pd.DataFrame, epochs: Sequence[int] | None) -> pd.DataFrame:
    """Epoch x mote table of mean temperatures, NaN where a mote is absent."""
    rows = frame if epochs is None else frame[frame["epoch"].isin(epochs)]
    table = rows.groupby(["epoch", "mote_id"])["temperature"].mean().unstack("mote_id")
    if epochs is not None:
        table = table.reindex(sorted(epochs))
    return table


def _cluster_members(
    assignment: ClusterAssignment, cluster: int, exclude: Collection[int]
) -> list[int]:
    return [m for m in assignment.members(cluster) if m not in exclude]


@dataclass
class _Cell:
    cluster: int
    epoch: int
    members: int
    temperatures: FloatArray


def _cells(
    frame: pd.DataFrame,
    assignment: ClusterAssignment,
    epochs: Sequence[int],
    exclude: Collection[int],
) -> list[_Cell]:
    table = _temperature_table(frame, epochs)
    cells = []
    for cluster in range(assignment.k):
        members = _cluster_members(assignment, cluster, exclude)
        if not members:
            continue
        block = table.reindex(columns=members).to_numpy(dtype=np.float64)
        for epoch, row in zip(table.index, block, strict=True):
            cells.append(
                _Cell(
                    cluster=cluster,
                    epoch=int(epoch),
                    members=len(members),
                    temperatures=row[~np.isnan(row)],
                )
            )
    return cells


def _max_count(temperatures: FloatArray, tolerance: float) -> int:
    if temperatures.size == 0:
        return 0
    count, _ = overlap_sweep(temperatures - tolerance, temperatures + tolerance)
    return count


@dataclass
class AgreementCell:
    cluster: int
    epoch: int
    members: int
    present: int
    max_count: int

    @property
    def agreement(self) -> float | None:
        return self.max_count / self.present if self.present else None


@dataclass
class AgreementSummary:
    percent: float
    absent_fraction: float
    cells: list[AgreementCell] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "percent": self.percent,
            "absent_fraction": self.absent_fraction,
            "cells": len(self.cells),
        }


def cluster_agreement(
    frame: pd.DataFrame,
    assignment: ClusterAssignment,
    epochs: Sequence[int],
    exclude: Collection[int] = frozenset(),
    tolerance: float = DEFAULT_TOLERANCE,
) -> AgreementSummary:
    """
    Mean overlap agreement over (cluster, epoch) cells.

    Each present mote contributes the interval reading ± tolerance; a cell's
    agreement is the max-overlap count over its present motes. Cells with no
    present mote are counted as absent only.
    """
    if tolerance <= 0:
        raise InvalidInput(f"tolerance must be positive, got {tolerance}")
    cells = [
        AgreementCell(
            cluster=cell.cluster,
            epoch=cell.epoch,
            members=cell.members,
            present=int(cell.temperatures.size),
            max_count=_max_count(cell.temperatures, tolerance),
        )
        for cell in _cells(frame, assignment, epochs, exclude)
    ]
    ratios = [c.agreement for c in cells if c.agreement is not None]
    expected = sum(c.members for c in cells)
    present = sum(c.present for c in cells)
    percent = 100.0 * float(np.mean(ratios)) if ratios else math.nan
    absent = 1.0 - present / expected if expected else math.nan
    logger.info(
        f"Agreement {percent:.4g}% over {len(ratios)} cells, "
        f"{100.0 * absent:.3g}% absent (excluded {sorted(exclude)})"
    )
    return AgreementSummary(percent=percent, absent_fraction=absent, cells=cells)


@dataclass
class ClusterSnr:
    cluster: int
    sensors: int
    signal: float
    noise: float
    classical_db: float
    sql_db: float
    hl_db: float
    gain_db: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def cluster_snr(
    frame: pd.DataFrame,
    assignment: ClusterAssignment,
    atoms: int,
    epochs: Sequence[int] | None = None,
    eta: float = 0.1,
    exclude: Collection[int] = frozenset(),
) -> list[ClusterSnr]:
    """
    Classical vs quantum-limited SNR per cluster.

    Signal is the cluster's mean temperature; the classical noise floor is
    the per-epoch std across present motes, averaged over epochs with at
    least two motes. The SQL and HL floors are the limits at M = cluster
    size, N = ``atoms``.
    """
    if atoms < 1:
        raise InvalidInput(f"atoms must be >= 1, got {atoms}")
    table = _temperature_table(frame, epochs)
    rows = []
    for cluster in range(assignment.k):
        members = _cluster_members(assignment, cluster, exclude)
        if not members:
            logger.warning(f"Cluster {cluster} has no members left; skipping SNR")
            continue
        block = table.reindex(columns=members).to_numpy(dtype=np.float64)
        readings = block[~np.isnan(block)]
        signal = float(readings.mean()) if readings.size else math.nan
        per_epoch = [np.std(r[~np.isnan(r)]) for r in block if np.count_nonzero(~np.isnan(r)) >= 2]
        noise = float(np.mean(per_epoch)) if per_epoch else math.nan

        m = len(members)
        classical = _amplitude_db(signal, noise)
        sql = _amplitude_db(signal, math.sqrt(sql_variance(atoms, eta, m)))
        hl = _amplitude_db(signal, math.sqrt(hl_variance(atoms, eta, m)))
        rows.append(
            ClusterSnr(
                cluster=cluster,
                sensors=m,
                signal=signal,
                noise=noise,
                classical_db=classical,
                sql_db=sql,
                hl_db=hl,
                gain_db=hl - classical,
            )
        )
        logger.debug(f"Cluster {cluster}: M={m}, classical={classical:.4g} dB, HL={hl:.4g} dB")
    return rows


@dataclass
class MissingDecoherenceCurves:
    missing: list[tuple[float, float]]
    decoherence: list[tuple[float, float]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "missing": [{"fraction": f, "agreement": a} for f, a in self.missing],
            "decoherence": [{"visibility": v, "agreement": a} for v, a in self.decoherence],
        }


def missing_vs_decoherence_curves(
    frame: pd.DataFrame,
    assignment: ClusterAssignment,
    epochs: Sequence[int],
    missing_fracs: Sequence[float],
    visibilities: Sequence[float],
    *,
    seed: int,
    tolerance: float = DEFAULT_TOLERANCE,
    atoms: int = 1000,
    eta: float = 0.1,
    alpha: float = 0.05,
    trials: int = 2000,
    exclude: Collection[int] = frozenset(),
) -> MissingDecoherenceCurves:
    """
    Classical agreement under random mote loss next to entangled agreement
    under decoherence.

    Classical: each present reading draws one uniform; at fraction p the
    readings with u < p are dropped, so larger fractions drop supersets.
    Each cell is then scored like ``cluster_agreement`` over its surviving
    motes, and cells left with no survivor are skipped.

    Quantum: every cluster fuses entangled readings with error
    sigma/(V M) z; a trial agrees when the estimate stays inside the V = 1
    interval of half-width z_alpha sigma / M. All visibilities share the
    same normals.
    """
    for p in missing_fracs:
        if not 0.0 <= p < 1.0:
            raise InvalidInput(f"missing fraction must lie in [0, 1), got {p}")
    for v in visibilities:
        if not 0.0 <= v <= 1.0:
            raise InvalidInput(f"visibility must lie in [0, 1], got {v}")

    cells = [c for c in _cells(frame, assignment, epochs, exclude) if c.temperatures.size]
    missing_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(MISSING_STREAM,)))
    draws = [missing_rng.random(c.temperatures.size) for c in cells]

    missing_curve = []
    for p in missing_fracs:
        survivors = [c.temperatures[u >= p] for c, u in zip(cells, draws, strict=True)]
        ratios = [_max_count(t, tolerance) / t.size for t in survivors if t.size]
        pct = 100.0 * float(np.mean(ratios)) if ratios else math.nan
        missing_curve.append((float(p), pct))

    sizes = [
        len(_cluster_members(assignment, c, exclude))
        for c in range(assignment.k)
        if _cluster_members(assignment, c, exclude)
    ]
    q_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(DECOHERENCE_STREAM,)))
    z = q_rng.standard_normal(trials)
    sigma = parameter_sigma(atoms, eta, 1.0)
    z_alpha = z_quantile(alpha)

    decoherence_curve = []
    for v in visibilities:
        if v == 0 or not sizes:
            decoherence_curve.append((float(v), 0.0))
            continue
        fractions = [
            float(np.mean(np.abs(sigma / (v * m) * z) <= z_alpha * sigma / m)) for m in sizes
        ]
        decoherence_curve.append((float(v), 100.0 * float(np.mean(fractions))))

    logger.info(
        f"Missing-data curve {[round(a, 2) for _, a in missing_curve]}, "
        f"decoherence curve {[round(a, 2) for _, a in decoherence_curve]}"
    )
    return MissingDecoherenceCurves(missing=missing_curve, decoherence=decoherence_curve)
