"""
Fault-tolerant fusion.

The overlap function counts how many sensor intervals contain a point; its
argmax regions drive Brooks-Iyengar fusion, the similarity scores and the
predictive outlier filter. Everything here is pure: list-of-Interval entry
points wrap array kernels that the Monte Carlo harness calls directly.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.core.exceptions import InvalidInput, NoInformation, NoSurvivors
from app.models import (
    BoolArray,
    FaultClass,
    FloatArray,
    FusionResult,
    IntArray,
    Interval,
    KalmanState,
    OverlapRegion,
    SensorReading,
)

logger = logging.getLogger(__name__)

NON_FAULTY_SCORE = 0.95
AGREEMENT_SCORE = 0.5
DIFFUSE_VARIANCE = 1e12


@dataclass(frozen=True)
class OverlapSweep:
    """Result of one sorted-endpoint sweep over M intervals."""

    count: int
    regions: FloatArray  # shape (k, 2), ascending, pairwise disjoint
    agreeing: BoolArray  # intervals meeting at least one max region
    scores: FloatArray

    @property
    def sensors(self) -> int:
        return int(self.agreeing.shape[0])


def _as_bounds(intervals: Sequence[Interval]) -> tuple[FloatArray, FloatArray]:
    lower = np.fromiter((iv.lower for iv in intervals), dtype=np.float64)
    upper = np.fromiter((iv.upper for iv in intervals), dtype=np.float64)
    return lower, upper


def overlap_at(intervals: Sequence[Interval], x: float) -> int:
    return sum(1 for iv in intervals if iv.lower <= x <= iv.upper)


def overlap_sweep(lower: FloatArray, upper: FloatArray) -> tuple[int, FloatArray]:
    """
    Maximum of the overlap function and every maximal region attaining it.

    Closed intervals: at a shared coordinate starts are counted before ends,
    so touching endpoints overlap. O(M log M).
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if lower.size == 0:
        raise InvalidInput("max-overlap regions need at least one interval")
    if lower.shape != upper.shape:
        raise InvalidInput("lower and upper bounds differ in length")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise InvalidInput("interval endpoints must be finite")
    if np.any(lower > upper):
        raise InvalidInput("interval with lower > upper")

    n = lower.shape[0]
    points = np.concatenate([lower, upper])
    kinds = np.concatenate([np.zeros(n, dtype=np.int8), np.ones(n, dtype=np.int8)])
    order = np.lexsort((kinds, points))
    ordered = points[order]
    counts = np.cumsum(np.where(kinds[order] == 0, 1, -1))
    best = int(counts.max())
    # a max is always reached on a start event and left on the next end event
    starts = np.flatnonzero(counts == best)
    regions = np.column_stack([ordered[starts], ordered[starts + 1]])
    return best, regions


def _intersects_regions(
    lower: FloatArray, upper: FloatArray, regions: FloatArray
) -> BoolArray:
    hits = (lower[:, None] <= regions[None, :, 1]) & (upper[:, None] >= regions[None, :, 0])
    return np.asarray(hits.any(axis=1))


def _gap_to_regions(
    lower: FloatArray, upper: FloatArray, regions: FloatArray
) -> FloatArray:
    gaps = np.maximum.reduce(
        [
            np.zeros((lower.shape[0], regions.shape[0])),
            regions[None, :, 0] - upper[:, None],
            lower[:, None] - regions[None, :, 1],
        ]
    )
    return np.asarray(gaps.min(axis=1))


def _scores(
    lower: FloatArray,
    upper: FloatArray,
    count: int,
    regions: FloatArray,
    agreeing: BoolArray,
) -> FloatArray:
    sensors = lower.shape[0]
    half_width = 0.5 * (upper - lower)
    gap = _gap_to_regions(lower, upper, regions)
    with np.errstate(divide="ignore", invalid="ignore"):
        decay = np.where(half_width > 0, 1.0 - gap / half_width, 0.0)
    outside = 0.5 * np.clip(decay, 0.0, None)
    inside = 0.5 + 0.5 * count / sensors
    return np.where(agreeing, inside, outside)


def sweep_intervals(lower: FloatArray, upper: FloatArray) -> OverlapSweep:
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    count, regions = overlap_sweep(lower, upper)
    agreeing = _intersects_regions(lower, upper, regions)
    scores = _scores(lower, upper, count, regions, agreeing)
    return OverlapSweep(count=count, regions=regions, agreeing=agreeing, scores=scores)


def max_overlap_regions(intervals: Sequence[Interval]) -> list[OverlapRegion]:
    count, regions = overlap_sweep(*_as_bounds(intervals))
    return [
        OverlapRegion(interval=Interval(float(a), float(b)), count=count)
        for a, b in regions
    ]


def fault_class(score: float) -> FaultClass:
    if score >= NON_FAULTY_SCORE:
        return FaultClass.NON_FAULTY
    if score >= AGREEMENT_SCORE:
        return FaultClass.TAMELY_FAULTY
    return FaultClass.WIDELY_FAULTY


def similarity_scores(intervals: Sequence[Interval]) -> list[float]:
    """
    Overlap-derived similarity in [0, 1].

    Sensors meeting a max-overlap region score 0.5 + 0.5*count/M. The rest
    score 0.5*max(0, 1 - gap/half_width), gap being the distance to the
    nearest max region.
    """
    sweep = sweep_intervals(*_as_bounds(intervals))
    return [float(s) for s in sweep.scores]


def region_estimate(regions: FloatArray) -> float:
    """Length-weighted mean of region midpoints (plain mean if all are points)."""
    lengths = regions[:, 1] - regions[:, 0]
    midpoints = 0.5 * (regions[:, 0] + regions[:, 1])
    total = float(lengths.sum())
    if total > 0:
        return float(np.dot(lengths, midpoints) / total)
    return float(midpoints.mean())


def _ids_or_range(ids: IntArray | None, sensors: int) -> IntArray:
    if ids is None:
        return np.arange(sensors, dtype=np.int64)
    return np.asarray(ids, dtype=np.int64)


def _result(
    estimate: float, sweep: OverlapSweep, kept: BoolArray, ids: IntArray
) -> FusionResult:
    return FusionResult(
        estimate=estimate,
        scores=tuple(float(s) for s in sweep.scores),
        excluded=frozenset(int(i) for i in ids[~kept]),
        effective_count=int(kept.sum()),
    )


def brooks_iyengar_fuse(intervals: Sequence[Interval]) -> FusionResult:
    sweep = sweep_intervals(*_as_bounds(intervals))
    ids = _ids_or_range(None, sweep.sensors)
    return _result(region_estimate(sweep.regions), sweep, sweep.agreeing, ids)


def vector_brooks_iyengar(boxes: Sequence[Sequence[Interval]]) -> tuple[float, ...]:
    """Brooks-Iyengar applied independently per coordinate of d-dimensional boxes."""
    if not boxes:
        raise InvalidInput("vector fusion needs at least one box")
    dims = {len(box) for box in boxes}
    if len(dims) != 1:
        raise InvalidInput(f"boxes have mixed dimensions {sorted(dims)}")
    (d,) = dims
    if d < 1:
        raise InvalidInput("boxes must have dimension >= 1")
    return tuple(
        brooks_iyengar_fuse([box[j] for box in boxes]).estimate for j in range(d)
    )


def bft_fuse_arrays(
    estimates: FloatArray,
    lower: FloatArray,
    upper: FloatArray,
    faults: int,
    *,
    ids: IntArray | None = None,
    sweep: OverlapSweep | None = None,
) -> FusionResult:
    """
    Brooks-Iyengar fusion under a fault budget f.

    The sweep fixes the agreeing set. Not knowing on which side faults lie,
    the f lowest and f highest estimates are discarded; the agreeing
    survivors are averaged.
    """
    if faults < 0:
        raise InvalidInput(f"fault budget must be >= 0, got {faults}")
    estimates = np.asarray(estimates, dtype=np.float64)
    if sweep is None:
        sweep = sweep_intervals(lower, upper)
    sensors = sweep.sensors
    trimmed = np.zeros(sensors, dtype=bool)
    if sensors > 2 * faults:
        order = np.argsort(estimates, kind="stable")
        trimmed[order[faults : sensors - faults]] = True
    kept = trimmed & sweep.agreeing
    if not kept.any():
        logger.debug("bft_fuse: trim left no agreeing sensor, using the agreeing set")
        kept = sweep.agreeing
    estimate = float(estimates[kept].mean())
    return _result(estimate, sweep, kept, _ids_or_range(ids, sensors))


def bft_fuse(readings: Sequence[SensorReading], faults: int) -> FusionResult:
    estimates = np.fromiter((r.estimate for r in readings), dtype=np.float64)
    lower, upper = _as_bounds([r.interval for r in readings])
    ids = np.fromiter((r.sensor_id for r in readings), dtype=np.int64)
    return bft_fuse_arrays(estimates, lower, upper, faults, ids=ids)


def predictive_outlier_fuse_arrays(
    estimates: FloatArray,
    lower: FloatArray,
    upper: FloatArray,
    visibility: FloatArray,
    *,
    ids: IntArray | None = None,
    sweep: OverlapSweep | None = None,
) -> FusionResult:
    estimates = np.asarray(estimates, dtype=np.float64)
    visibility = np.asarray(visibility, dtype=np.float64)
    if sweep is None:
        sweep = sweep_intervals(lower, upper)
    kept = sweep.scores >= AGREEMENT_SCORE
    if not kept.any():
        raise NoSurvivors("every sensor scored below the agreement threshold")
    # inverse of the decohered variance, up to the common 1/(4N eta^2)
    weights = visibility[kept] ** 2
    total = float(weights.sum())
    if total == 0:
        raise NoInformation("all surviving sensors report zero visibility")
    estimate = float(np.dot(weights, estimates[kept]) / total)
    return _result(estimate, sweep, kept, _ids_or_range(ids, sweep.sensors))


def predictive_outlier_fuse(readings: Sequence[SensorReading]) -> FusionResult:
    if not readings:
        raise InvalidInput("outlier fusion needs at least one reading")
    estimates = np.fromiter((r.estimate for r in readings), dtype=np.float64)
    visibility = np.fromiter((r.visibility for r in readings), dtype=np.float64)
    lower, upper = _as_bounds([r.interval for r in readings])
    ids = np.fromiter((r.sensor_id for r in readings), dtype=np.int64)
    return predictive_outlier_fuse_arrays(estimates, lower, upper, visibility, ids=ids)


def simple_average(estimates: Sequence[float]) -> float:
    if len(estimates) == 0:
        raise InvalidInput("cannot average an empty list")
    return math.fsum(estimates) / len(estimates)


def bayesian_weighted_fuse(
    estimates: Sequence[float], visibilities: Sequence[float]
) -> float:
    """Reliability-weighted mean with weights V_i^2."""
    if len(estimates) != len(visibilities):
        raise InvalidInput(
            f"{len(estimates)} estimates but {len(visibilities)} visibilities"
        )
    if len(estimates) == 0:
        raise InvalidInput("cannot fuse an empty list")
    v = np.asarray(visibilities, dtype=np.float64)
    if np.any(v < 0) or np.any(v > 1):
        raise InvalidInput("visibilities must lie in [0, 1]")
    weights = v**2
    total = float(weights.sum())
    if total == 0:
        raise NoInformation("every sensor has zero reliability weight")
    return float(np.dot(weights, np.asarray(estimates, dtype=np.float64)) / total)


def kalman_step(state: KalmanState, fused_measurement: float, sensors: int) -> KalmanState:
    """Predict with process noise Q, then update with measurement variance R/M."""
    if sensors < 1:
        raise InvalidInput(f"sensor count must be >= 1, got {sensors}")
    if not math.isfinite(fused_measurement):
        raise InvalidInput("fused measurement must be finite")
    predicted = state.variance + state.q
    measurement_variance = state.r / sensors
    gain = predicted / (predicted + measurement_variance)
    return KalmanState(
        mean=state.mean + gain * (fused_measurement - state.mean),
        variance=predicted * measurement_variance / (predicted + measurement_variance),
        q=state.q,
        r=state.r,
    )


def kalman_filter(
    measurements: Sequence[float],
    sensors: int,
    q: float,
    r: float,
    prior: KalmanState | None = None,
) -> list[KalmanState]:
    """Run kalman_step over a series; the default prior is diffuse."""
    state = prior or KalmanState(mean=0.0, variance=DIFFUSE_VARIANCE, q=q, r=r)
    trajectory = []
    for z in measurements:
        state = kalman_step(state, z, sensors)
        trajectory.append(state)
    return trajectory


def steady_state_variance(q: float, r: float, sensors: int) -> float:
    """Posterior variance at the scalar Riccati fixed point."""
    if q < 0 or r <= 0 or sensors < 1:
        raise InvalidInput(f"need q >= 0, r > 0, M >= 1 (got {q}, {r}, {sensors})")
    measurement_variance = r / sensors
    predicted = 0.5 * (q + math.sqrt(q * q + 4.0 * q * measurement_variance))
    if predicted == 0:
        return 0.0
    return predicted * measurement_variance / (predicted + measurement_variance)
