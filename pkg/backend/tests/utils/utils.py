import numpy as np

from app.models import Interval
from app.services.fusion import overlap_at


def random_intervals(rng: np.random.Generator, sensors: int) -> list[Interval]:
    """Integer-grid intervals so that shared endpoints are common."""
    lower = rng.integers(0, 20, size=sensors)
    length = rng.integers(0, 8, size=sensors)
    return [Interval(float(a), float(a + w)) for a, w in zip(lower, length, strict=True)]


def overlap_sample_points(intervals: list[Interval]) -> list[float]:
    """Every endpoint plus every midpoint between consecutive endpoints."""
    ends = sorted({iv.lower for iv in intervals} | {iv.upper for iv in intervals})
    mids = [0.5 * (a + b) for a, b in zip(ends, ends[1:], strict=False)]
    return ends + mids


def brute_force_max_overlap(intervals: list[Interval]) -> int:
    return max(overlap_at(intervals, x) for x in overlap_sample_points(intervals))
