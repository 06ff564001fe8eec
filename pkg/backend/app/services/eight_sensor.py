"""
Embedded eight-sensor crisp dataset and its report.
"""

import logging
import math
from typing import Any

from app.core.exceptions import InvalidInput
from app.models import CrispSensor, EightSensorConfig
from app.services.bounds import (
    hl_variance,
    metrological_gain_db,
    qpn_equivalent_atoms,
    sql_variance,
)
from app.services.fusion import (
    brooks_iyengar_fuse,
    fault_class,
    max_overlap_regions,
    simple_average,
)

logger = logging.getLogger(__name__)

_CENTERS = (4.7, 1.6, 3.0, 1.8)
_WIDE = (2.0, 1.6, 1.5, 1.0)
_NARROW = (1.0, 0.8, 0.75, 0.5)

RANGE_REDUCTIONS = (1.0, 2.0, 4.0)


def eight_sensor_dataset() -> list[CrispSensor]:
    """S1-S4 with the wide ranges; S5-S8 repeat the centers at half the range."""
    wide = [
        CrispSensor(id=f"S{i + 1}", center=c, half_width=w)
        for i, (c, w) in enumerate(zip(_CENTERS, _WIDE, strict=True))
    ]
    narrow = [
        CrispSensor(id=f"S{i + 5}", center=c, half_width=w)
        for i, (c, w) in enumerate(zip(_CENTERS, _NARROW, strict=True))
    ]
    return wide + narrow


def range_to_atom_factor(ratio: float) -> float:
    """A k-fold narrower range needs k^2 times the atoms (range ~ 1/sqrt(N))."""
    if not ratio > 0:
        raise InvalidInput(f"range reduction must be positive, got {ratio}")
    return ratio**2


def eight_sensor_report(config: EightSensorConfig | None = None) -> dict[str, Any]:
    config = config or EightSensorConfig()
    sensors = eight_sensor_dataset()
    intervals = [s.interval for s in sensors]
    fused = brooks_iyengar_fuse(intervals)
    regions = max_overlap_regions(intervals)
    m = len(sensors)
    sql = sql_variance(config.atoms, config.sensitivity, m)
    hl = hl_variance(config.atoms, config.sensitivity, m)
    logger.info(
        f"Eight-sensor fusion: estimate={fused.estimate:.6g}, "
        f"max count={regions[0].count}, excluded={sorted(fused.excluded)}"
    )

    return {
        "sensors": [
            {
                "id": s.id,
                "center": s.center,
                "half_width": s.half_width,
                "lower": iv.lower,
                "upper": iv.upper,
                "score": score,
                "class": fault_class(score).value,
                "excluded": i in fused.excluded,
                "equivalent_atoms": qpn_equivalent_atoms(
                    s.half_width, config.sensitivity, config.alpha
                ),
            }
            for i, (s, iv, score) in enumerate(
                zip(sensors, intervals, fused.scores, strict=True)
            )
        ],
        "regions": [
            {"lower": r.interval.lower, "upper": r.interval.upper, "count": r.count}
            for r in regions
        ],
        "max_count": regions[0].count,
        "bi_estimate": fused.estimate,
        "naive_average": simple_average([s.center for s in sensors]),
        "atoms": config.atoms,
        "sensitivity": config.sensitivity,
        "sql_rmse": math.sqrt(sql),
        "hl_rmse": math.sqrt(hl),
        "gain_db": metrological_gain_db(m),
        "range_to_atoms": [
            {"range_reduction": k, "atom_factor": range_to_atom_factor(k)}
            for k in RANGE_REDUCTIONS
        ],
    }
