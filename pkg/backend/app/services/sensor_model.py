"""
Quantum sensor physics.
Phase encoding, projection noise, decoherence, Byzantine corruption and the
confidence intervals that hand quantum readings over to classical fusion.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from app.core.exceptions import DivergentVariance, InvalidInput
from app.models import (
    BoolArray,
    ByzantineKind,
    ByzantineModel,
    FloatArray,
    Interval,
    SensorMode,
    SensorParams,
    SensorReading,
)

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.05


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidInput(f"{name} must be finite, got {value}")


@lru_cache(maxsize=64)
def z_quantile(alpha: float = DEFAULT_ALPHA) -> float:
    """Standard-normal (1 - alpha/2) quantile."""
    if not 0.0 < alpha < 1.0:
        raise InvalidInput(f"alpha must lie in (0, 1), got {alpha}")
    return float(norm.ppf(1.0 - alpha / 2.0))


def phase_from_parameter(parameter: float, eta: float) -> float:
    _require_finite(parameter=parameter, eta=eta)
    if eta <= 0:
        raise InvalidInput(f"sensitivity must be positive, got {eta}")
    return eta * parameter


def effective_visibility(v0: float, t: float, t2: float) -> float:
    _require_finite(v0=v0, t=t, t2=t2)
    if t2 <= 0:
        raise InvalidInput(f"T2 must be positive, got {t2}")
    if not 0.0 <= v0 <= 1.0:
        raise InvalidInput(f"v0 must lie in [0, 1], got {v0}")
    if t < 0:
        raise InvalidInput(f"measurement time must be >= 0, got {t}")
    return v0 * math.exp(-t / t2)


def phase_variance(atoms: int, visibility: float) -> float:
    """Decohered projection-noise variance in rad^2; 1/(4N) at full visibility."""
    if atoms < 1:
        raise InvalidInput(f"atoms must be >= 1, got {atoms}")
    if visibility == 0:
        raise DivergentVariance("a fully decohered sensor carries no phase information")
    if not 0.0 < visibility <= 1.0:
        raise InvalidInput(f"visibility must lie in (0, 1], got {visibility}")
    return 1.0 / (4.0 * atoms * visibility**2)


def parameter_sigma(atoms: int, eta: float, visibility: float) -> float:
    """Standard deviation of a single-sensor estimate in parameter units."""
    if eta <= 0:
        raise InvalidInput(f"sensitivity must be positive, got {eta}")
    return math.sqrt(phase_variance(atoms, visibility)) / eta


def qpn_half_width(
    atoms: int, eta: float, visibility: float, alpha: float = DEFAULT_ALPHA
) -> float:
    return z_quantile(alpha) * parameter_sigma(atoms, eta, visibility)


def confidence_interval(
    estimate: float,
    atoms: int,
    eta: float,
    visibility: float,
    alpha: float = DEFAULT_ALPHA,
) -> Interval:
    _require_finite(estimate=estimate)
    return Interval.around(estimate, qpn_half_width(atoms, eta, visibility, alpha))


def _byzantine_reading(
    params: SensorParams,
    t_true: float,
    byz: ByzantineModel,
    gaussian: float,
    uniform: float,
    alpha: float,
) -> tuple[float, float]:
    nominal = qpn_half_width(params.atoms, params.sensitivity, 1.0, alpha)
    center = t_true + byz.offset
    if byz.kind is ByzantineKind.CONSTANT_OFFSET:
        return center, nominal + byz.spread
    if byz.kind is ByzantineKind.UNIFORM_ARBITRARY:
        return center + byz.spread * (2.0 * uniform - 1.0), nominal
    sigma = parameter_sigma(params.atoms, params.sensitivity, 1.0)
    return center + sigma * gaussian, nominal + byz.spread


def sample_measurement(
    params: SensorParams,
    t_true: float,
    byz: ByzantineModel,
    rng: np.random.Generator,
    *,
    sensor_id: int = 0,
    t: float = 0.0,
    alpha: float = DEFAULT_ALPHA,
) -> SensorReading:
    """
    Draw one sensor reading.

    Honest sensors report a Gaussian estimate with the decohered variance at
    time t; Byzantine sensors report per the fault model with visibility 0.
    """
    _require_finite(t_true=t_true)
    gaussian = float(rng.standard_normal())
    uniform = float(rng.random())
    if params.mode is SensorMode.BYZANTINE:
        estimate, half_width = _byzantine_reading(
            params, t_true, byz, gaussian, uniform, alpha
        )
        return SensorReading(
            sensor_id=sensor_id,
            estimate=estimate,
            interval=Interval.around(estimate, half_width),
            visibility=0.0,
            timestamp=t,
        )

    visibility = effective_visibility(params.visibility0, t, params.t2)
    sigma = parameter_sigma(params.atoms, params.sensitivity, visibility)
    estimate = t_true + sigma * gaussian
    return SensorReading(
        sensor_id=sensor_id,
        estimate=estimate,
        interval=confidence_interval(
            estimate, params.atoms, params.sensitivity, visibility, alpha
        ),
        visibility=visibility,
        timestamp=t,
    )


@dataclass(frozen=True)
class NetworkSample:
    """One trial's readings for a whole sensor network, column-wise."""

    estimates: FloatArray
    lower: FloatArray
    upper: FloatArray
    visibility: FloatArray
    faulty: BoolArray
    timestamp: float = 0.0

    @property
    def sensors(self) -> int:
        return int(self.estimates.shape[0])

    def readings(self) -> list[SensorReading]:
        return [
            SensorReading(
                sensor_id=i,
                estimate=float(self.estimates[i]),
                interval=Interval(float(self.lower[i]), float(self.upper[i])),
                visibility=float(self.visibility[i]),
                timestamp=self.timestamp,
            )
            for i in range(self.sensors)
        ]


def sample_readings(
    params: SensorParams,
    t_true: float,
    byz: ByzantineModel,
    faulty_mask: BoolArray,
    rng: np.random.Generator,
    alpha: float = DEFAULT_ALPHA,
    *,
    t: float = 0.0,
    visibilities: FloatArray | None = None,
) -> NetworkSample:
    """
    Vectorized sample_measurement over a network.

    Every sensor consumes one Gaussian and one uniform draw whatever its
    status, so honest readings do not depend on which sensors are faulty.
    ``visibilities`` overrides the per-sensor honest visibility.
    """
    _require_finite(t_true=t_true)
    faulty = np.asarray(faulty_mask, dtype=bool)
    sensors = faulty.shape[0]
    gaussian = rng.standard_normal(sensors)
    uniform = rng.random(sensors)

    if visibilities is None:
        v = effective_visibility(params.visibility0, t, params.t2)
        visibility = np.full(sensors, v)
    else:
        visibility = np.asarray(visibilities, dtype=np.float64).copy()
    honest = ~faulty
    if np.any(visibility[honest] <= 0):
        raise DivergentVariance("honest sensor with zero visibility")

    z = z_quantile(alpha)
    # faulty slots are overwritten below
    safe_visibility = np.where(honest, visibility, 1.0)
    sigma = 1.0 / (2.0 * math.sqrt(params.atoms) * params.sensitivity * safe_visibility)
    estimates = t_true + sigma * gaussian
    half_width = z * sigma

    if faulty.any():
        nominal = qpn_half_width(params.atoms, params.sensitivity, 1.0, alpha)
        center = t_true + byz.offset
        if byz.kind is ByzantineKind.CONSTANT_OFFSET:
            byz_est = np.full(sensors, center)
            byz_hw = np.full(sensors, nominal + byz.spread)
        elif byz.kind is ByzantineKind.UNIFORM_ARBITRARY:
            byz_est = center + byz.spread * (2.0 * uniform - 1.0)
            byz_hw = np.full(sensors, nominal)
        else:
            sigma1 = parameter_sigma(params.atoms, params.sensitivity, 1.0)
            byz_est = center + sigma1 * gaussian
            byz_hw = np.full(sensors, nominal + byz.spread)
        estimates = np.where(faulty, byz_est, estimates)
        half_width = np.where(faulty, byz_hw, half_width)
        visibility = np.where(faulty, 0.0, visibility)

    return NetworkSample(
        estimates=estimates,
        lower=estimates - half_width,
        upper=estimates + half_width,
        visibility=visibility,
        faulty=faulty,
        timestamp=t,
    )
