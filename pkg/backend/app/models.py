import datetime as dt
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Self

from app.core.exceptions import InvalidInput

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
BoolArray = npt.NDArray[np.bool_]


def get_datetime_utc() -> dt.datetime:
    return dt.datetime.now(dt.timezone.utc)


# Enumerations


class SensorMode(str, Enum):
    COHERENT = "coherent"
    DECOHERED = "decohered"
    BYZANTINE = "byzantine"


class ByzantineKind(str, Enum):
    CONSTANT_OFFSET = "constant_offset"
    UNIFORM_ARBITRARY = "uniform_arbitrary"
    WIDE_INTERVAL = "wide_interval"


class Strategy(str, Enum):
    BFT = "bft"
    OUTLIER = "outlier"


class FaultClass(str, Enum):
    NON_FAULTY = "non_faulty"
    TAMELY_FAULTY = "tamely_faulty"
    WIDELY_FAULTY = "widely_faulty"


class FusionScope(str, Enum):
    LOCAL = "local_fusion"
    GLOBAL = "global_fusion"


class FusionMethod(str, Enum):
    NAIVE = "naive"
    BROOKS_IYENGAR = "brooks_iyengar"
    OUTLIER = "outlier"
    BAYESIAN = "bayesian"
    KALMAN = "kalman"
    ENTANGLED = "entangled"


class Scenario(str, Enum):
    NO_FAULT = "no_fault"
    BYZANTINE = "byzantine"
    BYZANTINE_DECOHERED = "byzantine_decohered"


# Interval algebra and fusion values


@dataclass(frozen=True, slots=True)
class Interval:
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise InvalidInput(f"interval endpoints must be finite: {self}")
        if self.lower > self.upper:
            raise InvalidInput(f"interval lower {self.lower} > upper {self.upper}")

    @classmethod
    def around(cls, center: float, half_width: float) -> "Interval":
        return cls(center - half_width, center + half_width)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.upper - self.lower)

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def gap_to(self, other: "Interval") -> float:
        """Distance between the two closed intervals, 0 when they intersect."""
        return max(0.0, other.lower - self.upper, self.lower - other.upper)


@dataclass(frozen=True, slots=True)
class OverlapRegion:
    interval: Interval
    count: int


@dataclass(frozen=True, slots=True)
class SensorReading:
    sensor_id: int
    estimate: float
    interval: Interval
    visibility: float
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.estimate):
            raise InvalidInput(f"sensor {self.sensor_id} estimate is not finite")
        if not 0.0 <= self.visibility <= 1.0:
            raise InvalidInput(
                f"sensor {self.sensor_id} visibility {self.visibility} outside [0, 1]"
            )


@dataclass(frozen=True, slots=True)
class FusionResult:
    estimate: float
    scores: tuple[float, ...]
    excluded: frozenset[int]
    effective_count: int

    @property
    def sensors(self) -> int:
        return len(self.scores)


@dataclass(frozen=True, slots=True)
class KalmanState:
    mean: float
    variance: float
    q: float
    r: float

    def __post_init__(self) -> None:
        if not self.variance > 0:
            raise InvalidInput(f"Kalman variance must be positive, got {self.variance}")
        if self.q < 0 or not self.r > 0:
            raise InvalidInput(f"Kalman noise must satisfy q >= 0, r > 0 ({self.q}, {self.r})")


# Sensor physics


class ByzantineModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ByzantineKind = ByzantineKind.CONSTANT_OFFSET
    offset: float = 5.0
    spread: float = Field(default=1.0, ge=0)


class SensorParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    atoms: int = Field(default=1000, ge=1)
    sensitivity: float = Field(default=0.1, gt=0)
    visibility0: float = Field(default=1.0, ge=0, le=1)
    t2: float = Field(default=1.0, gt=0)
    mode: SensorMode = SensorMode.COHERENT

    @model_validator(mode="after")
    def _coherent_is_fully_visible(self) -> Self:
        if self.mode is SensorMode.COHERENT and self.visibility0 != 1.0:
            raise ValueError("a coherent sensor must have visibility0 = 1")
        return self


# Bounds


class BoundQuery(BaseModel):
    model_config = ConfigDict(frozen=True)

    atoms: int = Field(ge=1)
    sensitivity: float = Field(gt=0)
    sensors: int = Field(ge=1)
    faults: int = Field(default=0, ge=0)
    visibility: float = Field(default=1.0, ge=0, le=1)
    strategy: Strategy = Strategy.OUTLIER


@dataclass(frozen=True, slots=True)
class BoundValue:
    mse_lower: float
    rmse_lower: float
    m_eff: int
    qfi: float


class BoundsSweep(BaseModel):
    """Grid behind the bounds table."""

    atoms: int = Field(default=1000, ge=1)
    sensitivity: float = Field(default=0.1, gt=0)
    sensors: list[int] = Field(default_factory=lambda: [2, 4, 8, 16, 32, 64])
    faults: list[int] = Field(default_factory=lambda: [0])
    visibilities: list[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0])
    strategies: list[Strategy] = Field(
        default_factory=lambda: [Strategy.BFT, Strategy.OUTLIER]
    )

    @field_validator("sensors")
    @classmethod
    def _sensors_positive(cls, v: list[int]) -> list[int]:
        if not v or any(m < 1 for m in v):
            raise ValueError("sensor counts must be non-empty and >= 1")
        return v

    @field_validator("faults")
    @classmethod
    def _faults_non_negative(cls, v: list[int]) -> list[int]:
        if not v or any(f < 0 for f in v):
            raise ValueError("fault counts must be non-empty and >= 0")
        return v

    @field_validator("visibilities")
    @classmethod
    def _visibilities_in_range(cls, v: list[float]) -> list[float]:
        if not v or any(not 0.0 <= x <= 1.0 for x in v):
            raise ValueError("visibilities must be non-empty and within [0, 1]")
        return v


# Network layer


class EnergyParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    e_amp: float = Field(ge=0)
    distance: float = Field(ge=0)


# Monte Carlo


class ExperimentConfig(BaseModel):
    atoms: int = Field(default=1000, ge=1)
    sensitivity: float = Field(default=0.1, gt=0)
    t_true: float = 25.0
    sensor_counts: list[int] = Field(default_factory=lambda: [2, 4, 8, 16, 32, 64])
    fault_fraction: float = Field(default=0.0, ge=0, lt=1)
    visibility: float = Field(default=1.0, gt=0, le=1)
    tau_prep: float = Field(default=0.0, ge=0)
    trials: int = Field(default=10_000, ge=1)
    seed: int = Field(default=42, ge=0, lt=2**64)
    methods: list[FusionMethod] = Field(
        default_factory=lambda: [FusionMethod.NAIVE, FusionMethod.ENTANGLED]
    )
    alpha: float = Field(default=0.05, gt=0, lt=1)
    byzantine: ByzantineModel = Field(default_factory=ByzantineModel)
    crossover_trials: int = Field(default=2000, ge=1)
    kalman_steps: int = Field(default=5, ge=1)
    kalman_q: float = Field(default=0.0, ge=0)
    crossover_sensors: int = Field(default=8, ge=2)
    workers: int = Field(default=1, ge=1)

    @field_validator("sensor_counts")
    @classmethod
    def _counts_positive(cls, v: list[int]) -> list[int]:
        if not v or any(m < 1 for m in v):
            raise ValueError("sensor_counts must be non-empty and all >= 1")
        return v

    @field_validator("methods")
    @classmethod
    def _methods_unique(cls, v: list[FusionMethod]) -> list[FusionMethod]:
        if not v:
            raise ValueError("at least one method is required")
        return list(dict.fromkeys(v))


class CrossoverSweep(ExperimentConfig):
    fault_fracs: list[float] = Field(default_factory=lambda: [0.0, 0.1, 0.2])
    taus: list[float] = Field(default_factory=lambda: [0.0, 0.15, 0.3])
    strategy: Strategy = Strategy.BFT

    @field_validator("fault_fracs")
    @classmethod
    def _fracs_in_range(cls, v: list[float]) -> list[float]:
        if not v or any(not 0.0 <= x < 1.0 for x in v):
            raise ValueError("fault fractions must lie in [0, 1)")
        return v

    @field_validator("taus")
    @classmethod
    def _taus_non_negative(cls, v: list[float]) -> list[float]:
        if not v or any(t < 0 for t in v):
            raise ValueError("preparation overheads must be >= 0")
        return v


class TrialStats(BaseModel):
    method: FusionMethod
    sensors: int = Field(ge=1)
    faults: int = Field(default=0, ge=0)
    rmse: float = Field(ge=0)
    rmse_stderr: float = Field(ge=0)
    mean_bias: float
    mse_stderr: float = Field(default=0.0, ge=0)
    fallback_trials: int = Field(default=0, ge=0)

    @property
    def mse(self) -> float:
        return self.rmse**2


@dataclass(frozen=True, slots=True)
class CrossoverResult:
    v_star: float
    no_crossing: bool
    m_eff: int
    faults: int


# Crisp 8-sensor dataset


@dataclass(frozen=True, slots=True)
class CrispSensor:
    id: str
    center: float
    half_width: float

    def __post_init__(self) -> None:
        if not self.half_width > 0:
            raise InvalidInput(f"{self.id}: half_width must be positive")

    @property
    def interval(self) -> Interval:
        return Interval.around(self.center, self.half_width)


class EightSensorConfig(BaseModel):
    atoms: int = Field(default=1000, ge=1)
    sensitivity: float = Field(default=0.1, gt=0)
    alpha: float = Field(default=0.05, gt=0, lt=1)


# Intel Lab motes


class MoteRecord(BaseModel):
    date: dt.date
    time: dt.time
    epoch: int = Field(ge=0)
    mote_id: int = Field(ge=1, le=58)
    temperature: float | None = None
    humidity: float | None = None
    light: float | None = None
    voltage: float | None = None


@dataclass(frozen=True, slots=True)
class MoteLocation:
    mote_id: int
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInput(f"mote {self.mote_id} has non-finite coordinates")


@dataclass
class ClusterAssignment:
    labels: dict[int, int]
    centroids: list[tuple[float, float]]
    objective_history: list[float] = field(default_factory=list)
    iterations: int = 0

    @property
    def k(self) -> int:
        return len(self.centroids)

    def members(self, cluster: int) -> list[int]:
        return sorted(m for m, c in self.labels.items() if c == cluster)

    def sizes(self) -> list[int]:
        return [len(self.members(c)) for c in range(self.k)]


class IntelConfig(BaseModel):
    data_dir: Path | None = None
    clusters: int = Field(default=6, ge=1)
    exclude_windows: bool = False
    tolerance: float = Field(default=0.5, gt=0)
    wall_margin: float = Field(default=2.0, ge=0)
    z_thresh: float = 1.0
    epochs: int = Field(default=80, ge=1)
    atoms: int = Field(default=1000, ge=1)
    sensitivity: float = Field(default=0.1, gt=0)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    seed: int = Field(default=42, ge=0, lt=2**64)
    missing_fracs: list[float] = Field(
        default_factory=lambda: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
    )
    visibilities: list[float] = Field(
        default_factory=lambda: [1.0, 0.9, 0.8, 0.7, 0.6, 0.5]
    )
    trials: int = Field(default=2000, ge=1)

    @field_validator("missing_fracs")
    @classmethod
    def _fracs_in_range(cls, v: list[float]) -> list[float]:
        if any(not 0.0 <= x < 1.0 for x in v):
            raise ValueError("missing fractions must lie in [0, 1)")
        return v

    @field_validator("visibilities")
    @classmethod
    def _visibilities_in_range(cls, v: list[float]) -> list[float]:
        if any(not 0.0 <= x <= 1.0 for x in v):
            raise ValueError("visibilities must lie in [0, 1]")
        return v


# Run bookkeeping


class RunManifest(BaseModel):
    command: str
    config: dict[str, Any]
    seed: int | None = None
    version: str
    outputs: list[str] = Field(default_factory=list)
    duration_seconds: float = Field(default=0.0, ge=0)
    input_checksums: dict[str, str] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)
    created_at: dt.datetime = Field(default_factory=get_datetime_utc)
