"""
Seeded Monte Carlo harness.

Every trial owns a PCG64 stream derived from (seed, M, trial index), so
trials are independent of execution order and every method in a trial sees
the same readings.
"""

import logging
import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Any

import numpy as np

from app.core.exceptions import (
    FaultBudgetExceeded,
    InvalidInput,
    NoInformation,
    NoSurvivors,
)
from app.models import (
    BoolArray,
    BoundQuery,
    CrossoverResult,
    ExperimentConfig,
    FloatArray,
    FusionMethod,
    KalmanState,
    Scenario,
    SensorMode,
    SensorParams,
    Strategy,
    TrialStats,
)
from app.services.bounds import bft_fault_budget, m_eff, unified_bound
from app.services.fusion import (
    DIFFUSE_VARIANCE,
    OverlapSweep,
    bayesian_weighted_fuse,
    bft_fuse_arrays,
    fault_class,
    kalman_step,
    predictive_outlier_fuse_arrays,
    region_estimate,
    sweep_intervals,
)
from app.services.sensor_model import (
    NetworkSample,
    effective_visibility,
    parameter_sigma,
    sample_readings,
)

logger = logging.getLogger(__name__)

SIGMA_ALLOWANCE = 3.0
BISECTION_TOLERANCE = 0.02
CROSSOVER_STREAM = 0xC505
FRACTION_EPSILON = 1e-9


def trial_rng(seed: int, sensors: int, trial: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(sensors, trial)))
    )


def fault_count(fraction: float, sensors: int) -> int:
    """Faulty sensors in an M-sensor trial: floor(fraction * M)."""
    return math.floor(fraction * sensors + FRACTION_EPSILON)


def _sensor_params(config: ExperimentConfig) -> SensorParams:
    mode = SensorMode.COHERENT if config.visibility == 1.0 else SensorMode.DECOHERED
    return SensorParams(
        atoms=config.atoms,
        sensitivity=config.sensitivity,
        visibility0=config.visibility,
        mode=mode,
    )


def _check_fault_budgets(config: ExperimentConfig) -> None:
    bft = FusionMethod.BROOKS_IYENGAR in config.methods
    for sensors in config.sensor_counts:
        faults = fault_count(config.fault_fraction, sensors)
        if bft and faults > bft_fault_budget(sensors):
            raise FaultBudgetExceeded(sensors, faults, Strategy.BFT.value)
        if faults >= sensors:
            raise FaultBudgetExceeded(sensors, faults, Strategy.OUTLIER.value)


def _summarize(
    method: FusionMethod,
    sensors: int,
    faults: int,
    errors: FloatArray,
    fallbacks: int,
) -> TrialStats:
    squared = errors**2
    mse = float(squared.mean())
    rmse = math.sqrt(mse)
    n = errors.shape[0]
    mse_stderr = float(squared.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return TrialStats(
        method=method,
        sensors=sensors,
        faults=faults,
        rmse=rmse,
        rmse_stderr=mse_stderr / (2.0 * rmse) if rmse > 0 else 0.0,
        mean_bias=float(errors.mean()),
        mse_stderr=mse_stderr,
        fallback_trials=fallbacks,
    )


def _outlier_or_agreeing_mean(
    sample: NetworkSample, sweep: OverlapSweep
) -> tuple[float, int, int]:
    """(estimate, effective count, 1 if the agreeing-set mean stood in)."""
    try:
        result = predictive_outlier_fuse_arrays(
            sample.estimates,
            sample.lower,
            sample.upper,
            sample.visibility,
            sweep=sweep,
        )
    except (NoSurvivors, NoInformation):
        kept = sweep.agreeing
        return float(sample.estimates[kept].mean()), int(kept.sum()), 1
    return result.estimate, result.effective_count, 0


def _kalman_track(
    config: ExperimentConfig,
    params: SensorParams,
    faulty: BoolArray,
    rng: np.random.Generator,
    first: tuple[float, int, int],
    r: float,
) -> tuple[float, int]:
    """
    Filter `kalman_steps` outlier-fused readings of a static parameter.

    The first reading is the trial's shared sample; later ones are fresh
    draws of the same network (same faulty set) taken after every other
    method has read the stream. Returns the final posterior mean and 1 if
    any step fell back to the agreeing-set mean.
    """
    estimate, count, fell_back = first
    state = kalman_step(
        KalmanState(mean=0.0, variance=DIFFUSE_VARIANCE, q=config.kalman_q, r=r),
        estimate,
        count,
    )
    for _ in range(config.kalman_steps - 1):
        sample = sample_readings(
            params, config.t_true, config.byzantine, faulty, rng, config.alpha
        )
        estimate, count, step_fell_back = _outlier_or_agreeing_mean(
            sample, sweep_intervals(sample.lower, sample.upper)
        )
        fell_back = max(fell_back, step_fell_back)
        state = kalman_step(state, estimate, count)
    return state.mean, fell_back


def simulate_sensor_count(config: ExperimentConfig, sensors: int) -> list[TrialStats]:
    """
    Run every configured method over `trials` trials at one sensor count.

    The entangled method reports t_true + sigma1 / (V_eff (M - f)) z with one
    standard normal z per trial, sigma1 = 1 / (2 eta sqrt(N)) and
    V_eff = V exp(-tau_prep). Only the M - f honest sensors share the
    entangled state; faulty ones carry no coherent phase, so at f = 0 this
    is the Heisenberg-limited error sqrt(hl_variance) / V_eff.
    """
    faults = fault_count(config.fault_fraction, sensors)
    params = _sensor_params(config)
    methods = config.methods
    errors = {m: np.empty(config.trials) for m in methods}
    fallbacks = dict.fromkeys(methods, 0)

    sigma1 = parameter_sigma(config.atoms, config.sensitivity, 1.0)
    v_eff = config.visibility * math.exp(-config.tau_prep)
    entangled_sigma = sigma1 / (v_eff * (sensors - faults))
    needs_sweep = bool(
        {FusionMethod.BROOKS_IYENGAR, FusionMethod.OUTLIER, FusionMethod.KALMAN}
        & set(methods)
    )

    started = time.perf_counter()
    for trial in range(config.trials):
        rng = trial_rng(config.seed, sensors, trial)
        faulty = np.zeros(sensors, dtype=bool)
        if faults:
            faulty[rng.choice(sensors, size=faults, replace=False)] = True
        sample = sample_readings(
            params, config.t_true, config.byzantine, faulty, rng, config.alpha
        )
        entangled_noise = float(rng.standard_normal())

        sweep: OverlapSweep | None = None
        if needs_sweep:
            sweep = sweep_intervals(sample.lower, sample.upper)
        outlier: tuple[float, int, int] | None = None

        for method in methods:
            if method is FusionMethod.NAIVE:
                estimate = float(sample.estimates.mean())
            elif method is FusionMethod.BROOKS_IYENGAR:
                estimate = bft_fuse_arrays(
                    sample.estimates, sample.lower, sample.upper, faults, sweep=sweep
                ).estimate
            elif method in (FusionMethod.OUTLIER, FusionMethod.KALMAN):
                if outlier is None:
                    assert sweep is not None
                    outlier = _outlier_or_agreeing_mean(sample, sweep)
                if method is FusionMethod.OUTLIER:
                    estimate, _, fell_back = outlier
                else:
                    estimate, fell_back = _kalman_track(
                        config, params, faulty, rng, outlier, sigma1**2
                    )
                fallbacks[method] += fell_back
            elif method is FusionMethod.BAYESIAN:
                estimate = bayesian_weighted_fuse(
                    sample.estimates.tolist(), sample.visibility.tolist()
                )
            else:
                estimate = config.t_true + entangled_sigma * entangled_noise
            errors[method][trial] = estimate - config.t_true

    logger.debug(
        f"M={sensors} f={faults}: {config.trials} trials in "
        f"{time.perf_counter() - started:.2f}s"
    )
    return [
        _summarize(m, sensors, faults, errors[m], fallbacks[m]) for m in methods
    ]


def run_experiment(config: ExperimentConfig) -> list[TrialStats]:
    """TrialStats ordered by sensor count, then by method as configured."""
    _check_fault_budgets(config)
    logger.info(
        f"Running {config.trials} trials for M={config.sensor_counts}, "
        f"methods={[m.value for m in config.methods]}, f/M={config.fault_fraction}, "
        f"V={config.visibility}, seed={config.seed}"
    )
    counts = config.sensor_counts
    if config.workers > 1 and len(counts) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            per_count = list(pool.map(simulate_sensor_count, repeat(config), counts))
    else:
        per_count = [simulate_sensor_count(config, m) for m in counts]
    stats = [row for rows in per_count for row in rows]
    logger.info(f"Experiment finished: {len(stats)} rows")
    return stats


def _loglog(points: Sequence[tuple[float, float]]) -> tuple[FloatArray, FloatArray]:
    m = np.asarray([p[0] for p in points], dtype=np.float64)
    y = np.asarray([p[1] for p in points], dtype=np.float64)
    if np.any(m <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise InvalidInput("log-log fits need strictly positive values")
    return np.log10(m), np.log10(y)


def fit_loglog_slope(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log10(y) against log10(x)."""
    if len(points) < 3:
        raise InvalidInput(f"slope fit needs at least 3 points, got {len(points)}")
    x, y = _loglog(points)
    slope, _intercept = np.polyfit(x, y, 1)
    return float(slope)


def local_slope_curve(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Finite-difference log-log slope between consecutive points, keyed by the right point."""
    if len(points) < 2:
        raise InvalidInput("local slopes need at least 2 points")
    ordered = sorted(points)
    x, y = _loglog(ordered)
    dx = np.diff(x)
    if np.any(dx == 0):
        raise InvalidInput("duplicate sensor counts in slope curve")
    slopes = np.diff(y) / dx
    return [(ordered[i + 1][0], float(s)) for i, s in enumerate(slopes)]


def recovery_gains(stats: Sequence[TrialStats]) -> dict[tuple[int, FusionMethod], float]:
    """20*log10(rmse_naive / rmse_method) for every row with a naive baseline."""
    naive = {s.sensors: s.rmse for s in stats if s.method is FusionMethod.NAIVE}
    gains = {}
    for s in stats:
        baseline = naive.get(s.sensors)
        if baseline is None or s.rmse == 0:
            continue
        gains[(s.sensors, s.method)] = 20.0 * math.log10(baseline / s.rmse)
    return gains


def byzantine_recovery_gain(
    config: ExperimentConfig,
) -> dict[int, dict[FusionMethod, float]]:
    """Per sensor count, the dB gain of each method over naive averaging."""
    methods = [FusionMethod.NAIVE, *(m for m in config.methods if m is not FusionMethod.NAIVE)]
    stats = run_experiment(config.model_copy(update={"methods": methods}))
    by_count: dict[int, dict[FusionMethod, float]] = {}
    for (sensors, method), gain in recovery_gains(stats).items():
        by_count.setdefault(sensors, {})[method] = gain
    return by_count


DEFAULT_BOUND_STRATEGY: dict[FusionMethod, Strategy] = {
    FusionMethod.NAIVE: Strategy.OUTLIER,
    FusionMethod.BROOKS_IYENGAR: Strategy.BFT,
    FusionMethod.OUTLIER: Strategy.OUTLIER,
    FusionMethod.BAYESIAN: Strategy.OUTLIER,
    FusionMethod.KALMAN: Strategy.OUTLIER,
    FusionMethod.ENTANGLED: Strategy.OUTLIER,
}


@dataclass(frozen=True)
class DominanceRow:
    method: FusionMethod
    sensors: int
    faults: int
    visibility: float
    strategy: Strategy
    mse: float
    mse_bound: float
    mse_stderr: float
    z_margin: float
    asserted: bool

    @property
    def violated(self) -> bool:
        return self.asserted and self.mse < self.mse_bound - SIGMA_ALLOWANCE * self.mse_stderr


def bound_dominance(
    config: ExperimentConfig,
    strategy_for_method: dict[FusionMethod, Strategy] | None = None,
    stats: Sequence[TrialStats] | None = None,
) -> list[DominanceRow]:
    """
    Pair every TrialStats row with the unified bound at its (M, f, V, strategy).

    The entangled estimator is compared at its effective visibility and only
    asserted at V_eff = 1; below that a 1/(V^2 M^2) estimator can sit under the
    convex-combination bound. The Kalman method reads the network
    `kalman_steps` times, so its bound is the single-reading bound divided by
    that count.
    """
    mapping = {**DEFAULT_BOUND_STRATEGY, **(strategy_for_method or {})}
    if stats is None:
        stats = run_experiment(config)
    v_eff = config.visibility * math.exp(-config.tau_prep)
    rows = []
    for s in stats:
        strategy = mapping[s.method]
        entangled = s.method is FusionMethod.ENTANGLED
        visibility = v_eff if entangled else config.visibility
        try:
            bound = unified_bound(
                BoundQuery(
                    atoms=config.atoms,
                    sensitivity=config.sensitivity,
                    sensors=s.sensors,
                    faults=s.faults,
                    visibility=visibility,
                    strategy=strategy,
                )
            )
        except FaultBudgetExceeded:
            logger.debug(f"No {strategy.value} bound for M={s.sensors}, f={s.faults}")
            continue
        mse_bound = bound.mse_lower
        if s.method is FusionMethod.KALMAN:
            mse_bound /= config.kalman_steps
        gap = s.mse - mse_bound
        z = gap / s.mse_stderr if s.mse_stderr > 0 else math.copysign(math.inf, gap)
        rows.append(
            DominanceRow(
                method=s.method,
                sensors=s.sensors,
                faults=s.faults,
                visibility=visibility,
                strategy=strategy,
                mse=s.mse,
                mse_bound=mse_bound,
                mse_stderr=s.mse_stderr,
                z_margin=z,
                asserted=(not entangled) or visibility == 1.0,
            )
        )
    return rows


def _bisect_decreasing(
    excess: Callable[[float], float], tolerance: float
) -> tuple[float, bool]:
    """Root of a function decreasing in V on (0, 1]; (1, True) when it stays positive."""
    if excess(1.0) > 0:
        return 1.0, True
    lo, hi = 0.0, 1.0
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), False


def empirical_crossover(
    config: ExperimentConfig,
    strategy: Strategy = Strategy.BFT,
    *,
    tolerance: float = BISECTION_TOLERANCE,
) -> CrossoverResult:
    """
    Visibility below which classical fault-tolerant fusion beats entangled fusion.

    Classical side: the M_eff retained honest sensors at full visibility,
    averaged. Entangled side: one estimate over M_eff sensors at
    V_eff = V e^-tau. Both sides reuse the same draws at every bisection step.
    """
    sensors = config.crossover_sensors
    faults = fault_count(config.fault_fraction, sensors)
    effective = m_eff(sensors, faults, strategy)
    trials = config.crossover_trials
    sigma1 = parameter_sigma(config.atoms, config.sensitivity, 1.0)

    rng = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(CROSSOVER_STREAM, effective))
    )
    classical = sigma1 * rng.standard_normal((trials, effective)).mean(axis=1)
    classical_rmse = float(np.sqrt(np.mean(classical**2)))
    entangled_rms = float(np.sqrt(np.mean(rng.standard_normal(trials) ** 2)))
    overhead = math.exp(-config.tau_prep)

    def excess(v: float) -> float:
        if v <= 0:
            return math.inf
        return entangled_rms * sigma1 / (v * overhead * effective) - classical_rmse

    v_star, no_crossing = _bisect_decreasing(excess, tolerance)
    logger.debug(
        f"Crossover M={sensors} f={faults} m_eff={effective} tau={config.tau_prep}: "
        f"V*={v_star:.4f}{' (no crossing)' if no_crossing else ''}"
    )
    return CrossoverResult(
        v_star=v_star, no_crossing=no_crossing, m_eff=effective, faults=faults
    )


@dataclass
class OverlapSnapshot:
    """One trial's intervals, overlap regions and estimates."""

    scenario: Scenario
    t_true: float
    sensors: list[dict[str, Any]] = field(default_factory=list)
    regions: list[dict[str, float]] = field(default_factory=list)
    max_count: int = 0
    bi_estimate: float = 0.0
    naive_average: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario.value,
            "t_true": self.t_true,
            "sensors": self.sensors,
            "regions": self.regions,
            "max_count": self.max_count,
            "bi_estimate": self.bi_estimate,
            "naive_average": self.naive_average,
        }


def overlap_snapshot(
    config: ExperimentConfig, scenario: Scenario, sensors: int = 10
) -> OverlapSnapshot:
    """
    Data behind an overlap picture. Byzantine scenarios corrupt
    max(1, floor(f/M * M)) sensors; the decohered variant additionally
    reads half of the honest sensors at t = T2.
    """
    if sensors < 1:
        raise InvalidInput(f"snapshot needs at least one sensor, got {sensors}")
    faults = 0
    if scenario is not Scenario.NO_FAULT:
        faults = min(sensors - 1, max(1, fault_count(config.fault_fraction, sensors)))
    rng = trial_rng(config.seed, sensors, 0)
    faulty = np.zeros(sensors, dtype=bool)
    if faults:
        faulty[rng.choice(sensors, size=faults, replace=False)] = True

    visibility = np.full(sensors, config.visibility)
    if scenario is Scenario.BYZANTINE_DECOHERED:
        honest_ids = np.flatnonzero(~faulty)
        decohered = honest_ids[: math.ceil(honest_ids.size / 2)]
        visibility[decohered] = effective_visibility(config.visibility, 1.0, 1.0)

    sample = sample_readings(
        _sensor_params(config),
        config.t_true,
        config.byzantine,
        faulty,
        rng,
        config.alpha,
        visibilities=visibility,
    )
    sweep = sweep_intervals(sample.lower, sample.upper)
    snapshot = OverlapSnapshot(
        scenario=scenario,
        t_true=config.t_true,
        max_count=sweep.count,
        bi_estimate=region_estimate(sweep.regions),
        naive_average=float(sample.estimates.mean()),
    )
    for i in range(sensors):
        score = float(sweep.scores[i])
        klass = fault_class(score)
        snapshot.sensors.append(
            {
                "id": i,
                "estimate": float(sample.estimates[i]),
                "lower": float(sample.lower[i]),
                "upper": float(sample.upper[i]),
                "visibility": float(sample.visibility[i]),
                "byzantine": bool(sample.faulty[i]),
                "in_region": bool(sweep.agreeing[i]),
                "score": score,
                "class": klass.value,
            }
        )
    snapshot.regions = [
        {"lower": float(a), "upper": float(b)} for a, b in sweep.regions
    ]
    return snapshot
