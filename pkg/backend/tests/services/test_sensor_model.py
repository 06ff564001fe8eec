"""Unit tests for the quantum sensor model."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import DivergentVariance, InvalidInput
from app.models import ByzantineKind, ByzantineModel, SensorMode, SensorParams
from app.services.sensor_model import (
    confidence_interval,
    effective_visibility,
    parameter_sigma,
    phase_from_parameter,
    phase_variance,
    qpn_half_width,
    sample_measurement,
    sample_readings,
    z_quantile,
)

NOMINAL_HALF_WIDTH = 0.309897


class TestClosedForms:
    """Test the noise-model formulas."""

    def test_z_quantile(self):
        """Test the 95% two-sided normal quantile."""
        assert z_quantile(0.05) == pytest.approx(1.959964, rel=1e-6)

    def test_z_quantile_rejects_bad_alpha(self):
        """Test alpha outside (0, 1)."""
        with pytest.raises(InvalidInput):
            z_quantile(1.0)

    def test_phase_encoding(self):
        """Test phi = eta * T."""
        assert phase_from_parameter(25.0, 0.1) == pytest.approx(2.5)

    def test_phase_encoding_rejects_non_finite(self):
        """Test non-finite parameters."""
        with pytest.raises(InvalidInput):
            phase_from_parameter(math.nan, 0.1)

    def test_visibility_decay(self):
        """Test V0 * exp(-t/T2)."""
        assert effective_visibility(1.0, 0.0, 1.0) == 1.0
        assert effective_visibility(0.9, 1.0, 1.0) == pytest.approx(0.9 / math.e)

    def test_visibility_rejects_bad_t2(self):
        """Test T2 <= 0."""
        with pytest.raises(InvalidInput):
            effective_visibility(1.0, 0.5, 0.0)

    def test_projection_noise(self):
        """Test 1/(4N) at full visibility and 1/(4N V^2) when decohered."""
        assert phase_variance(1000, 1.0) == pytest.approx(2.5e-4)
        assert phase_variance(1000, 0.5) == pytest.approx(1e-3)

    def test_zero_visibility_diverges(self):
        """Test V = 0 carries no information."""
        with pytest.raises(DivergentVariance):
            phase_variance(1000, 0.0)

    def test_half_width(self):
        """Test the N=1000, eta=0.1 confidence half-width."""
        assert qpn_half_width(1000, 0.1, 1.0) == pytest.approx(NOMINAL_HALF_WIDTH, rel=1e-5)

    def test_confidence_interval_is_centred(self):
        """Test the interval is symmetric about the estimate."""
        interval = confidence_interval(25.0, 1000, 0.1, 1.0)
        assert interval.midpoint == pytest.approx(25.0)
        assert interval.half_width == pytest.approx(NOMINAL_HALF_WIDTH, rel=1e-5)

    def test_half_width_shrinks_with_atoms(self):
        """Test the 1/sqrt(N) scaling."""
        ratio = qpn_half_width(1000, 0.1, 1.0) / qpn_half_width(4000, 0.1, 1.0)
        assert ratio == pytest.approx(2.0)


class TestSensorParams:
    """Test SensorParams validation."""

    def test_coherent_requires_full_visibility(self):
        """Test a coherent sensor with V0 < 1 is rejected."""
        with pytest.raises(ValidationError):
            SensorParams(visibility0=0.8, mode=SensorMode.COHERENT)

    def test_decohered_accepts_partial_visibility(self):
        """Test a decohered sensor with V0 < 1."""
        params = SensorParams(visibility0=0.8, mode=SensorMode.DECOHERED)
        assert params.visibility0 == 0.8


class TestSampleMeasurement:
    """Test single-sensor sampling."""

    def test_coherent_reading(self, rng):
        """Test an honest reading carries V = 1 and contains its estimate."""
        reading = sample_measurement(SensorParams(), 25.0, ByzantineModel(), rng)
        assert reading.visibility == 1.0
        assert reading.interval.contains(reading.estimate)
        assert reading.interval.half_width == pytest.approx(NOMINAL_HALF_WIDTH, rel=1e-5)

    def test_decohered_reading_widens(self, rng):
        """Test the interval widens by 1/V at time t."""
        params = SensorParams(visibility0=1.0, mode=SensorMode.DECOHERED)
        reading = sample_measurement(params, 25.0, ByzantineModel(), rng, t=1.0)
        assert reading.visibility == pytest.approx(math.exp(-1.0))
        assert reading.interval.half_width == pytest.approx(
            NOMINAL_HALF_WIDTH * math.e, rel=1e-5
        )

    def test_byzantine_constant_offset(self, rng):
        """Test a constant-offset fault reports t + offset with V = 0."""
        params = SensorParams(mode=SensorMode.BYZANTINE)
        byz = ByzantineModel(kind=ByzantineKind.CONSTANT_OFFSET, offset=5.0, spread=1.0)
        reading = sample_measurement(params, 25.0, byz, rng, sensor_id=3)
        assert reading.sensor_id == 3
        assert reading.visibility == 0.0
        assert reading.estimate == pytest.approx(30.0)
        assert reading.interval.half_width == pytest.approx(NOMINAL_HALF_WIDTH + 1.0, rel=1e-5)

    def test_byzantine_uniform_range(self, rng):
        """Test uniform faults stay inside offset +- spread."""
        params = SensorParams(mode=SensorMode.BYZANTINE)
        byz = ByzantineModel(kind=ByzantineKind.UNIFORM_ARBITRARY, offset=5.0, spread=2.0)
        for _ in range(50):
            reading = sample_measurement(params, 25.0, byz, rng)
            assert 28.0 <= reading.estimate <= 32.0

    def test_honest_noise_level(self, rng):
        """Test the empirical spread matches the projection-noise sigma."""
        params = SensorParams()
        estimates = [
            sample_measurement(params, 25.0, ByzantineModel(), rng).estimate
            for _ in range(4000)
        ]
        sigma = parameter_sigma(1000, 0.1, 1.0)
        assert np.std(estimates) == pytest.approx(sigma, rel=0.05)
        assert np.mean(estimates) == pytest.approx(25.0, abs=4 * sigma / math.sqrt(4000))


class TestSampleReadings:
    """Test vectorized network sampling."""

    def test_honest_readings_ignore_fault_mask(self):
        """Test honest slots draw the same values whatever the fault mask."""
        params = SensorParams()
        clean = sample_readings(
            params, 25.0, ByzantineModel(), np.zeros(8, dtype=bool), np.random.default_rng(1)
        )
        mask = np.zeros(8, dtype=bool)
        mask[[2, 5]] = True
        faulty = sample_readings(params, 25.0, ByzantineModel(), mask, np.random.default_rng(1))
        np.testing.assert_array_equal(clean.estimates[~mask], faulty.estimates[~mask])
        np.testing.assert_array_equal(faulty.visibility[mask], [0.0, 0.0])
        np.testing.assert_allclose(faulty.estimates[mask], [30.0, 30.0])

    def test_readings_round_trip_to_objects(self, rng):
        """Test NetworkSample.readings mirrors the arrays."""
        sample = sample_readings(SensorParams(), 25.0, ByzantineModel(), np.zeros(4, dtype=bool), rng)
        readings = sample.readings()
        assert sample.sensors == 4
        assert [r.sensor_id for r in readings] == [0, 1, 2, 3]
        assert readings[1].estimate == sample.estimates[1]

    def test_per_sensor_visibility_override(self, rng):
        """Test explicit visibilities widen only the chosen sensors."""
        params = SensorParams(mode=SensorMode.DECOHERED)
        sample = sample_readings(
            params,
            25.0,
            ByzantineModel(),
            np.zeros(2, dtype=bool),
            rng,
            visibilities=np.array([1.0, 0.5]),
        )
        widths = sample.upper - sample.lower
        assert widths[1] == pytest.approx(2.0 * widths[0])

    def test_honest_zero_visibility_rejected(self, rng):
        """Test an honest sensor at V = 0 diverges."""
        with pytest.raises(DivergentVariance):
            sample_readings(
                SensorParams(mode=SensorMode.DECOHERED),
                25.0,
                ByzantineModel(),
                np.zeros(2, dtype=bool),
                rng,
                visibilities=np.array([1.0, 0.0]),
            )

    def test_coverage_near_nominal(self):
        """Test about 95% of honest intervals contain the true value."""
        rng = np.random.default_rng(11)
        hits = 0
        total = 0
        for _ in range(200):
            sample = sample_readings(
                SensorParams(), 25.0, ByzantineModel(), np.zeros(20, dtype=bool), rng
            )
            hits += int(np.sum((sample.lower <= 25.0) & (25.0 <= sample.upper)))
            total += 20
        assert hits / total == pytest.approx(0.95, abs=0.02)

    def test_coverage_at_one_sigma(self):
        """Test alpha = 0.32 intervals cover the true value about 68% of the time."""
        rng = np.random.default_rng(13)
        hits = 0
        total = 0
        for _ in range(600):
            sample = sample_readings(
                SensorParams(), 25.0, ByzantineModel(), np.zeros(20, dtype=bool), rng, 0.32
            )
            hits += int(np.sum((sample.lower <= 25.0) & (25.0 <= sample.upper)))
            total += 20
        assert total >= 10_000
        assert hits / total == pytest.approx(0.68, abs=0.015)


def test_effective_visibility_decays_monotonically():
    """Test V(t) never rises with t and stays within [0, V0]."""
    rng = np.random.default_rng(17)
    for _ in range(200):
        v0 = float(rng.uniform(0.0, 1.0))
        t2 = float(rng.uniform(0.01, 10.0))
        t = float(rng.uniform(0.0, 5.0))
        later = t + float(rng.uniform(0.0, 5.0))
        now = effective_visibility(v0, t, t2)
        assert effective_visibility(v0, later, t2) <= now
        assert 0.0 <= now <= v0
