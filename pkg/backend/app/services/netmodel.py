"""
Network-layer formulas: transmit energy power law, scale invariance, the
P_MAX local/global fusion rule, source entropy and the Hoeffding epsilon.
Logarithms are base 2 throughout.
"""

import math
from collections.abc import Sequence

import numpy as np

from app.core.exceptions import InvalidInput
from app.models import EnergyParams, FusionScope
from app.services.montecarlo import fit_loglog_slope

NORMALIZATION_TOLERANCE = 1e-9


def transmit_energy(e_amp: float, distance: float) -> float:
    params = EnergyParams(e_amp=e_amp, distance=distance)
    return params.e_amp + params.distance**2


def power_law_scale_ratio(c: float, d: float) -> float:
    """f(cd)/f(d) for f(d) = d^2; the constant cancels and the ratio is c^2."""
    if c <= 0 or d <= 0:
        raise InvalidInput(f"c and d must be positive (got {c}, {d})")
    return (c * d) ** 2 / d**2


def power_law_fit(distances: Sequence[float], energies: Sequence[float]) -> float:
    """Log-log slope of an energy curve."""
    return fit_loglog_slope(list(zip(distances, energies, strict=True)))


def pmax_classify(p_max: int, n: int) -> FusionScope:
    if n < 1:
        raise InvalidInput(f"n must be >= 1, got {n}")
    if not 0 <= p_max <= n:
        raise InvalidInput(f"P_MAX must lie in [0, {n}], got {p_max}")
    return FusionScope.LOCAL if p_max >= n / 2 else FusionScope.GLOBAL


def bayesian_correction(p_m_given_c: float, p_c: float) -> float:
    """P_MAXC = P(M|C) * P(C)."""
    for name, p in (("P(M|C)", p_m_given_c), ("P(C)", p_c)):
        if not 0.0 <= p <= 1.0:
            raise InvalidInput(f"{name} must lie in [0, 1], got {p}")
    return p_m_given_c * p_c


def source_entropy(probs: Sequence[float]) -> float:
    p = np.asarray(probs, dtype=np.float64)
    if p.size == 0 or np.any(p < 0):
        raise InvalidInput("probabilities must be non-empty and non-negative")
    if abs(math.fsum(p.tolist()) - 1.0) > NORMALIZATION_TOLERANCE:
        raise InvalidInput(f"probabilities sum to {p.sum()}, not 1")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def hoeffding_epsilon(range_r: float, delta: float, n: int) -> float:
    if range_r <= 0:
        raise InvalidInput(f"range must be positive, got {range_r}")
    if not 0.0 < delta <= 1.0:
        raise InvalidInput(f"delta must lie in (0, 1], got {delta}")
    if n < 1:
        raise InvalidInput(f"n must be >= 1, got {n}")
    return math.sqrt(range_r**2 * math.log2(1.0 / delta) / (2.0 * n))
