"""
Closed-form precision limits.

Variances are in parameter units squared. Amplitude ratios use 20*log10,
power ratios 10*log10.
"""

import math

from app.core.exceptions import FaultBudgetExceeded, InvalidInput
from app.models import BoundQuery, BoundValue, Strategy
from app.services.sensor_model import qpn_half_width, z_quantile


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise InvalidInput(f"{name} must be positive, got {value}")


def bft_fault_budget(sensors: int) -> int:
    return (sensors - 1) // 3


def faults_from_fraction(fraction: float, sensors: int) -> int:
    """Round-half-up realization of a fault fraction."""
    if not 0.0 <= fraction < 1.0:
        raise InvalidInput(f"fault fraction must lie in [0, 1), got {fraction}")
    return math.floor(fraction * sensors + 0.5)


def m_eff(sensors: int, faults: int, strategy: Strategy) -> int:
    if sensors < 1 or faults < 0:
        raise InvalidInput(f"need M >= 1 and f >= 0 (got M={sensors}, f={faults})")
    if strategy is Strategy.BFT:
        if faults > bft_fault_budget(sensors):
            raise FaultBudgetExceeded(sensors, faults, strategy.value)
        return sensors - 2 * faults
    if faults >= sensors:
        raise FaultBudgetExceeded(sensors, faults, strategy.value)
    return sensors - faults


def sql_variance(atoms: int, eta: float, sensors: int) -> float:
    _check_positive(atoms=atoms, eta=eta, sensors=sensors)
    return 1.0 / (4.0 * atoms * eta**2 * sensors)


def hl_variance(atoms: int, eta: float, sensors: int) -> float:
    _check_positive(atoms=atoms, eta=eta, sensors=sensors)
    return 1.0 / (4.0 * atoms * eta**2 * sensors**2)


def qfi(atoms: int, eta: float, m_eff: int, visibility: float) -> float:
    """Fisher information split into a decohered SQL part and a coherent HL part."""
    _check_positive(atoms=atoms, eta=eta, m_eff=m_eff)
    if not 0.0 <= visibility <= 1.0:
        raise InvalidInput(f"visibility must lie in [0, 1], got {visibility}")
    unit = 4.0 * atoms * eta**2
    v2 = visibility**2
    return (1.0 - v2) * unit * m_eff + v2 * unit * m_eff**2


def unified_bound(query: BoundQuery) -> BoundValue:
    effective = m_eff(query.sensors, query.faults, query.strategy)
    v2 = query.visibility**2
    mse = (1.0 - v2) * sql_variance(query.atoms, query.sensitivity, effective) + (
        v2 * hl_variance(query.atoms, query.sensitivity, effective)
    )
    return BoundValue(
        mse_lower=mse,
        rmse_lower=math.sqrt(mse),
        m_eff=effective,
        qfi=qfi(query.atoms, query.sensitivity, effective, query.visibility),
    )


def outlier_advantage_db(sensors: int, faults: int) -> float:
    """20*log10((M - 2f)/(M - f)); negative, its magnitude is the outlier advantage."""
    if faults < 0:
        raise InvalidInput(f"f must be >= 0, got {faults}")
    if sensors - 2 * faults <= 0:
        raise InvalidInput(f"M - 2f must be positive (M={sensors}, f={faults})")
    return 20.0 * math.log10((sensors - 2 * faults) / (sensors - faults))


def metrological_gain_db(sensors: int) -> float:
    if sensors < 1:
        raise InvalidInput(f"M must be >= 1, got {sensors}")
    return 10.0 * math.log10(sensors)


def critical_visibility_literal(m_eff: int, tau_prep: float) -> float:
    """
    Critical visibility from V_eff^2/m_eff > 1 - V_eff^2, taken as printed.

    V_eff* = sqrt(m_eff/(m_eff + 1)), then V* = V_eff* e^tau, clamped to 1.
    """
    if m_eff < 1:
        raise InvalidInput(f"m_eff must be >= 1, got {m_eff}")
    if tau_prep < 0:
        raise InvalidInput(f"tau_prep must be >= 0, got {tau_prep}")
    return min(1.0, math.sqrt(m_eff / (m_eff + 1.0)) * math.exp(tau_prep))


def critical_visibility_scaling(m_eff: int, tau_prep: float) -> float:
    """
    Crossover from variances: 1/(V_eff^2 m_eff^2) = 1/m_eff at V* = e^tau/sqrt(m_eff).
    """
    if m_eff < 1:
        raise InvalidInput(f"m_eff must be >= 1, got {m_eff}")
    if tau_prep < 0:
        raise InvalidInput(f"tau_prep must be >= 0, got {tau_prep}")
    return min(1.0, math.exp(tau_prep) / math.sqrt(m_eff))


def qpn_equivalent_atoms(half_width: float, eta: float, alpha: float = 0.05) -> float:
    """Atom count whose confidence half-width at V = 1 equals ``half_width``."""
    _check_positive(half_width=half_width, eta=eta)
    return (z_quantile(alpha) / (2.0 * eta * half_width)) ** 2


def half_width_for_atoms(atoms: int, eta: float, alpha: float = 0.05) -> float:
    return qpn_half_width(atoms, eta, 1.0, alpha)
