"""Outage of two-tier mmWave networks with JSDM precoding: Monte Carlo and
semi-analytical engines."""

from .analytic import (Mode, OutageCurve, Scenario, Source, laplace_interference,
                       outage_curve, total_outage, user_outage)
from .config import DEFAULTS, GroupGeometry, NetworkConfig, TierParams, load_config
from .montecarlo import SimPlan, SimResult, run, sweep_density_ratio

__all__ = [
    "Mode", "OutageCurve", "Scenario", "Source", "laplace_interference",
    "outage_curve", "total_outage", "user_outage", "DEFAULTS", "GroupGeometry",
    "NetworkConfig", "TierParams", "load_config", "SimPlan", "SimResult", "run",
    "sweep_density_ratio",
]
__version__ = "0.1.0"
