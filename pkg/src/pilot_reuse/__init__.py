"""Pilot reuse in multi-cell massive MIMO uplink: stochastic-geometry
simulator and closed-form coverage analysis."""

from .config import SystemConfig, load_config
from .geometry import DeploymentModel
from .montecarlo import CcdfCurve, Interference, SinrMode, SinrSampleSet, empirical_ccdf, run_drops

__all__ = ["SystemConfig", "load_config", "DeploymentModel", "CcdfCurve", "Interference",
           "SinrMode", "SinrSampleSet", "empirical_ccdf", "run_drops"]
__version__ = "0.1.0"
