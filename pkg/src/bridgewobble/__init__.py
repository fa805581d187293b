"""Stability, Hopf and double-Hopf analysis of a delayed footbridge oscillator.

The normalized model is ``x'' + alpha2 x' + x = kappa tanh(k3 x'(t - tau))``.
"""

from .model import NormalizedModel, PhysicalParams, load_scenario, normalize
from .spectrum import critical_delays, stability
from .hopf import hopf_in_alpha, hopf_in_tau
from .double_hopf import find_double_hopf, unfolding
from .dde import SimConfig, simulate

__all__ = [
    "NormalizedModel",
    "PhysicalParams",
    "load_scenario",
    "normalize",
    "critical_delays",
    "stability",
    "hopf_in_tau",
    "hopf_in_alpha",
    "find_double_hopf",
    "unfolding",
    "SimConfig",
    "simulate",
]
