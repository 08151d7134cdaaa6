"""Parametric competitive online algorithms: ski rental, online knapsack,
one-way trading, online set cover, EV admission control, and learners that
pick a parameter from a phi-degraded policy class."""

from .core import (DensityBounds, InfeasibleError, InvalidInputError, KnapsackItem, OkpInstance,
                   PolicyInterval, RateInstance, RunResult, load_instance, save_instance)
from .okp import ThresholdCurve, okp_df, okp_phi_class, okp_run
from .osc import osc_df, osc_phi_class, osc_run
from .ski import ski_df, ski_phi_class

__version__ = "0.1.0"

__all__ = [
    "DensityBounds", "InfeasibleError", "InvalidInputError", "KnapsackItem", "OkpInstance",
    "PolicyInterval", "RateInstance", "RunResult", "ThresholdCurve", "load_instance",
    "okp_df", "okp_phi_class", "okp_run", "osc_df", "osc_phi_class", "osc_run",
    "save_instance", "ski_df", "ski_phi_class",
]
