"""Final outcomes of SIR epidemics among many communities.

A population of ``m + 1`` communities of ``n`` individuals is infected by
within-community contacts at per-pair rate ``beta_W`` and population-wide
contacts at per-pair rate ``beta_G``. The package provides exact final-outcome
simulators, the limiting quantities and approximating laws that describe them
for large ``n`` and ``m``, and tools to compare the two.
"""
from .analytic import LimitQuantities, limit_quantities, p_rf
from .periods import Constant, Exponential, Gamma, InfectiousPeriod, parse_period
from .reedfrost import rf_pmf, rf_sample
from .sim import ModelParams, Outcome, run_external, run_multi, run_single

__version__ = "0.1.0"

__all__ = [
    "Constant",
    "Exponential",
    "Gamma",
    "InfectiousPeriod",
    "LimitQuantities",
    "ModelParams",
    "Outcome",
    "limit_quantities",
    "p_rf",
    "parse_period",
    "rf_pmf",
    "rf_sample",
    "run_external",
    "run_multi",
    "run_single",
]
