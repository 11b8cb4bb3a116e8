"""Goodwin growth cycle with Minsky-type debt dynamics and Keen-model variants."""
from .dynamics import (Behaviour, Constant, IntegrationConfig, LinearRamp, StepDown, StochasticAnnual,
                       Trajectory, classify_behaviour, integrate, integrate_many, standard_initialisation)
from .equilibrium import analyse_fixed_point, fixed_point, routh_hurwitz, quartic_roots
from .errors import (ConfigError, ConvergenceError, DivergentDebtError, DomainError, MinskyError,
                     NoRootError, SingularityError)
from .experiments import Scenario, catalog, get_scenario, monte_carlo, sweep
from .model import ModelParams, PhillipsCurve, SystemState, derivatives

__version__ = "0.1.0"

__all__ = [
    "Behaviour", "ConfigError", "Constant", "ConvergenceError", "DivergentDebtError", "DomainError",
    "IntegrationConfig", "LinearRamp", "MinskyError", "ModelParams", "NoRootError", "PhillipsCurve",
    "Scenario", "SingularityError", "StepDown", "StochasticAnnual", "SystemState", "Trajectory",
    "analyse_fixed_point", "catalog", "classify_behaviour", "derivatives", "fixed_point", "get_scenario",
    "integrate", "integrate_many", "monte_carlo", "quartic_roots", "routh_hurwitz",
    "standard_initialisation", "sweep",
]
