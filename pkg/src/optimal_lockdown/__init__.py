"""Optimal lockdown policies for a coupled SIRD epidemic and economy model."""

from .dynamics import (
    DegenerateStateError,
    StateDerivative,
    beneficial_interactions,
    economy_rhs,
    effective_contacts,
    epidemic_rhs,
    full_rhs,
)
from .harness import SweepRecord, SweepSpec, default_c1_grid, economic_loss_fraction, run_sweep
from .integrator import ControlPolicy, SimulationError, Trajectory, rk4_step, simulate, simulate_batch
from .model import (
    COUNTRIES,
    CostParams,
    EconomicParams,
    EpidemicParams,
    InvalidScenarioError,
    ScenarioParams,
    SystemState,
    Violation,
    no_epidemic,
    preset,
    validate,
)
from .objective import CostBreakdown, evaluate, objective_of_policy
from .optimizer import LineSearch, OptimizationResult, OptimizerOptions, gradient, optimize, project

__version__ = "0.1.0"
