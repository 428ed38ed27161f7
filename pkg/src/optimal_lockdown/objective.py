"""Terminal cost: deaths and infections priced in, minus the economy value."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrator import ControlPolicy, Trajectory, simulate
from .model import CostParams, ScenarioParams


class EmptyTrajectoryError(ValueError):
    pass


@dataclass(frozen=True)
class CostBreakdown:
    death_cost: float
    infection_cost: float
    economy_value: float
    total: float

    @classmethod
    def from_terminal(cls, D: float, I: float, R: float, G: float, cost: CostParams) -> CostBreakdown:
        death = cost.c1 * D
        infection = cost.c2 * (R + I)
        return cls(float(death), float(infection), float(G), float(death + infection - G))


def terminal_cost(final_states: np.ndarray, cost: CostParams) -> np.ndarray:
    """Vectorised total cost for terminal states shaped ``(5, m)``.

    Uses the same operation order as :meth:`CostBreakdown.from_terminal`, so
    both paths agree bit for bit.
    """
    _, I, R, D, G = final_states
    return cost.c1 * D + cost.c2 * (R + I) - G


def evaluate(trajectory: Trajectory, cost: CostParams) -> CostBreakdown:
    if len(trajectory) == 0:
        raise EmptyTrajectoryError("cannot evaluate an empty trajectory")
    final = trajectory.final
    return CostBreakdown.from_terminal(final.D, final.I, final.R, final.G, cost)


def objective_of_policy(policy: ControlPolicy, params: ScenarioParams) -> CostBreakdown:
    return evaluate(simulate(policy, params), params.cost)
