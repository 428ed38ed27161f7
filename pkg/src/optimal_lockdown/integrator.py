"""Fixed-step RK4 integration under a piecewise-constant lockdown."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DegenerateStateError, full_rhs
from .model import ScenarioParams, SystemState, require_valid

STATE_FIELDS = SystemState._fields


class SimulationError(DegenerateStateError):
    def __init__(self, step: int, cause: Exception):
        self.step = step
        super().__init__(f"simulation failed at step {step}: {cause}")


@dataclass(frozen=True, eq=False)
class ControlPolicy:
    """Lockdown strength held constant over each integration step."""

    values: np.ndarray
    dt: float
    l_max: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("policy must have at least one value")
        if not np.all(np.isfinite(v)):
            raise ValueError("policy values must be finite")
        if v.min() < 0 or v.max() > self.l_max:
            raise ValueError(f"policy values must lie in [0, {self.l_max}]; got range [{v.min()}, {v.max()}]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def constant(cls, level: float, params: ScenarioParams) -> ControlPolicy:
        return cls(np.full(params.n_steps, float(level)), params.dt, params.epidemic.l_max)

    @classmethod
    def for_scenario(cls, values, params: ScenarioParams) -> ControlPolicy:
        return cls(np.asarray(values, dtype=float), params.dt, params.epidemic.l_max)

    def mean(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States at every grid instant; ``states`` has shape ``(len(times), 5)``."""

    times: np.ndarray
    states: np.ndarray
    controls: ControlPolicy

    def __len__(self) -> int:
        return self.times.size

    def column(self, name: str) -> np.ndarray:
        if name == "N":
            return self.states[:, :3].sum(axis=1)
        return self.states[:, STATE_FIELDS.index(name)]

    @property
    def final(self) -> SystemState:
        return SystemState(*map(float, self.states[-1]))


def time_grid(params: ScenarioParams) -> np.ndarray:
    """Grid instants; the last step is shortened so the grid ends exactly at the horizon."""
    n = params.n_steps
    t = np.arange(n + 1, dtype=float) * params.dt
    t[-1] = params.horizon
    return t


def _rk4(x: np.ndarray, params: ScenarioParams, l, h: float) -> np.ndarray:
    def f(y):
        return np.array(full_rhs(SystemState(*y), params, l))

    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    # S, I, R only go negative by round-off near extinction
    out[:3] = np.maximum(out[:3], 0.0)
    return out


def rk4_step(state: SystemState, params: ScenarioParams, l: float, dt: float) -> SystemState:
    """One RK4 step with the lockdown held at ``l`` across all four stages."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = np.array(state, dtype=float)
    return SystemState(*map(float, _rk4(x, params, l, dt)))


def simulate_batch(controls: np.ndarray, params: ScenarioParams, keep_path: bool = False) -> np.ndarray:
    """Integrate many policies at once.

    ``controls`` has shape ``(n_steps, m)``, one column per policy.  Returns
    the terminal states ``(5, m)``, or the whole path ``(n_steps + 1, 5, m)``
    when ``keep_path`` is set.
    """
    controls = np.asarray(controls, dtype=float)
    if controls.ndim == 1:
        controls = controls[:, None]
    n, m = controls.shape
    if n != params.n_steps:
        raise ValueError(f"policy has {n} values but the scenario needs {params.n_steps}")
    t = time_grid(params)
    x = np.repeat(np.array(params.initial_state, dtype=float)[:, None], m, axis=1)
    path = [x] if keep_path else None
    for j in range(n):
        try:
            x = _rk4(x, params, controls[j], t[j + 1] - t[j])
        except DegenerateStateError as exc:
            raise SimulationError(j, exc) from exc
        if keep_path:
            path.append(x)
    return np.stack(path) if keep_path else x


def simulate(policy: ControlPolicy, params: ScenarioParams) -> Trajectory:
    require_valid(params)
    path = simulate_batch(policy.values, params, keep_path=True)
    return Trajectory(times=time_grid(params), states=path[:, :, 0], controls=policy)
