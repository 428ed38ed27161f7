"""Sweeps over the value of statistical life.

Each record pairs the optimised policy with the uncontrolled (``l = 0``)
baseline and a no-epidemic economy reference for the same scenario.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .integrator import ControlPolicy, simulate
from .model import ScenarioParams, no_epidemic, require_valid
from .objective import CostBreakdown, evaluate
from .optimizer import OptimizationResult, OptimizerOptions, optimize

log = logging.getLogger(__name__)


class DegenerateReferenceError(ZeroDivisionError):
    pass


def default_c1_grid(c1: float, points: int = 9, decades: float = 1.0) -> list[float]:
    """Log-spaced grid from ``c1 / 10**decades`` to ``c1 * 10**decades``.

    With an odd number of points the middle entry is ``c1`` exactly.
    """
    exps = np.linspace(-decades, decades, points)
    return [float(c1 * 10.0**e) for e in exps]


@dataclass(frozen=True)
class SweepSpec:
    scenario: ScenarioParams
    c1_values: tuple[float, ...]
    optimizer: OptimizerOptions = OptimizerOptions()

    def __post_init__(self):
        values = tuple(float(c) for c in self.c1_values)
        if not values:
            raise ValueError("c1_values must not be empty")
        if any(not np.isfinite(c) or c < 0 for c in values):
            raise ValueError(f"c1 values must be finite and >= 0, got {values}")
        object.__setattr__(self, "c1_values", values)


@dataclass(frozen=True, eq=False)
class SweepRecord:
    c1: float
    optimal: OptimizationResult | None
    uncontrolled: CostBreakdown
    deaths_opt: float
    deaths_unc: float
    infected_opt: float
    infected_unc: float
    economy_opt: float
    economy_unc: float
    economy_ref: float
    mean_lockdown: float
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.optimal is None

    @property
    def converged(self) -> bool:
        return self.optimal is not None and self.optimal.converged


def no_epidemic_economy(params: ScenarioParams) -> float:
    """Terminal economy value with no infection and no lockdown."""
    ref = no_epidemic(params)
    return simulate(ControlPolicy.constant(0.0, ref), ref).final.G


def _run_one(scenario: ScenarioParams, c1: float, opts: OptimizerOptions, economy_ref: float) -> SweepRecord:
    params = scenario.with_cost(c1=c1)
    base = simulate(ControlPolicy.constant(0.0, params), params)
    unc = evaluate(base, params.cost)
    fb = base.final
    nan = float("nan")
    try:
        result = optimize(params, opts)
    except Exception as exc:  # noqa: BLE001 - recorded, sweep continues
        log.warning("c1=%g failed: %s", c1, exc)
        return SweepRecord(
            c1=c1, optimal=None, uncontrolled=unc,
            deaths_opt=nan, deaths_unc=fb.D, infected_opt=nan, infected_unc=fb.R + fb.I,
            economy_opt=nan, economy_unc=fb.G, economy_ref=economy_ref,
            mean_lockdown=nan, error=f"{type(exc).__name__}: {exc}",
        )
    fo = simulate(result.policy, params).final
    return SweepRecord(
        c1=c1,
        optimal=result,
        uncontrolled=unc,
        deaths_opt=fo.D,
        deaths_unc=fb.D,
        infected_opt=fo.R + fo.I,
        infected_unc=fb.R + fb.I,
        economy_opt=fo.G,
        economy_unc=fb.G,
        economy_ref=economy_ref,
        mean_lockdown=result.policy.mean(),
    )


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """Optimise once per ``c1`` value; records come back in input order.

    ``workers > 1`` spreads the grid over processes.  Each record is a pure
    function of its inputs, so the result does not depend on scheduling.
    """
    require_valid(spec.scenario)
    economy_ref = no_epidemic_economy(spec.scenario)
    args = [(spec.scenario, c1, spec.optimizer, economy_ref) for c1 in spec.c1_values]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, *zip(*args)))
    return [_run_one(*a) for a in args]


def economic_loss_fraction(record: SweepRecord) -> float:
    """Shortfall of the optimised economy against the no-epidemic reference, as a fraction."""
    if record.economy_ref == 0:
        raise DegenerateReferenceError("no-epidemic reference economy is zero")
    return (record.economy_ref - record.economy_opt) / abs(record.economy_ref)
