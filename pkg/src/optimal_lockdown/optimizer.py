"""Direct transcription of the lockdown problem.

The control is one lockdown value per integration step, so the problem is
a box-constrained minimisation over ``n_steps`` variables.  It is solved by
projected gradient descent with an Armijo backtracking line search,
finite-difference gradients and several constant starting policies.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .integrator import ControlPolicy, simulate_batch
from .model import ScenarioParams, require_valid
from .objective import CostBreakdown, terminal_cost

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LineSearch:
    initial_step: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    max_backtracks: int = 60


@dataclass(frozen=True)
class OptimizerOptions:
    """Settings for :func:`optimize`.

    ``starts=None`` means the constant policies ``0``, ``l_max / 2`` and
    ``l_max``.  With ``spectral_steps`` the trial step after the first
    iteration is the Barzilai-Borwein length ``s.s / s.y`` instead of the
    normalised ``initial_step``; the Armijo test is applied either way.
    """

    max_iterations: int = 500
    tol_rel: float = 1e-8
    fd_step: float = 1e-4
    starts: tuple[float, ...] | None = None
    line_search: LineSearch = field(default_factory=LineSearch)
    spectral_steps: bool = True

    def start_levels(self, l_max: float) -> tuple[float, ...]:
        if self.starts is None:
            return (0.0, l_max / 2.0, l_max)
        return tuple(float(s) for s in self.starts)

    def check(self, l_max: float) -> None:
        problems = []
        if self.max_iterations < 1:
            problems.append("max_iterations must be >= 1")
        if not self.tol_rel > 0:
            problems.append("tol_rel must be > 0")
        if not self.fd_step > 0:
            problems.append("fd_step must be > 0")
        ls = self.line_search
        if not (ls.initial_step > 0 and 0 < ls.shrink < 1 and 0 < ls.armijo < 1 and ls.max_backtracks >= 1):
            problems.append("line search needs initial_step > 0, shrink and armijo in (0, 1), max_backtracks >= 1")
        levels = self.start_levels(l_max)
        if not levels:
            problems.append("at least one start is required")
        bad = [s for s in levels if not 0 <= s <= l_max]
        if bad:
            problems.append(f"starts must lie in [0, {l_max}], got {bad}")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True, eq=False)
class StartRun:
    start: float
    values: np.ndarray
    total: float
    iterations: int
    converged: bool
    gradient_norm: float
    history: tuple[float, ...]
    stop_reason: str


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    policy: ControlPolicy
    cost: CostBreakdown
    iterations: tuple[int, ...]
    start_used: float
    converged: bool
    gradient_norm: float
    runs: tuple[StartRun, ...] = ()


def project(values, l_max: float) -> np.ndarray:
    return np.clip(np.asarray(values, dtype=float), 0.0, l_max)


def _gradient_values(x: np.ndarray, params: ScenarioParams, h: float) -> np.ndarray:
    n = x.size
    l_max = params.epidemic.l_max
    up = np.minimum(x + h, l_max)
    down = np.maximum(x - h, 0.0)
    controls = np.repeat(x[:, None], 2 * n, axis=1)
    idx = np.arange(n)
    controls[idx, idx] = up
    controls[idx, n + idx] = down
    totals = terminal_cost(simulate_batch(controls, params), params.cost)
    width = up - down
    # a zero width only happens when l_max < h/2 and l sits on both bounds
    width = np.where(width > 0, width, 1.0)
    return (totals[:n] - totals[n:]) / width


def gradient(policy: ControlPolicy, params: ScenarioParams, fd_step: float = 1e-4) -> np.ndarray:
    """Finite-difference gradient of the total cost with respect to each step's lockdown.

    Central differences in the interior; where ``l +/- fd_step`` would leave
    ``[0, l_max]`` that side is pinned to the bound, which gives one-sided
    differences at active bounds.  All ``2 n`` perturbed policies are
    integrated together.
    """
    return _gradient_values(np.asarray(policy.values, dtype=float), params, fd_step)


def projected_gradient_norm(x: np.ndarray, g: np.ndarray, l_max: float) -> float:
    free = ~(((x <= 0.0) & (g > 0)) | ((x >= l_max) & (g < 0)))
    return float(np.linalg.norm(np.where(free, g, 0.0)))


def _cost_of(x: np.ndarray, params: ScenarioParams) -> float:
    return float(terminal_cost(simulate_batch(x[:, None], params), params.cost)[0])


def _descend(params: ScenarioParams, start: float, opts: OptimizerOptions) -> StartRun:
    l_max = params.epidemic.l_max
    ls = opts.line_search
    x = np.full(params.n_steps, float(start))
    f = _cost_of(x, params)
    g = _gradient_values(x, params, opts.fd_step)
    history = [f]
    gnorm = float(np.linalg.norm(g))
    step = ls.initial_step / gnorm if gnorm > 0 else ls.initial_step
    converged = False
    reason = "max_iterations"
    iterations = 0

    for it in range(1, opts.max_iterations + 1):
        iterations = it
        t = step
        for _ in range(ls.max_backtracks):
            x_new = project(x - t * g, l_max)
            f_new = _cost_of(x_new, params)
            if f_new <= f + ls.armijo * float(g @ (x_new - x)):
                break
            t *= ls.shrink
        else:
            converged, reason = True, "line search stalled"
            iterations = it - 1
            break

        rel = (f - f_new) / max(abs(f), np.finfo(float).tiny)
        g_new = _gradient_values(x_new, params, opts.fd_step)
        s = x_new - x
        y = g_new - g
        x, f, g = x_new, f_new, g_new
        history.append(f)
        if rel < opts.tol_rel:
            converged, reason = True, "relative improvement below tolerance"
            break

        sy = float(s @ y)
        if opts.spectral_steps and sy > 0:
            step = float(s @ s) / sy
        else:
            gnorm = float(np.linalg.norm(g))
            step = ls.initial_step / gnorm if gnorm > 0 else ls.initial_step

    log.debug("start %.4g: J=%.10g after %d iterations (%s)", start, f, iterations, reason)
    return StartRun(
        start=float(start),
        values=x,
        total=f,
        iterations=iterations,
        converged=converged,
        gradient_norm=projected_gradient_norm(x, g, l_max),
        history=tuple(history),
        stop_reason=reason,
    )


def _better(a: StartRun, b: StartRun) -> bool:
    """True if run ``a`` beats ``b``: lower cost, ties go to the lighter lockdown."""
    scale = max(abs(a.total), abs(b.total), 1.0)
    if abs(a.total - b.total) <= 1e-12 * scale:
        return a.values.mean() < b.values.mean()
    return a.total < b.total


def optimize(params: ScenarioParams, opts: OptimizerOptions | None = None) -> OptimizationResult:
    opts = opts or OptimizerOptions()
    require_valid(params)
    opts.check(params.epidemic.l_max)

    runs = tuple(_descend(params, s, opts) for s in opts.start_levels(params.epidemic.l_max))
    best = runs[0]
    for run in runs[1:]:
        if _better(run, best):
            best = run

    policy = ControlPolicy.for_scenario(best.values, params)
    final = simulate_batch(best.values[:, None], params)[:, 0]
    _, I, R, D, G = final
    return OptimizationResult(
        policy=policy,
        cost=CostBreakdown.from_terminal(D, I, R, G, params.cost),
        iterations=tuple(r.iterations for r in runs),
        start_used=best.start,
        converged=best.converged,
        gradient_norm=best.gradient_norm,
        runs=runs,
    )
