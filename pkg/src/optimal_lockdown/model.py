"""Parameter containers and the calibrated country presets.

All economy figures are totals over the modelled population (not per
capita).  ``G0`` for a preset is per-capita GDP times the initial
population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

CARRYING_CAPACITY = 50_000.0
INITIAL_POPULATION = 50_000.0
INITIAL_INFECTED = 500.0
HORIZON = 366.0
STEP = 3.0
MAX_LOCKDOWN = 0.75


@dataclass(frozen=True)
class EpidemicParams:
    mu: float
    K: float
    beta0: float
    k0: float
    gamma: float
    delta: float
    l_max: float

    @property
    def beta(self) -> float:
        """Uncontrolled spreading rate ``beta0 * k0``."""
        return self.beta0 * self.k0


@dataclass(frozen=True)
class EconomicParams:
    alpha: float
    a1: float
    m1: float
    m2: float
    G0: float


@dataclass(frozen=True)
class CostParams:
    c1: float
    c2: float


class SystemState(NamedTuple):
    """Susceptible, infected, recovered, dead and economy value.

    Fields may hold scalars or equally shaped numpy arrays (a batch of
    states); all dynamics functions accept either.
    """

    S: float
    I: float
    R: float
    D: float
    G: float

    @property
    def N(self):
        return self.S + self.I + self.R


@dataclass(frozen=True)
class ScenarioParams:
    epidemic: EpidemicParams
    economic: EconomicParams
    cost: CostParams
    initial_state: SystemState
    horizon: float = HORIZON
    dt: float = STEP
    name: str = ""

    @property
    def n_steps(self) -> int:
        # guard against 366/3 landing a hair above an integer
        return max(1, math.ceil(self.horizon / self.dt - 1e-9))

    def with_cost(self, c1: float | None = None, c2: float | None = None) -> ScenarioParams:
        cost = CostParams(
            c1=self.cost.c1 if c1 is None else float(c1),
            c2=self.cost.c2 if c2 is None else float(c2),
        )
        return replace(self, cost=cost)


class Violation(NamedTuple):
    field: str
    value: object
    reason: str

    def __str__(self) -> str:
        return f"{self.field}={self.value!r}: {self.reason}"


_COMMON = dict(
    K=CARRYING_CAPACITY,
    beta0=0.015,
    k0=22.0,
    gamma=0.1,
    delta=0.004,
    l_max=MAX_LOCKDOWN,
)

# per country: GDP per capita, alpha, mu, m1, m2, c1, c2
_COUNTRY_TABLE = {
    "burundi": (261.0, 0.992, 0.000171, 0.043015, 0.55, 467.0, 26.7),
    "india": (2101.0, 0.9473, -0.000383, 0.2665, 3.1, 30_000.0, 500.0),
    "us": (65_000.0, 0.9633, 0.002893, 13.91, 173.0, 350_000.0, 20_000.0),
}

_DISPLAY_NAMES = {"burundi": "Burundi", "india": "India", "us": "US"}

COUNTRIES = tuple(_COUNTRY_TABLE)


def preset(country: str) -> ScenarioParams:
    """Return the calibrated scenario for ``"burundi"``, ``"india"`` or ``"us"``.

    Matching is case-insensitive; ``"united states"`` and ``"usa"`` are
    accepted as aliases for ``"us"``.
    """
    key = country.strip().lower()
    key = {"usa": "us", "united states": "us", "united_states": "us"}.get(key, key)
    if key not in _COUNTRY_TABLE:
        raise KeyError(f"unknown preset {country!r}; expected one of {', '.join(COUNTRIES)}")
    gdp, alpha, mu, m1, m2, c1, c2 = _COUNTRY_TABLE[key]
    s0 = INITIAL_POPULATION - INITIAL_INFECTED
    return ScenarioParams(
        epidemic=EpidemicParams(mu=mu, **_COMMON),
        economic=EconomicParams(alpha=alpha, a1=0.6, m1=m1, m2=m2, G0=gdp * INITIAL_POPULATION),
        cost=CostParams(c1=c1, c2=c2),
        initial_state=SystemState(S=s0, I=INITIAL_INFECTED, R=0.0, D=0.0, G=gdp * INITIAL_POPULATION),
        horizon=HORIZON,
        dt=STEP,
        name=_DISPLAY_NAMES[key],
    )


def no_epidemic(params: ScenarioParams) -> ScenarioParams:
    """Counterfactual with the initial infected moved back to susceptible.

    The living population is unchanged, so any drift comes from migration
    alone.
    """
    s = params.initial_state
    return replace(params, initial_state=s._replace(S=s.S + s.I, I=0.0))


class InvalidScenarioError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("invalid scenario: " + "; ".join(map(str, self.violations)))


def require_valid(params: ScenarioParams) -> ScenarioParams:
    violations = validate(params)
    if violations:
        raise InvalidScenarioError(violations)
    return params


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate(params: ScenarioParams) -> list[Violation]:
    """Collect every violated invariant. An empty list means the scenario is valid."""
    out: list[Violation] = []

    def check(name: str, value, ok: bool, reason: str) -> None:
        if not _finite(value) or not ok:
            out.append(Violation(name, value, reason if _finite(value) else "must be a finite number"))

    ep = params.epidemic
    check("epidemic.mu", ep.mu, True, "")
    check("epidemic.K", ep.K, _finite(ep.K) and ep.K > 0, "must be > 0")
    check("epidemic.beta0", ep.beta0, _finite(ep.beta0) and ep.beta0 >= 0, "must be >= 0")
    check("epidemic.k0", ep.k0, _finite(ep.k0) and ep.k0 > 0, "must be > 0")
    check("epidemic.gamma", ep.gamma, _finite(ep.gamma) and ep.gamma > 0, "must be > 0")
    check("epidemic.delta", ep.delta, _finite(ep.delta) and ep.delta >= 0, "must be >= 0")
    check("epidemic.l_max", ep.l_max, _finite(ep.l_max) and 0 <= ep.l_max < 1, "must lie in [0, 1)")

    ec = params.economic
    check("economic.alpha", ec.alpha, _finite(ec.alpha) and 0 <= ec.alpha <= 1, "must lie in [0, 1]")
    check("economic.a1", ec.a1, _finite(ec.a1) and 0 <= ec.a1 <= 1, "must lie in [0, 1]")
    check("economic.m1", ec.m1, _finite(ec.m1) and ec.m1 >= 0, "must be >= 0")
    check("economic.m2", ec.m2, _finite(ec.m2) and ec.m2 >= 0, "must be >= 0")
    check("economic.G0", ec.G0, True, "")

    check("cost.c1", params.cost.c1, _finite(params.cost.c1) and params.cost.c1 >= 0, "must be >= 0")
    check("cost.c2", params.cost.c2, _finite(params.cost.c2) and params.cost.c2 >= 0, "must be >= 0")

    st = params.initial_state
    for name in ("S", "I", "R", "D"):
        v = getattr(st, name)
        check(f"initial_state.{name}", v, _finite(v) and v >= 0, "must be >= 0")
    check("initial_state.G", st.G, True, "")
    if all(_finite(getattr(st, n)) for n in ("S", "I", "R")) and st.N <= 0:
        out.append(Violation("initial_state.N", st.N, "living population S+I+R must be > 0"))

    check("horizon", params.horizon, _finite(params.horizon) and params.horizon > 0, "must be > 0")
    check("dt", params.dt, _finite(params.dt) and params.dt > 0, "must be > 0")
    if not any(v.field in ("horizon", "dt") for v in out) and params.horizon / params.dt < 1:
        out.append(Violation("dt", params.dt, "must not exceed the horizon"))
    return out


def field_names(cls) -> list[str]:
    return [f.name for f in fields(cls)]
