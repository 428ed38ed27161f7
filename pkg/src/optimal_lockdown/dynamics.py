"""Right-hand sides of the coupled epidemic and economy equations.

Every function accepts either scalar states or a :class:`SystemState` whose
fields are numpy arrays of a common shape, in which case ``l`` may be an
array of the same shape.  States are never clamped here.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .model import EconomicParams, EpidemicParams, ScenarioParams, SystemState


class DegenerateStateError(ArithmeticError):
    """Raised when the living population S + I + R is not positive."""


class StateDerivative(NamedTuple):
    dS: float
    dI: float
    dR: float
    dD: float
    dG: float


def _living(state: SystemState):
    n = state.S + state.I + state.R
    if np.any(np.asarray(n) <= 0):
        raise DegenerateStateError(f"living population must be positive, got N={n!r}")
    return n


def effective_contacts(l, k0):
    return k0 * (1.0 - l)


def epidemic_rhs(state: SystemState, p: EpidemicParams, l):
    """Return ``(dS, dI, dR, dD)`` under lockdown strength ``l``."""
    S, I, R = state.S, state.I, state.R
    N = _living(state)
    beta = p.beta0 * effective_contacts(l, p.k0)
    infection = beta * S * I / N
    crowd = p.mu * N / p.K
    dS = p.mu * S - infection - crowd * S
    dI = p.mu * I + infection - (p.gamma + p.delta) * I - crowd * I
    dR = p.mu * R + p.gamma * I - crowd * R
    dD = p.delta * I
    return dS, dI, dR, dD


def beneficial_interactions(state: SystemState, ep: EpidemicParams, ec: EconomicParams, l):
    """Economically beneficial interactions per day.

    The sine argument is written with the ``k0`` ratio already cancelled.
    Only susceptible and recovered people take part in value-generating
    contacts.
    """
    N = _living(state)
    arg = np.pi * (state.S + state.R) * (1.0 - l) / (2.0 * N)
    return ec.alpha * N * ep.k0 * ec.a1 * np.sin(arg)


def economy_rhs(state: SystemState, ep: EpidemicParams, ec: EconomicParams, l):
    """Rate of change of the economy value: production minus consumption."""
    N = _living(state)
    return ec.m1 * beneficial_interactions(state, ep, ec, l) - ec.m2 * N


def full_rhs(state: SystemState, params: ScenarioParams, l) -> StateDerivative:
    dS, dI, dR, dD = epidemic_rhs(state, params.epidemic, l)
    dG = economy_rhs(state, params.epidemic, params.economic, l)
    return StateDerivative(dS, dI, dR, dD, dG)
