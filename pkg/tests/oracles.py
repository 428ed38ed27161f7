"""Plain-float reference implementations kept separate from the package code."""

import math


def rhs(x, l, p):
    S, I, R, D, G = x
    ep, ec = p.epidemic, p.economic
    N = S + I + R
    beta = ep.beta0 * ep.k0 * (1 - l)
    growth = ep.mu * (1 - N / ep.K)
    new = beta * S * I / N
    nei = ec.alpha * N * ep.k0 * ec.a1 * math.sin(math.pi * (S + R) * ep.k0 * (1 - l) / (2 * N * ep.k0))
    return [
        growth * S - new,
        growth * I + new - (ep.gamma + ep.delta) * I,
        growth * R + ep.gamma * I,
        ep.delta * I,
        ec.m1 * nei - ec.m2 * N,
    ]


def euler(x, l, p, t_end, h):
    x = list(x)
    steps = round(t_end / h)
    for _ in range(steps):
        d = rhs(x, l, p)
        x = [a + h * b for a, b in zip(x, d)]
    return x


def final_cost(row, c1, c2):
    """Cost recomputed by hand from a final (S, I, R, D, G) row."""
    S, I, R, D, G = row
    return c1 * D + c2 * (R + I) - G
