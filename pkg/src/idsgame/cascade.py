"""Infection cascades as a Galton-Watson branching process.

An infected node passes the infection to each other neighbor with
probability γ (see :func:`idsgame.exposure.transmission_prob`). The degree
of a newly infected neighbor follows ``w_in``, the neighbor-degree law
reweighted by vulnerability, which gives the offspring law ``q_N``. A
cascade is the event that the cluster grown from one seed is infinite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .exposure import SocialState, transmission_prob
from .model import ModelParams

FIXED_POINT_TOL = 1e-12
MAX_ITER = 100_000
CRITICAL_TOL = 1e-12


class DegenerateState(ValueError):
    """No infection can be transmitted (γ = 0)."""


@dataclass
class CascadeReport:
    gamma: float
    w_in: np.ndarray | None
    q_n: np.ndarray | None
    s_star: float
    mean_offspring: float
    cascade_prob: float


def _vulnerability(state: SocialState, params: ModelParams) -> np.ndarray:
    g = state.shares()
    gp = g[:, 0]
    gu = g[:, 1] + g[:, 2]
    return gp * params.p_p + gu * params.p_u


def infected_neighbor_weights(state: SocialState, params: ModelParams) -> np.ndarray:
    """Degree law of a neighbor given that it was infected through its link."""
    if transmission_prob(state, params) <= 0:
        raise DegenerateState("γ = 0: no neighbor can be infected")
    num = state.dist.w * _vulnerability(state, params)
    return num / num.sum()


def offspring_pmf(state: SocialState, params: ModelParams) -> np.ndarray:
    """``q_N(n)`` for ``n = 0..d_max-1``."""
    w_in = infected_neighbor_weights(state, params)
    g = transmission_prob(state, params)
    d_max = state.dist.d_max
    n = np.arange(d_max)
    q = np.zeros(d_max)
    for d in range(1, d_max + 1):
        if w_in[d - 1] == 0:
            continue
        k = n[:d]
        q[:d] += w_in[d - 1] * comb(d - 1, k) * g**k * (1.0 - g) ** (d - 1 - k)
    return q


def _pgf(q, s):
    # Horner on q[0] + q[1] s + ...
    acc = 0.0
    for c in q[::-1]:
        acc = acc * s + c
    return acc


def extinction_root(q_n) -> float:
    """Smallest nonnegative root of ``Q_N(s) = s``.

    Iterates ``s <- Q_N(s)`` from 0, which increases monotonically to that
    root. Subcritical and critical laws short-circuit to 1, except for the
    degenerate "always exactly one child" law, which never dies out.
    """
    q = np.asarray(q_n, dtype=float)
    mean = float(np.arange(q.size) @ q)
    if mean < 1.0 - CRITICAL_TOL:
        return 1.0
    if abs(mean - 1.0) <= CRITICAL_TOL:
        return 0.0 if q.size > 1 and abs(q[1] - 1.0) <= CRITICAL_TOL else 1.0
    s = 0.0
    for _ in range(MAX_ITER):
        nxt = _pgf(q, s)
        assert nxt >= s - 1e-15 and nxt <= 1.0 + 1e-15
        if abs(nxt - s) < FIXED_POINT_TOL:
            s = nxt
            break
        s = nxt
    return float(min(max(s, 0.0), 1.0))


def mean_offspring(state: SocialState, params: ModelParams) -> float:
    g = transmission_prob(state, params)
    if g <= 0:
        return 0.0
    w_in = infected_neighbor_weights(state, params)
    return float(w_in @ (state.dist.degrees - 1.0)) * g


def _cascade_from(state, g, s_star):
    f = state.dist.f
    base = 1.0 - g * (1.0 - s_star)
    return float(1.0 - f @ base ** state.dist.degrees)


def cascade_probability(state: SocialState, params: ModelParams) -> float:
    """Probability that one seeded infection grows without bound."""
    return cascade_report(state, params).cascade_prob


def cascade_report(state: SocialState, params: ModelParams) -> CascadeReport:
    g = transmission_prob(state, params)
    if g <= 0:
        return CascadeReport(g, None, None, 1.0, 0.0, 0.0)
    w_in = infected_neighbor_weights(state, params)
    q = offspring_pmf(state, params)
    s_star = extinction_root(q)
    p = 0.0 if s_star >= 1.0 else min(max(_cascade_from(state, g, s_star), 0.0), 1.0)
    return CascadeReport(g, w_in, q, s_star, mean_offspring(state, params), p)
