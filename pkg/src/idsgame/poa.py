"""Price of anarchy and its closed-form upper bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumResult, solve_ne
from .model import DegreeDistribution, ModelParams
from .optimum import OptimumResult, social_cost_of_state, solve_opt

SC_FLOOR = 1e-12


@dataclass
class PoaReport:
    sc_ne: float
    sc_opt: float
    ratio: float
    bound: float
    bound_applicable: bool
    ne: EquilibriumResult | None = None
    opt: OptimumResult | None = None


def e_max(params: ModelParams, dist: DegreeDistribution) -> float:
    """Exposure when nobody protects, the largest any state can produce."""
    d = dist.degrees
    f = dist.f
    d_avg = float(d @ f)
    q = params.beta_ia * params.p_u
    ratio = q / d_avg * float((d * (d - 1.0)) @ f)
    # ratio**0 == 1 even when ratio == 0
    return q * float(sum(ratio**j for j in range(params.k)))


def poa_bound(params: ModelParams, dist: DegreeDistribution) -> float:
    return 1.0 + dist.d_avg * e_max(params, dist)


def bound_applies(params: ModelParams) -> bool:
    return params.c_p >= params.delta_l * params.tau_da


def poa(params: ModelParams, dist: DegreeDistribution,
        ne: EquilibriumResult | None = None, opt: OptimumResult | None = None) -> PoaReport:
    """Ratio of equilibrium to optimal social cost.

    All equilibria share one protected profile and hence one social cost, so
    this is also the price of stability.
    """
    ne = ne or solve_ne(params, dist)
    opt = opt or solve_opt(params, dist)
    sc_ne = social_cost_of_state(ne.state, params)
    sc_opt = opt.social_cost
    ratio = sc_ne / sc_opt if sc_opt > SC_FLOOR else np.inf
    return PoaReport(sc_ne, sc_opt, ratio, poa_bound(params, dist), bound_applies(params), ne, opt)
