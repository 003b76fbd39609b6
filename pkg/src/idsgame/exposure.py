"""Social states, risk exposure and per-action costs.

Most functions here come in two flavours: a public one taking a
:class:`SocialState`, and a private array version taking only the protected
masses ``xp`` (exposure does not depend on how unprotected mass splits
between N and I). The array versions broadcast over leading batch axes,
which the solvers and brute-force oracles rely on.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

from .model import DegreeDistribution, InvalidParameters, ModelParams

STATE_TOL = 1e-10
LAMBDA_ONE_TOL = 1e-12


class Action(IntEnum):
    P = 0  # protect
    N = 1  # no action
    I = 2  # insure  # noqa: E741


class SocialState:
    """Masses ``x[d-1, a]`` of population ``d`` playing action ``a``."""

    __slots__ = ("dist", "_x")

    def __init__(self, dist: DegreeDistribution, x):
        x = np.array(x, dtype=float)
        if x.shape != (dist.d_max, 3):
            raise InvalidParameters(f"state must have shape ({dist.d_max}, 3), got {x.shape}")
        if np.any(x < -STATE_TOL):
            raise InvalidParameters("state masses must be nonnegative")
        x = np.maximum(x, 0.0)
        scale = max(1.0, dist.total)
        if np.any(np.abs(x.sum(axis=1) - dist.m) > STATE_TOL * scale):
            raise InvalidParameters("state rows must sum to the population masses")
        x.setflags(write=False)
        self.dist = dist
        self._x = x

    @classmethod
    def from_protected(cls, dist: DegreeDistribution, xp, insured=None) -> "SocialState":
        """Build a state from protected masses; the rest plays N, or I where
        ``insured`` (boolean per degree) is set."""
        xp = np.clip(np.asarray(xp, dtype=float), 0.0, dist.m)
        rest = dist.m - xp
        ins = np.zeros(dist.d_max, bool) if insured is None else np.asarray(insured, bool)
        x = np.column_stack([xp, np.where(ins, 0.0, rest), np.where(ins, rest, 0.0)])
        return cls(dist, x)

    @classmethod
    def unprotected(cls, dist: DegreeDistribution) -> "SocialState":
        return cls.from_protected(dist, np.zeros(dist.d_max))

    @classmethod
    def fully_protected(cls, dist: DegreeDistribution) -> "SocialState":
        return cls.from_protected(dist, dist.m)

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def protected(self) -> np.ndarray:
        return self._x[:, Action.P]

    @property
    def insured(self) -> np.ndarray:
        return self._x[:, Action.I]

    def shares(self) -> np.ndarray:
        """Fractions ``g_{d,a}``; zero rows where ``m_d = 0``."""
        m = self.dist.m[:, None]
        return np.divide(self._x, m, out=np.zeros_like(self._x), where=m > 0)

    def scaled(self, phi: float) -> "SocialState":
        return SocialState(self.dist.scaled(phi), self._x * phi)

    def __repr__(self):
        return (
            f"SocialState(d_max={self.dist.d_max}, protected={self.protected.sum():.6g}, "
            f"insured={self.insured.sum():.6g})"
        )


def _dm_sum(dist: DegreeDistribution) -> float:
    # sum_d d m_d == d_avg * sum_d m_d
    return float(dist.degrees @ dist.m)


def _vulnerable_sum(dist, xp, params: ModelParams, weights):
    # weighting protected and unprotected mass separately keeps a fully
    # protected population with p_P = 0 at exactly zero
    return params.p_u * ((dist.m - xp) @ weights) + params.p_p * (xp @ weights)


def _gamma(dist, xp, params: ModelParams):
    d = dist.degrees
    return params.beta_ia * _vulnerable_sum(dist, xp, params, d) / _dm_sum(dist)


def _lambda(dist, xp, params: ModelParams):
    d = dist.degrees
    return params.beta_ia * _vulnerable_sum(dist, xp, params, d * (d - 1.0)) / _dm_sum(dist)


def _geometric_terms(lam, k: int):
    """``sum_{j<k} lam**j`` by Horner; exact ``k`` at ``lam == 1``."""
    lam = np.asarray(lam, dtype=float)
    acc = np.ones_like(lam)
    for _ in range(k - 1):
        acc = 1.0 + lam * acc
    return np.where(np.abs(lam - 1.0) <= LAMBDA_ONE_TOL, float(k), acc)


def _exposure(dist, xp, params: ModelParams):
    return _gamma(dist, xp, params) * _geometric_terms(_lambda(dist, xp, params), params.k)


def _costs_from_exposure(dist, e, params: ModelParams):
    """Cost array of shape ``(..., d_max, 3)`` for exposure(s) ``e``."""
    e = np.asarray(e, dtype=float)[..., None]
    hits = params.tau_da * (1.0 + dist.degrees * e)
    c_p = hits * params.l_p + params.c_p
    c_n = hits * params.l_u
    ins = np.minimum(params.cov_max, params.xi_cov * np.maximum(c_n - params.ded, 0.0))
    c_i = c_n + params.c_i - ins
    return np.stack([c_p, c_n, c_i], axis=-1)


def transmission_prob(state: SocialState, params: ModelParams) -> float:
    """Probability a neighbor relays an attack it received (γ).

    Equals ``beta_ia`` times the chance that a randomly chosen neighbor is
    vulnerable.
    """
    return float(_gamma(state.dist, state.protected, params))


def relay_factor(state: SocialState, params: ModelParams) -> float:
    """Mean number of onward indirect attacks per relayed one (λ); may exceed 1."""
    return float(_lambda(state.dist, state.protected, params))


def exposure_terms(state: SocialState, params: ModelParams) -> np.ndarray:
    """Per-hop contributions ``γ λ**(k-1)``, ``k = 1..K``."""
    g = transmission_prob(state, params)
    lam = relay_factor(state, params)
    return g * lam ** np.arange(params.k, dtype=float)


def exposure(state: SocialState, params: ModelParams) -> float:
    """Expected indirect attacks through one neighbor when everyone is hit."""
    return float(_exposure(state.dist, state.protected, params))


def _check_degree(dist: DegreeDistribution, d: int) -> int:
    if int(d) != d or not 1 <= d <= dist.d_max:
        raise InvalidParameters(f"degree {d} outside 1..{dist.d_max}")
    return int(d)


def cost_matrix(state: SocialState, params: ModelParams) -> np.ndarray:
    """All costs ``C[d-1, a]`` at ``state``."""
    return _costs_from_exposure(state.dist, exposure(state, params), params)


def cost(state: SocialState, params: ModelParams, d: int, a: Action) -> float:
    d = _check_degree(state.dist, d)
    return float(cost_matrix(state, params)[d - 1, Action(a)])


def insurance_payout(state: SocialState, params: ModelParams, d: int) -> float:
    d = _check_degree(state.dist, d)
    c_n = cost(state, params, d, Action.N)
    return float(min(params.cov_max, params.xi_cov * max(c_n - params.ded, 0.0)))
