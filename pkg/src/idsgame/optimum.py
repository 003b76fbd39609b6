"""Social optimum: the planner picks protected masses, everyone else plays N."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import ThresholdProfile
from .exposure import Action, SocialState, _exposure, _gamma, _lambda, cost_matrix
from .model import DegreeDistribution, InvalidParameters, ModelParams

GRID_POINTS = 64
DERIV_TOL = 1e-6
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class OptimumError(RuntimeError):
    """The optimality certificate failed."""


@dataclass
class SpAction:
    """Protected mass ``y[d-1]`` per degree, ``0 <= y_d <= m_d``."""

    dist: DegreeDistribution
    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.shape != (self.dist.d_max,):
            raise InvalidParameters(f"y must have length {self.dist.d_max}")
        slack = 1e-12 * max(1.0, self.dist.total)
        if np.any(y < -slack) or np.any(y > self.dist.m + slack):
            raise InvalidParameters("y must lie in the box [0, m]")
        self.y = np.clip(y, 0.0, self.dist.m)

    def to_state(self) -> SocialState:
        return SocialState.from_protected(self.dist, self.y)


@dataclass
class OptimumResult:
    action: SpAction
    social_cost: float
    d_dagger: int
    profile: ThresholdProfile

    @property
    def y(self) -> np.ndarray:
        return self.action.y

    @property
    def protected_mass(self) -> float:
        return float(self.action.y.sum())


def _social_cost(dist, y, params):
    # broadcasts over leading axes of y
    e = _exposure(dist, y, params)
    d = dist.degrees
    weighted = y * params.l_p + (dist.m - y) * params.l_u
    attacks = weighted.sum(axis=-1) + e * (weighted @ d)
    return params.tau_da * attacks + params.c_p * y.sum(axis=-1)


def social_cost(y: SpAction, params: ModelParams, dist: DegreeDistribution | None = None) -> float:
    """``sum_d y_d C_{d,P} + (m_d - y_d) C_{d,N}`` at the state induced by ``y``."""
    dist = dist or y.dist
    return float(_social_cost(dist, y.y, params))


def social_cost_of_state(state: SocialState, params: ModelParams) -> float:
    """Social cost of an arbitrary state, insurer's net cost included.

    Insurance only moves money between players and insurer, so this agrees
    with :func:`social_cost` of the protected masses.
    """
    c = cost_matrix(state, params)
    players = float((state.x * c).sum())
    ins = c[:, Action.N] + params.c_i - c[:, Action.I]
    insurer = float(state.insured @ (ins - params.c_i))
    return players + insurer


def _exposure_gradient(dist, y, params, d: int) -> float:
    dm_sum = float(dist.degrees @ dist.m)
    g = float(_gamma(dist, y, params))
    lam = float(_lambda(dist, y, params))
    k = params.k
    powers = lam ** np.arange(k, dtype=float)
    series = powers.sum()
    dseries = float(np.arange(1, k) @ powers[: k - 1]) if k > 1 else 0.0
    return -(params.beta_ia * params.delta_p * d / dm_sum) * (series + g * (d - 1) * dseries)


def social_cost_derivative(y: SpAction, params: ModelParams, d: int,
                           direction: str = "up", dist: DegreeDistribution | None = None) -> float:
    """One-sided partial derivative of the social cost in ``y_d``.

    ``direction="up"`` needs room above ``y_d``, ``"down"`` room below it.
    The social cost is a polynomial in ``y``, so both sides agree wherever
    both exist.
    """
    dist = dist or y.dist
    if int(d) != d or not 1 <= d <= dist.d_max:
        raise InvalidParameters(f"degree {d} outside 1..{dist.d_max}")
    d = int(d)
    yd, md = y.y[d - 1], dist.m[d - 1]
    if direction == "up":
        if not yd < md:
            raise InvalidParameters(f"no room to increase y_{d}")
    elif direction == "down":
        if not yd > 0:
            raise InvalidParameters(f"no room to decrease y_{d}")
    else:
        raise InvalidParameters(f"direction must be 'up' or 'down', got {direction!r}")
    e = float(_exposure(dist, y.y, params))
    de = _exposure_gradient(dist, y.y, params, d)
    weighted = y.y * params.l_p + (dist.m - y.y) * params.l_u
    return (
        params.c_p
        - params.tau_da * (1.0 + d * e) * params.delta_l
        + params.tau_da * float(weighted @ dist.degrees) * de
    )


def _slice(dist, ds):
    base = ThresholdProfile(ds, 0.0).protected(dist)
    return base, dist.m[ds - 1]


def _golden(f, lo, hi, iters=80):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a <= 1e-15 * max(1.0, abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (a, b)


def _minimize_slice(dist, params, ds, grid=GRID_POINTS):
    """Best ``t`` in ``[0, m_ds]`` with everything above ``ds`` protected."""
    base, md = _slice(dist, ds)
    ts = np.linspace(0.0, md, grid + 1)
    ys = np.tile(base, (ts.size, 1))
    ys[:, ds - 1] = ts
    sc = _social_cost(dist, ys, params)
    j = int(np.argmin(sc))
    best_t, best_sc = float(ts[j]), float(sc[j])

    def f(t):
        y = base.copy()
        y[ds - 1] = t
        return float(_social_cost(dist, y, params))

    lo, hi = ts[max(j - 1, 0)], ts[min(j + 1, grid)]
    a, b = _golden(f, lo, hi)

    def slope(t):
        y = base.copy()
        y[ds - 1] = t
        return social_cost_derivative(SpAction(dist, y), params, ds, "up" if t < md else "down")

    # polish the interior stationary point on the analytic derivative
    if 0.0 < a and b < md and slope(lo) < 0 < slope(hi):
        lo_, hi_ = lo, hi
        for _ in range(200):
            mid = 0.5 * (lo_ + hi_)
            if mid <= lo_ or mid >= hi_:
                break
            if slope(mid) < 0:
                lo_ = mid
            else:
                hi_ = mid
        cand = 0.5 * (lo_ + hi_)
        # near the stationary point the cost is flat to rounding, so the
        # root of the slope wins ties against golden-section endpoints
        v = f(cand)
        polished = v <= min(best_sc, f(a), f(b)) + 1e-13 * abs(v)
        if polished:
            best_t, best_sc = float(cand), v
    else:
        cand, polished = 0.5 * (a + b), False
    if not polished:
        for t in (cand, a, b):
            v = f(t)
            if v < best_sc:
                best_t, best_sc = float(t), v
    # golden section cannot resolve a boundary minimum below sqrt(eps)
    snap = 1e-7 * md
    if 0.0 < best_t < snap and slope(0.0) >= 0:
        best_t, best_sc = 0.0, f(0.0)
    elif md - snap < best_t < md and slope(md) <= 0:
        best_t, best_sc = float(md), f(md)
    return best_t, best_sc


def _certificate(dist, params, y, tol):
    """Per-degree KKT residuals of ``y`` on the box; empty when optimal."""
    bad = []
    act = SpAction(dist, y)
    for d in range(1, dist.d_max + 1):
        md, yd = dist.m[d - 1], y[d - 1]
        if md <= 0:
            continue
        if yd < md:
            g = social_cost_derivative(act, params, d, "up")
            if g < -tol:
                bad.append((d, "up", g))
        if yd > 0:
            g = social_cost_derivative(act, params, d, "down")
            if g > tol:
                bad.append((d, "down", g))
    return bad


def solve_opt(params: ModelParams, dist: DegreeDistribution, tol: float = DERIV_TOL,
              grid: int = GRID_POINTS, certify: bool = True) -> OptimumResult:
    """Minimise the social cost over the threshold family.

    Each threshold slice is searched on a grid and refined by golden section
    (the slice is not known to be unimodal); the best slice wins. The result
    is then certified by sign checks on the one-sided derivatives at every
    degree, scaled to the cost magnitude.
    """
    d_max = dist.d_max
    best = (ThresholdProfile(d_max + 1), float(_social_cost(dist, np.zeros(d_max), params)))
    for ds in range(d_max, 0, -1):
        if dist.m[ds - 1] <= 0:
            continue
        t, sc = _minimize_slice(dist, params, ds, grid)
        if sc < best[1]:
            best = (ThresholdProfile(ds, t), sc)
    prof, sc = best
    y = prof.protected(dist)
    if certify:
        scale = max(1.0, abs(sc) / max(dist.total, 1e-300))
        bad = _certificate(dist, params, y, tol * scale)
        if bad:
            raise OptimumError(f"derivative sign check failed at {bad} for {params}")
    pos = np.nonzero(y > 0)[0]
    d_dagger = int(pos[0]) + 1 if pos.size else d_max + 1
    return OptimumResult(SpAction(dist, y), sc, d_dagger, prof)
