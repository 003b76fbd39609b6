"""Nash equilibria of the security game.

Every equilibrium protects a top segment of the degree range: all degrees
above some threshold protect fully, the threshold degree may protect
partially and nobody below it protects. Exposure falls strictly as
protected mass grows, so the solver walks that one-parameter family in
order of protected mass and, inside each threshold degree, bisects the
protection gain down to indifference.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .exposure import (
    Action,
    SocialState,
    _check_degree,
    _costs_from_exposure,
    _exposure,
    cost_matrix,
    exposure,
)
from .model import DegreeDistribution, InvalidParameters, ModelParams

log = logging.getLogger(__name__)

MASS_TOL = 1e-10
GAP_TOL = 1e-8
TIE_TOL = 1e-9


class EquilibriumError(RuntimeError):
    """The solver produced no state passing the equilibrium check."""


@dataclass(frozen=True)
class ThresholdProfile:
    """Protect everything above ``d_star`` and mass ``t`` at ``d_star``.

    ``d_star = d_max + 1`` means nobody protects.
    """

    d_star: int
    t: float = 0.0

    def protected(self, dist: DegreeDistribution) -> np.ndarray:
        d_max = dist.d_max
        if not 1 <= self.d_star <= d_max + 1:
            raise InvalidParameters(f"d_star must lie in 1..{d_max + 1}")
        xp = np.zeros(d_max)
        if self.d_star > d_max:
            return xp
        m = dist.m
        if self.t < 0 or self.t > m[self.d_star - 1] * (1 + 1e-12):
            raise InvalidParameters(
                f"t={self.t} outside [0, m_{self.d_star}={m[self.d_star - 1]}]"
            )
        xp[self.d_star:] = m[self.d_star:]
        xp[self.d_star - 1] = min(self.t, m[self.d_star - 1])
        return xp

    def protected_mass(self, dist: DegreeDistribution) -> float:
        return float(self.protected(dist).sum())


@dataclass
class Violation:
    d: int
    action: Action
    mass: float
    excess: float  # cost above the degree's cheapest action


@dataclass
class NeCheck:
    ok: bool
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self):
        return self.ok


@dataclass
class EquilibriumResult:
    state: SocialState
    profile: ThresholdProfile
    d_ne: int
    protected_mass: float
    exposure_at_ne: float
    insured_mass: float

    @property
    def protected(self) -> np.ndarray:
        return self.state.protected


def _gaps(dist, xp, params):
    c = _costs_from_exposure(dist, _exposure(dist, xp, params), params)
    return np.minimum(c[..., Action.N], c[..., Action.I]) - c[..., Action.P]


def best_response_gap(state: SocialState, params: ModelParams, d: int) -> float:
    """``min(C_N, C_I) - C_P`` at degree ``d``; positive means protecting is
    strictly best."""
    d = _check_degree(state.dist, d)
    c = cost_matrix(state, params)[d - 1]
    return float(min(c[Action.N], c[Action.I]) - c[Action.P])


def insured_rule(dist, xp, params, tie_tol: float = TIE_TOL) -> np.ndarray:
    """Degrees whose unprotected mass buys insurance (ties go to N)."""
    c = _costs_from_exposure(dist, _exposure(dist, xp, params), params)
    return (c[:, Action.I] - c[:, Action.N]) < -tie_tol


def state_from_profile(
    profile: ThresholdProfile, dist: DegreeDistribution, params: ModelParams,
    tie_tol: float = TIE_TOL,
) -> SocialState:
    xp = profile.protected(dist)
    return SocialState.from_protected(dist, xp, insured_rule(dist, xp, params, tie_tol))


def verify_ne(state: SocialState, params: ModelParams, tol: float = GAP_TOL,
              mass_tol: float = 0.0) -> NeCheck:
    """Check that no positive-mass action costs more than ``tol`` above its
    degree's minimum. Masses at or below ``mass_tol`` count as absent."""
    c = cost_matrix(state, params)
    best = c.min(axis=1)
    out = []
    for i, md in enumerate(state.dist.m):
        if md <= 0:
            continue
        for a in Action:
            mass = state.x[i, a]
            excess = c[i, a] - best[i]
            if mass > mass_tol and excess > tol:
                out.append(Violation(i + 1, a, float(mass), float(excess)))
    return NeCheck(not out, out)


def _profile_is_ne(dist, xp, params, tol) -> bool:
    b = _gaps(dist, xp, params)
    live = dist.m > 0
    protects = live & (xp > 0)
    abstains = live & (xp < dist.m)
    return bool(np.all(b[protects] >= -tol) and np.all(b[abstains] <= tol))


def _bisect_root(h, lo: float, hi: float, max_iter: int = 200) -> float:
    """Root of a function positive at ``lo`` and negative at ``hi``."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _candidates(dist, params, refine: int = 0):
    """Threshold profiles in increasing order of protected mass.

    With ``refine > 0`` every threshold slice is additionally scanned on a
    grid for sign changes of the gap, which only matters when the gap is not
    monotone in the protected mass (parameters outside assumption 1).
    """
    m = dist.m
    d_max = dist.d_max
    yield ThresholdProfile(d_max + 1)
    for ds in range(d_max, 0, -1):
        md = m[ds - 1]
        if md <= 0:
            continue
        base = ThresholdProfile(ds, 0.0).protected(dist)

        def h(t, ds=ds, base=base):
            xp = base.copy()
            xp[ds - 1] = t
            return _gaps(dist, xp, params)[ds - 1]

        if refine:
            ts = np.linspace(0.0, md, refine + 1)
            xs = np.tile(base, (ts.size, 1))
            xs[:, ds - 1] = ts
            hs = _gaps(dist, xs, params)[:, ds - 1]
            for j in range(refine):
                if hs[j] > 0 > hs[j + 1]:
                    yield ThresholdProfile(ds, _bisect_root(h, ts[j], ts[j + 1]))
        elif h(0.0) > 0 > h(md):
            yield ThresholdProfile(ds, _bisect_root(h, 0.0, md))
        yield ThresholdProfile(ds, md)


def solve_ne(params: ModelParams, dist: DegreeDistribution, tol: float = GAP_TOL,
             reverse: bool = False) -> EquilibriumResult:
    """Compute a Nash equilibrium.

    The protected masses are unique across equilibria; the unprotected mass
    of each degree goes to I only when insurance is strictly cheaper than N.
    ``reverse`` walks candidates from full protection downwards instead,
    which must land on the same protected profile.
    """
    if not params.satisfies_assumption1:
        log.debug("solving outside assumption 1: %s", params.assumption1_violations())
    gap_tol = tol
    found = None
    for refine in (0, 4096):
        cands = list(_candidates(dist, params, refine))
        if reverse:
            cands.reverse()
        for prof in cands:
            xp = prof.protected(dist)
            if not _profile_is_ne(dist, xp, params, gap_tol):
                continue
            state = state_from_profile(prof, dist, params)
            if verify_ne(state, params, gap_tol):
                found = prof, state
                break
        if found:
            break
    if found is None:
        raise EquilibriumError(
            f"no threshold profile passed the equilibrium check "
            f"(params={params}, dist={dist})"
        )
    prof, state = found
    return _result(prof, state, params)


def _result(prof, state, params) -> EquilibriumResult:
    xp = state.protected
    pos = np.nonzero(xp > 0)[0]
    d_ne = int(pos[0]) + 1 if pos.size else state.dist.d_max + 1
    return EquilibriumResult(
        state=state,
        profile=prof,
        d_ne=d_ne,
        protected_mass=float(xp.sum()),
        exposure_at_ne=exposure(state, params),
        insured_mass=float(state.insured.sum()),
    )
