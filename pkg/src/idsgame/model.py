"""Game parameters and degree distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

NORM_TOL = 1e-12


class InvalidParameters(ValueError):
    """Raised when a parameter set or distribution violates its invariants."""


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of the security game.

    ``l_p``/``l_u`` are expected losses per attack, protected/unprotected;
    ``p_p``/``p_u`` the matching infection probabilities. The ordering checks
    (``l_p < (1 - xi_cov) * l_u`` and ``c_p > c_i + ded``) run unless
    ``enforce_assumption1`` is False.
    """

    tau_da: float
    p_p: float
    p_u: float
    l_p: float
    l_u: float
    c_p: float
    c_i: float
    ded: float
    xi_cov: float
    cov_max: float
    beta_ia: float
    k: int = 1
    enforce_assumption1: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.tau_da <= 1.0:
            raise InvalidParameters(f"tau_da must lie in [0, 1], got {self.tau_da}")
        if not 0.0 <= self.p_p < self.p_u <= 1.0:
            raise InvalidParameters(
                f"need 0 <= p_p < p_u <= 1, got p_p={self.p_p}, p_u={self.p_u}"
            )
        for name in ("l_p", "l_u", "c_p", "c_i", "ded", "cov_max"):
            if getattr(self, name) < 0:
                raise InvalidParameters(f"{name} must be nonnegative")
        if not self.l_u > self.l_p:
            raise InvalidParameters("need l_u > l_p")
        if not 0.0 < self.xi_cov <= 1.0:
            raise InvalidParameters(f"xi_cov must lie in (0, 1], got {self.xi_cov}")
        if not 0.0 < self.beta_ia <= 1.0:
            raise InvalidParameters(f"beta_ia must lie in (0, 1], got {self.beta_ia}")
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameters(f"k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if self.enforce_assumption1:
            problems = self.assumption1_violations()
            if problems:
                raise InvalidParameters("; ".join(problems))

    @property
    def delta_l(self) -> float:
        return self.l_u - self.l_p

    @property
    def delta_p(self) -> float:
        return self.p_u - self.p_p

    def assumption1_violations(self) -> list[str]:
        out = []
        if not self.l_p < (1.0 - self.xi_cov) * self.l_u:
            out.append(
                f"assumption 1a fails: l_p={self.l_p} >= (1 - xi_cov) * l_u="
                f"{(1.0 - self.xi_cov) * self.l_u:g}"
            )
        if not self.c_p > self.c_i + self.ded:
            out.append(
                f"assumption 1b fails: c_p={self.c_p} <= c_i + ded={self.c_i + self.ded:g}"
            )
        return out

    @property
    def satisfies_assumption1(self) -> bool:
        return not self.assumption1_violations()

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def table_one(k: int = 1, beta_ia: float = 0.85, **changes) -> ModelParams:
    """Baseline parameters used for the power-law and Poisson sweeps."""
    base = dict(
        tau_da=0.95, p_p=0.0, p_u=1.0, l_p=10.0, l_u=100.0, c_p=300.0, c_i=40.0,
        ded=20.0, xi_cov=0.8, cov_max=500.0, beta_ia=beta_ia, k=k,
    )
    base.update(changes)
    return ModelParams(**base)


def table_two(k: int = 5, beta_ia: float = 0.1, **changes) -> ModelParams:
    """Parameters tuned so the price of anarchy sits close to its bound.

    This set has ``l_p = 5 > (1 - 0.95) * 95``, so assumption 1a is not
    enforced for it.
    """
    base = dict(
        tau_da=0.9, p_p=0.0, p_u=1.0, l_p=5.0, l_u=95.0, c_p=88.0, c_i=80.0,
        ded=5.0, xi_cov=0.95, cov_max=500.0, beta_ia=beta_ia, k=k,
        enforce_assumption1=False,
    )
    base.update(changes)
    return ModelParams(**base)


PRESETS = {"table1": table_one, "table2": table_two}


class DegreeDistribution:
    """Population masses ``m_d`` for degrees ``d = 1..d_max``.

    Masses must sum to one unless ``normalized=False``; unnormalized vectors
    exist only to exercise the scale invariance of the game.
    """

    __slots__ = ("_m",)

    def __init__(self, masses, normalized: bool = True):
        m = np.array(masses, dtype=float).reshape(-1)
        if m.size == 0:
            raise InvalidParameters("need at least one degree")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise InvalidParameters("masses must be finite and nonnegative")
        if not np.any(m > 0):
            raise InvalidParameters("at least one mass must be positive")
        if normalized and abs(m.sum() - 1.0) > NORM_TOL:
            raise InvalidParameters(f"masses sum to {m.sum()!r}, expected 1")
        m.setflags(write=False)
        self._m = m

    @classmethod
    def from_weights(cls, weights) -> "DegreeDistribution":
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum())

    def __repr__(self):
        return f"DegreeDistribution(d_max={self.d_max}, d_avg={self.d_avg:.4g})"

    def __eq__(self, other):
        return isinstance(other, DegreeDistribution) and np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    @property
    def m(self) -> np.ndarray:
        return self._m

    @property
    def d_max(self) -> int:
        return self._m.size

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(1, self.d_max + 1, dtype=float)

    @property
    def total(self) -> float:
        return float(self._m.sum())

    @property
    def f(self) -> np.ndarray:
        """Degree distribution; equal to ``m`` when normalized."""
        return self._m / self.total

    @property
    def w(self) -> np.ndarray:
        return neighbor_weights(self)

    @property
    def d_avg(self) -> float:
        return average_degree(self)

    def scaled(self, phi: float) -> "DegreeDistribution":
        if phi <= 0:
            raise InvalidParameters("scale factor must be positive")
        return DegreeDistribution(self._m * phi, normalized=False)


def power_law(alpha: float, d_max: int) -> DegreeDistribution:
    """Truncated power law, ``m_d`` proportional to ``d**-alpha``."""
    if d_max < 1:
        raise InvalidParameters("d_max must be >= 1")
    if alpha < 0:
        raise InvalidParameters("alpha must be nonnegative")
    d = np.arange(1, d_max + 1, dtype=float)
    return DegreeDistribution.from_weights(d ** (-float(alpha)))


def poisson(lambda_rate: float, d_max: int) -> DegreeDistribution:
    """Poisson law truncated to ``1..d_max`` (no isolated nodes)."""
    if d_max < 1:
        raise InvalidParameters("d_max must be >= 1")
    if not lambda_rate > 0:
        raise InvalidParameters("lambda_rate must be positive")
    d = np.arange(1, d_max + 1)
    # log-space avoids overflow of lambda**d / d! for large d_max
    logw = d * math.log(lambda_rate) - np.array([math.lgamma(x + 1) for x in d])
    return DegreeDistribution.from_weights(np.exp(logw - logw.max()))


def neighbor_weights(dist: DegreeDistribution) -> np.ndarray:
    """Degree distribution of a randomly chosen neighbor, ``d m_d / sum d' m_d'``."""
    dm = dist.degrees * dist.m
    return dm / dm.sum()


def average_degree(dist: DegreeDistribution) -> float:
    # compensated sums keep uniform laws exact, e.g. 10.5 for 1..20
    m = dist.m
    return math.fsum(dist.degrees * m) / math.fsum(m)
