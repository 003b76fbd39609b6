"""Independent reference computations for the tests.

Nothing here calls into the package's numerical code: exposures and costs
are rebuilt with explicit per-degree loops from the neighbor-weighted
definitions, and equilibria/optima are found by exhaustive grids over the
threshold family.
"""

from __future__ import annotations

import math

import numpy as np


def masses_power_law(alpha, d_max):
    raw = [d ** (-alpha) for d in range(1, d_max + 1)]
    s = math.fsum(raw)
    return [r / s for r in raw]


def masses_poisson(lam, d_max):
    raw = [lam**d / math.factorial(d) for d in range(1, d_max + 1)]
    s = math.fsum(raw)
    return [r / s for r in raw]


def exposure_loop(m, xp, p):
    """Exposure from the vulnerability-weighted neighbor sums."""
    dm = math.fsum(d * m[d - 1] for d in range(1, len(m) + 1))
    g_sum = 0.0
    l_sum = 0.0
    for d in range(1, len(m) + 1):
        if m[d - 1] == 0:
            continue
        w = d * m[d - 1] / dm
        gp = xp[d - 1] / m[d - 1]
        vuln = gp * p.p_p + (1 - gp) * p.p_u
        g_sum += w * vuln
        l_sum += w * (d - 1) * vuln
    gamma = p.beta_ia * g_sum
    lam = p.beta_ia * l_sum
    return gamma * sum(lam**j for j in range(p.k))


def costs_loop(m, xp, p):
    """List of (C_P, C_N, C_I) per degree."""
    e = exposure_loop(m, xp, p)
    out = []
    for d in range(1, len(m) + 1):
        hits = p.tau_da * (1 + d * e)
        c_n = hits * p.l_u
        ins = min(p.cov_max, p.xi_cov * max(c_n - p.ded, 0.0))
        out.append((hits * p.l_p + p.c_p, c_n, c_n + p.c_i - ins))
    return out


def social_cost_loop(m, y, p):
    c = costs_loop(m, y, p)
    return math.fsum(y[i] * c[i][0] + (m[i] - y[i]) * c[i][1] for i in range(len(m)))


def threshold_vector(m, d_star, t):
    xp = [0.0] * len(m)
    for d in range(d_star + 1, len(m) + 1):
        xp[d - 1] = m[d - 1]
    if d_star <= len(m):
        xp[d_star - 1] = t
    return xp


def family_array(m, points):
    """All threshold-family vectors, ``t`` on a ``points``-point grid per
    threshold degree, stacked in increasing protected mass."""
    m = np.asarray(m, dtype=float)
    d_max = m.size
    rows = [np.zeros(d_max)]
    for ds in range(d_max, 0, -1):
        if m[ds - 1] == 0:
            continue
        ts = np.linspace(0.0, m[ds - 1], points)[1:]
        block = np.zeros((ts.size, d_max))
        block[:, ds:] = m[ds:]
        block[:, ds - 1] = ts
        rows.append(block)
    return np.vstack(rows)


def costs_batch(m, xp, p):
    """Costs for a batch ``xp`` of shape (n, d_max) -> (n, d_max, 3)."""
    m = np.asarray(m, dtype=float)
    d = np.arange(1, m.size + 1, dtype=float)
    w = d * m / (d * m).sum()
    g_p = np.divide(xp, m, out=np.zeros_like(xp), where=m > 0)
    vuln = g_p * p.p_p + (1 - g_p) * p.p_u
    gamma = p.beta_ia * (vuln @ w)
    lam = p.beta_ia * (vuln @ (w * (d - 1)))
    e = gamma * sum(lam**j for j in range(p.k))
    hits = p.tau_da * (1 + d[None, :] * e[:, None])
    c_n = hits * p.l_u
    ins = np.minimum(p.cov_max, p.xi_cov * np.maximum(c_n - p.ded, 0.0))
    return np.stack([hits * p.l_p + p.c_p, c_n, c_n + p.c_i - ins], axis=-1)


def brute_force_ne(m, p, points=1000):
    """Threshold-family vector with the smallest equilibrium violation.

    Unprotected mass is assumed to take the cheaper of N and I.
    """
    m = np.asarray(m, dtype=float)
    xs = family_array(m, points)
    c = costs_batch(m, xs, p)
    best = c.min(axis=-1)
    live = m > 0
    prot = (xs > 0) & live
    abst = (xs < m) & live
    exc_p = np.where(prot, c[..., 0] - best, 0.0)
    exc_u = np.where(abst, np.minimum(c[..., 1], c[..., 2]) - best, 0.0)
    viol = np.maximum(exc_p, exc_u).max(axis=1)
    j = int(np.argmin(viol))
    return xs[j], float(viol[j])


def brute_force_opt(m, p, points=1000):
    m = np.asarray(m, dtype=float)
    ys = family_array(m, points)
    c = costs_batch(m, ys, p)
    sc = (ys * c[..., 0] + (m - ys) * c[..., 1]).sum(axis=1)
    j = int(np.argmin(sc))
    return ys[j], float(sc[j])
