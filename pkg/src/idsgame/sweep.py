"""Single-point evaluation, grid sweeps and Monte-Carlo runs emitting CSV."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor

from . import cascade, equilibrium, optimum, poa
from .config import OUTPUTS, GridPoint, McSettings, PointConfig, SweepSpec
from .exposure import SocialState, exposure
from .mc_oracle import empirical_cascade_probability

log = logging.getLogger(__name__)

SWEEP_KEYS = ("family_param", "k", "beta_ia", "d_avg")
MC_COLUMNS = (
    "family_param", "k", "beta_ia", "d_avg", "state", "protected_mass", "analytic_cascade_prob",
    "empirical_cascade_prob", "stderr", "n", "trials", "cascade_fraction", "seed",
)


def fmt(value) -> str:
    """CSV cell text; floats carry 12 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


class _Lazy:
    """Computes equilibrium, optimum and cascade pieces on first use."""

    def __init__(self, cfg: PointConfig):
        self.cfg = cfg
        self.params = cfg.params
        self.dist = cfg.dist()
        self._ne = self._opt = self._cas = self._poa = None

    @property
    def ne(self):
        if self._ne is None:
            self._ne = equilibrium.solve_ne(self.params, self.dist)
        return self._ne

    @property
    def opt(self):
        if self._opt is None:
            self._opt = optimum.solve_opt(self.params, self.dist)
        return self._opt

    @property
    def cas(self):
        if self._cas is None:
            self._cas = cascade.cascade_report(self.ne.state, self.params)
        return self._cas

    @property
    def poa(self):
        if self._poa is None:
            self._poa = poa.poa(self.params, self.dist, self.ne, self.opt)
        return self._poa

    def get(self, name):
        getters = {
            "d_ne": lambda: self.ne.d_ne,
            "protected_mass": lambda: self.ne.protected_mass,
            "insured_mass": lambda: self.ne.insured_mass,
            "exposure": lambda: self.ne.exposure_at_ne,
            "cascade_prob": lambda: self.cas.cascade_prob,
            "mean_offspring": lambda: self.cas.mean_offspring,
            "s_star": lambda: self.cas.s_star,
            "sc_ne": lambda: self.poa.sc_ne,
            "sc_opt": lambda: self.opt.social_cost,
            "poa": lambda: self.poa.ratio,
            "poa_bound": lambda: poa.poa_bound(self.params, self.dist),
            "bound_applicable": lambda: poa.bound_applies(self.params),
            "e_max": lambda: poa.e_max(self.params, self.dist),
            "d_dagger": lambda: self.opt.d_dagger,
            "opt_protected_mass": lambda: self.opt.protected_mass,
        }
        return getters[name]()


def run_point(cfg: PointConfig, outputs=OUTPUTS) -> dict:
    """Evaluate the requested outputs at one parameter point."""
    lazy = _Lazy(cfg)
    rec = {
        "family_param": cfg.family_param,
        "k": cfg.params.k,
        "beta_ia": cfg.params.beta_ia,
        "d_avg": lazy.dist.d_avg,
    }
    for name in outputs:
        v = lazy.get(name)
        rec[name] = v.item() if hasattr(v, "item") else v
    return rec


def _run_grid_point(args):
    point, outputs = args
    rec = {
        "family_param": point.family_param, "k": point.k, "beta_ia": point.beta_ia,
        "d_avg": None,
    }
    try:
        rec = run_point(point.point_config(), outputs)
        rec["error"] = ""
    except Exception as exc:  # recorded per row; the sweep goes on
        log.warning("point (%s, k=%s, beta=%s) failed: %s",
                    point.family_param, point.k, point.beta_ia, exc)
        rec.update({name: None for name in outputs})
        rec["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    return rec


def sweep_records(spec: SweepSpec) -> list[dict]:
    points: list[GridPoint] = list(spec.points())
    tasks = [(p, spec.outputs) for p in points]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            return list(pool.map(_run_grid_point, tasks, chunksize=4))
    return [_run_grid_point(t) for t in tasks]


def write_csv(records, columns, out):
    """Write records to a path, or to a text stream when ``out`` has ``write``."""
    if hasattr(out, "write"):
        _write(records, columns, out)
        return
    with open(out, "w", newline="") as fh:
        _write(records, columns, fh)


def _write(records, columns, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([fmt(rec.get(c)) for c in columns])


def run_sweep(spec: SweepSpec, out) -> list[dict]:
    records = sweep_records(spec)
    write_csv(records, SWEEP_KEYS + tuple(spec.outputs) + ("error",), out)
    return records


def csv_text(records, columns) -> str:
    buf = io.StringIO()
    _write(records, columns, buf)
    return buf.getvalue()


def mc_state(lazy: _Lazy, which: str) -> SocialState:
    if which == "ne":
        return lazy.ne.state
    if which == "opt":
        return lazy.opt.action.to_state()
    if which == "unprotected":
        return SocialState.unprotected(lazy.dist)
    return SocialState.fully_protected(lazy.dist)


def mc_record(cfg: PointConfig, settings: McSettings) -> dict:
    lazy = _Lazy(cfg)
    state = mc_state(lazy, settings.state)
    analytic = cascade.cascade_probability(state, cfg.params)
    est = empirical_cascade_probability(cfg.params, state, settings.sim)
    return {
        "family_param": cfg.family_param,
        "k": cfg.params.k,
        "beta_ia": cfg.params.beta_ia,
        "d_avg": lazy.dist.d_avg,
        "state": settings.state,
        "protected_mass": float(state.protected.sum()),
        "exposure": exposure(state, cfg.params),
        "analytic_cascade_prob": analytic,
        "empirical_cascade_prob": est.estimate,
        "stderr": est.stderr,
        "n": settings.sim.n,
        "trials": settings.sim.trials,
        "cascade_fraction": settings.sim.cascade_fraction,
        "seed": settings.sim.seed,
    }


def run_mc(cfg: PointConfig, settings: McSettings, out) -> dict:
    rec = mc_record(cfg, settings)
    write_csv([rec], MC_COLUMNS, out)
    return rec
