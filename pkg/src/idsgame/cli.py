"""Command-line entry point: ``idsgame {ne,opt,poa,cascade,sweep,mc}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import cascade, config
from .model import InvalidParameters
from .sweep import (
    MC_COLUMNS,
    SWEEP_KEYS,
    _Lazy,
    mc_state,
    run_mc,
    run_point,
    run_sweep,
    write_csv,
)

log = logging.getLogger("idsgame")

POINT_OUTPUTS = {
    "ne": ("d_ne", "protected_mass", "insured_mass", "exposure"),
    "opt": ("d_dagger", "opt_protected_mass", "sc_opt"),
    "poa": ("sc_ne", "sc_opt", "poa", "poa_bound", "bound_applicable", "e_max"),
}
CASCADE_COLUMNS = SWEEP_KEYS + (
    "state", "protected_mass", "gamma", "mean_offspring", "s_star", "cascade_prob",
)


def _overrides(args) -> list[str]:
    out = list(args.set or [])
    simple = {
        "preset": "preset", "family": "distribution.family", "value": "distribution.value",
        "d_max": "distribution.d_max", "k": "params.k", "beta": "params.beta_ia",
    }
    for attr, key in simple.items():
        v = getattr(args, attr, None)
        if v is not None:
            out.append(f"{key}={v!r}" if isinstance(v, str) else f"{key}={v}")
    for attr, key in {"seed": "mc.seed", "n": "mc.n", "trials": "mc.trials",
                      "state": "mc.state", "jobs": "sweep.jobs"}.items():
        v = getattr(args, attr, None)
        if v is not None:
            out.append(f"{key}={v!r}" if isinstance(v, str) else f"{key}={v}")
    return [o.replace("'", '"') for o in out]


def _out(args):
    return args.out if args.out and args.out != "-" else sys.stdout


def cmd_point(args, raw):
    cfg = config.point_config(raw)
    outputs = POINT_OUTPUTS[args.command]
    rec = run_point(cfg, outputs)
    write_csv([rec], SWEEP_KEYS + outputs, _out(args))


def cmd_cascade(args, raw):
    cfg = config.point_config(raw)
    which = raw.get("mc", {}).get("state", "ne")
    lazy = _Lazy(cfg)
    state = mc_state(lazy, which)
    rep = cascade.cascade_report(state, cfg.params)
    rec = {
        "family_param": cfg.family_param, "k": cfg.params.k, "beta_ia": cfg.params.beta_ia,
        "d_avg": lazy.dist.d_avg, "state": which,
        "protected_mass": float(state.protected.sum()), "gamma": rep.gamma,
        "mean_offspring": rep.mean_offspring, "s_star": rep.s_star,
        "cascade_prob": rep.cascade_prob,
    }
    write_csv([rec], CASCADE_COLUMNS, _out(args))


def cmd_sweep(args, raw):
    spec = config.sweep_spec(raw)
    records = run_sweep(spec, _out(args))
    failed = sum(1 for r in records if r.get("error"))
    if failed:
        log.warning("%d of %d sweep points failed; see the error column", failed, len(records))


def cmd_mc(args, raw):
    cfg = config.point_config(raw)
    settings = config.mc_settings(raw)
    run_mc(cfg, settings, _out(args))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idsgame",
        description="Equilibria, social optima, price of anarchy and cascade "
                    "probabilities of the interdependent-security population game.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help=f"TOML config file (default: ${config.ENV_VAR})")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry, e.g. params.k=5 (repeatable)")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--preset", choices=sorted(config.PRESETS))
        p.add_argument("--family", choices=config.FAMILIES)
        p.add_argument("--value", type=float, help="alpha or lambda of the family")
        p.add_argument("--d-max", dest="d_max", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--beta", type=float, help="indirect attack probability")
        return p

    for name, helptext in [("ne", "Nash equilibrium"), ("opt", "social optimum"),
                           ("poa", "price of anarchy and bound")]:
        common(sub.add_parser(name, help=helptext)).set_defaults(func=cmd_point)
    p = common(sub.add_parser("cascade", help="cascade probability at a state"))
    p.add_argument("--state", choices=config.STATES)
    p.set_defaults(func=cmd_cascade)
    p = common(sub.add_parser("sweep", help="grid sweep to CSV"))
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_sweep)
    p = common(sub.add_parser("mc", help="Monte-Carlo check of the cascade probability"))
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--state", choices=config.STATES)
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = config.load(args.config, _overrides(args))
        args.func(args, raw)
    except (config.ConfigError, InvalidParameters, OSError) as exc:
        print(f"idsgame: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"idsgame: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
