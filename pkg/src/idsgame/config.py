"""Run configuration: a TOML file, optional env var, and ``--set`` overrides.

File layout (every table and key optional)::

    preset = "table1"            # base parameters: table1 | table2

    [params]                     # any ModelParams field
    k = 5
    beta_ia = 0.85

    [distribution]
    family = "power_law"         # power_law | poisson | explicit
    value = 0.2                  # alpha (power_law) or lambda (poisson)
    d_max = 20
    masses = [0.5, 0.5]          # explicit family only

    [sweep]
    family = "power_law"         # defaults to distribution.family
    values = [0.0, 1.0, 2.0]     # alpha / lambda grid
    mass_grid = [[1.0], [0.5, 0.5]]   # explicit family grid
    k = [1, 2, 3]
    beta_ia = [0.85]
    outputs = ["d_ne", "protected_mass", "cascade_prob"]
    jobs = 1

    [mc]
    n = 50000
    trials = 200
    cascade_fraction = 0.01
    seed = 0
    state = "ne"                 # ne | opt | unprotected | full
    erase_multi_edges = false
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .mc_oracle import SimConfig
from .model import PRESETS, DegreeDistribution, InvalidParameters, ModelParams, poisson, power_law

ENV_VAR = "IDSGAME_CONFIG"

OUTPUTS = (
    "d_ne", "protected_mass", "cascade_prob", "mean_offspring", "sc_ne", "sc_opt",
    "poa", "poa_bound", "d_dagger", "exposure",
)
EXTRA_OUTPUTS = ("bound_applicable", "insured_mass", "opt_protected_mass", "s_star", "e_max")
FAMILIES = ("power_law", "poisson", "explicit")
STATES = ("ne", "opt", "unprotected", "full")

DEFAULT_D_MAX = 20


def _default_values(family):
    if family == "power_law":
        return [round(a, 10) for a in np.arange(0.0, 3.0 + 1e-9, 0.1)]
    if family == "poisson":
        return [round(x, 10) for x in np.arange(1.1, 10.6 + 1e-9, 0.5)]
    return []


DEFAULT_K_GRID = list(range(1, 11))
DEFAULT_BETA_GRID = [round(0.05 * i, 10) for i in range(1, 21)]


class ConfigError(ValueError):
    pass


@dataclass
class PointConfig:
    """One parameter point: game parameters plus a degree distribution."""

    params: ModelParams
    family: str
    value: float | None
    d_max: int
    masses: list[float] | None = None

    def dist(self) -> DegreeDistribution:
        return make_dist(self.family, self.value, self.d_max, self.masses)

    @property
    def family_param(self):
        return self.value


@dataclass
class SweepSpec:
    family: str
    values: list
    k_grid: list[int]
    beta_grid: list[float]
    base: dict
    d_max: int = DEFAULT_D_MAX
    outputs: tuple[str, ...] = OUTPUTS
    jobs: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if not self.values or not self.k_grid or not self.beta_grid:
            raise ConfigError("sweep grids must be nonempty")
        bad = [o for o in self.outputs if o not in OUTPUTS + EXTRA_OUTPUTS]
        if bad:
            raise ConfigError(f"unknown outputs {bad}")

    def points(self):
        """Grid points in lexicographic (family value, k, beta) order.

        Parameters stay a plain dict here; validating them is the runner's
        job so that a bad point becomes an error row, not an abort.
        """
        for i, v in enumerate(self.values):
            for k in self.k_grid:
                for b in self.beta_grid:
                    fields = dict(self.base, k=k, beta_ia=b)
                    if self.family == "explicit":
                        yield GridPoint(i, k, b, fields, "explicit", i, len(v), list(v))
                    else:
                        yield GridPoint(v, k, b, fields, self.family, v, self.d_max)


@dataclass
class GridPoint:
    family_param: float
    k: int
    beta_ia: float
    fields: dict
    family: str
    value: float
    d_max: int
    masses: list[float] | None = None

    def point_config(self) -> PointConfig:
        return PointConfig(build_params(self.fields), self.family, self.value, self.d_max,
                           self.masses)


def make_dist(family, value, d_max, masses=None) -> DegreeDistribution:
    if family == "power_law":
        return power_law(float(value), int(d_max))
    if family == "poisson":
        return poisson(float(value), int(d_max))
    if family == "explicit":
        if not masses:
            raise ConfigError("explicit family needs masses")
        return DegreeDistribution.from_weights(masses)
    raise ConfigError(f"unknown family {family!r}")


def load(path: str | os.PathLike | None = None, overrides=()) -> dict:
    """Read the config file (or ``$IDSGAME_CONFIG``) and apply overrides."""
    path = path or os.environ.get(ENV_VAR)
    raw = {}
    if path:
        with open(Path(path), "rb") as fh:
            try:
                raw = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
    raw = copy.deepcopy(raw)
    for item in overrides:
        apply_override(raw, item)
    check_keys(raw)
    return raw


# params keys are checked against ModelParams when the parameters are built
_SECTIONS = {
    "distribution": {"family", "value", "d_max", "masses"},
    "sweep": {"family", "values", "mass_grid", "k", "beta_ia", "outputs", "jobs"},
    "mc": {"n", "trials", "cascade_fraction", "seed", "state", "erase_multi_edges"},
    "params": None,
}


def check_keys(raw: dict):
    unknown = sorted(set(raw) - set(_SECTIONS) - {"preset"})
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}")
    for name, allowed in _SECTIONS.items():
        section = raw.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"[{name}] must be a table")
        if allowed is not None and set(section) - allowed:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(set(section) - allowed)}")


def apply_override(raw: dict, item: str):
    """Apply ``section.key=value``; the value is parsed as a TOML value."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, text = item.split("=", 1)
    try:
        value = tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        value = text
    parts = key.strip().split(".")
    node = raw
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def base_params(raw: dict) -> dict:
    preset = raw.get("preset", "table1")
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    fields = vars(PRESETS[preset]()).copy()
    fields.update(raw.get("params", {}))
    return fields


def build_params(fields: dict) -> ModelParams:
    try:
        return ModelParams(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    except InvalidParameters as exc:
        raise ConfigError(f"invalid parameters: {exc}") from None


def point_config(raw: dict) -> PointConfig:
    params = build_params(base_params(raw))
    dist = raw.get("distribution", {})
    family = dist.get("family", "power_law")
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}")
    masses = dist.get("masses")
    d_max = len(masses) if family == "explicit" and masses else dist.get("d_max", DEFAULT_D_MAX)
    value = dist.get("value", 0.0 if family == "power_law" else 1.1 if family == "poisson" else 0)
    return PointConfig(params, family, value, int(d_max), masses)


def sweep_spec(raw: dict) -> SweepSpec:
    base = base_params(raw)
    dist = raw.get("distribution", {})
    sw = raw.get("sweep", {})
    family = sw.get("family", dist.get("family", "power_law"))
    if family == "explicit":
        values = sw.get("mass_grid") or ([dist["masses"]] if "masses" in dist else [])
    else:
        values = sw.get("values", _default_values(family))
    return SweepSpec(
        family=family,
        values=list(values),
        k_grid=[int(k) for k in sw.get("k", DEFAULT_K_GRID)],
        beta_grid=[float(b) for b in sw.get("beta_ia", DEFAULT_BETA_GRID)],
        base=base,
        d_max=int(dist.get("d_max", DEFAULT_D_MAX)),
        outputs=tuple(sw.get("outputs", OUTPUTS)),
        jobs=int(sw.get("jobs", 1)),
    )


@dataclass
class McSettings:
    sim: SimConfig
    state: str = "ne"


def mc_settings(raw: dict) -> McSettings:
    mc = raw.get("mc", {})
    state = mc.get("state", "ne")
    if state not in STATES:
        raise ConfigError(f"unknown state {state!r}; choose from {STATES}")
    try:
        sim = SimConfig(
            n=int(mc.get("n", 50_000)),
            trials=int(mc.get("trials", 200)),
            cascade_fraction=float(mc.get("cascade_fraction", 0.01)),
            seed=int(mc.get("seed", 0)),
            erase_multi_edges=bool(mc.get("erase_multi_edges", False)),
        )
    except InvalidParameters as exc:
        raise ConfigError(str(exc)) from None
    return McSettings(sim, state)
