"""Run configuration: parsing and validation of the JSON config file."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace

STAGES = ("generate", "dual", "bonnet", "roundtrip", "verify")
SEEDS = ("cylinder", "catenoid", "sphere", "revolution")

DEFAULT_RANGES = {
    "cylinder": ((0.3, 2 * math.pi - 0.3), (-1.0, 1.0)),
    "catenoid": ((0.3, 2 * math.pi - 0.3), (-1.0, 1.0)),
    "sphere": ((-1.0, 1.0), (-1.0, 1.0)),
    "revolution": ((0.3, 2 * math.pi - 0.3), (0.0, 1.0)),
}

DEFAULT_TOLERANCES = {
    "conformality": 1e-8,
    "normal": 1e-10,
    "dtau": 1e-2,
    "cmc_spread": 1e-2,
    "anticonformal": 1e-8,
    "df_wedge_tau": 1e-8,
    "metric_gap": 1e-12,
    "H_gap": 1e-12,
    "dirac": 1e-2,
    "congruence_variation": 0.1,
    "fstar_C": 10.0,
    "f_star_imag": 1e-12,
    "min_order": 1.9,
}


class ConfigError(ValueError):
    pass


@dataclass
class SeedSpec:
    name: str = "cylinder"
    radius: float = 1.0
    shear: float = 0.0
    profile: str | None = None
    t_start: float | None = None
    tau: str = "curvature_lines"


@dataclass
class GridSpec:
    nu: int = 128
    nv: int = 128
    u_range: tuple | None = None
    v_range: tuple | None = None


@dataclass
class Params:
    epsilon: float = 0.5
    a: tuple = (0.0, 0.0, 0.0)
    base: tuple | None = None
    r: str = "auto"
    allow_degenerate: bool = False


@dataclass
class RunConfig:
    run_id: str = "run"
    seed: SeedSpec = field(default_factory=SeedSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    params: Params = field(default_factory=Params)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    levels: int = 0
    out: str = "out"

    def to_dict(self):
        d = asdict(self)
        d["grid"]["u_range"] = list(self.grid.u_range)
        d["grid"]["v_range"] = list(self.grid.v_range)
        d["params"]["a"] = list(self.params.a)
        d["params"]["base"] = None if self.params.base is None else list(self.params.base)
        return d


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    return cls(**data)


def parse_config(data: dict, config_dir: str = ".") -> RunConfig:
    """Validate a config mapping; every error is a ConfigError."""
    data = dict(data)
    top = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - top)
    if unknown:
        raise ConfigError(f"unknown keys {unknown}")
    seed = data.pop("seed", {})
    if isinstance(seed, str):
        name, _, rest = seed.partition(":")
        seed = {"name": name, "profile": rest or None}
    try:
        cfg = RunConfig(
            seed=_build(SeedSpec, seed, "seed"),
            grid=_build(GridSpec, data.pop("grid", {}), "grid"),
            params=_build(Params, data.pop("params", {}), "params"),
            tolerances=dict(DEFAULT_TOLERANCES),
            **{k: v for k, v in data.items() if k != "tolerances"},
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    tol = data.get("tolerances", {})
    bad = sorted(set(tol) - set(DEFAULT_TOLERANCES))
    if bad:
        raise ConfigError(f"tolerances: unknown keys {bad}")
    cfg.tolerances.update({k: float(v) for k, v in tol.items()})
    return validate(cfg, config_dir)


def validate(cfg: RunConfig, config_dir: str = ".") -> RunConfig:
    s = cfg.seed
    if s.name not in SEEDS:
        raise ConfigError(f"seed.name must be one of {SEEDS}, got {s.name!r}")
    if s.name == "revolution":
        if not s.profile:
            raise ConfigError("revolution seed needs a profile CSV path")
        if not os.path.isabs(s.profile):
            s.profile = os.path.normpath(os.path.join(config_dir, s.profile))
    if s.tau not in ("curvature_lines", "cmc"):
        raise ConfigError("seed.tau must be 'curvature_lines' or 'cmc'")
    if s.radius <= 0:
        raise ConfigError("seed.radius must be positive")
    g = cfg.grid
    if int(g.nu) != g.nu or int(g.nv) != g.nv or g.nu < 3 or g.nv < 3:
        raise ConfigError("grid.nu and grid.nv must be integers >= 3")
    du, dv = DEFAULT_RANGES[s.name]
    g.u_range = tuple(float(x) for x in (g.u_range or du))
    g.v_range = tuple(float(x) for x in (g.v_range or dv))
    for r in (g.u_range, g.v_range):
        if len(r) != 2 or not r[1] > r[0]:
            raise ConfigError(f"bad range {r}")
    p = cfg.params
    try:
        p.epsilon = float(p.epsilon)
        p.a = tuple(float(x) for x in p.a)
    except (TypeError, ValueError):
        raise ConfigError("params.epsilon must be a number and params.a three numbers") from None
    if len(p.a) != 3:
        raise ConfigError("params.a needs three components")
    if p.epsilon == 0.0 and not p.allow_degenerate:
        raise ConfigError("epsilon = 0 requires params.allow_degenerate = true")
    if p.base is not None:
        p.base = tuple(int(x) for x in p.base)
        if not (0 <= p.base[0] < g.nu and 0 <= p.base[1] < g.nv):
            raise ConfigError("params.base outside the grid")
    if p.r not in ("auto", "1", "i", "j", "k"):
        raise ConfigError("params.r must be one of auto, 1, i, j, k")
    if int(cfg.levels) != cfg.levels or cfg.levels < 0:
        raise ConfigError("levels must be a nonnegative integer")
    return cfg


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return validate(RunConfig())
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(data, os.path.dirname(os.path.abspath(path)))


def override(cfg: RunConfig, **kw) -> RunConfig:
    """Apply command-line overrides (None values are ignored)."""
    p = cfg.params
    if kw.get("epsilon") is not None:
        p = replace(p, epsilon=float(kw["epsilon"]))
    if kw.get("a") is not None:
        try:
            a = tuple(float(x) for x in str(kw["a"]).split(","))
        except ValueError:
            raise ConfigError("--a expects x,y,z") from None
        p = replace(p, a=a)
    cfg = replace(cfg, params=p)
    if kw.get("levels") is not None:
        cfg = replace(cfg, levels=int(kw["levels"]))
    if kw.get("out") is not None:
        cfg = replace(cfg, out=kw["out"])
    return validate(cfg)
