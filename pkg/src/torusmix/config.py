"""TOML run configuration.

Layout::

    name = "v10"                       # report name (default: file stem)
    analyses = ["energy", "verify-theorem"]
    seed = 0                           # optional
    out = "reports/v10"                # optional, --out wins

    [[stage]]                          # a map: one table per stage, applied in order
    kind = "vshear"
    n = 10

    [flow]                             # ... or a flow (exactly one subject)
    kind = "alternating"
    u = 0.4
    k = 1
    period = 0.25
    steps = 200

    [params]                           # every key optional; defaults below
    kappa = 0.3

Unknown keys anywhere are errors.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

from .errors import ConfigError
from .flow import FlowSpec
from .maps import MapDescriptor
from .mixing import DEFAULT_RATIO, geometric_eps_grid

ANALYSES = ("energy", "mix-scale", "verify-theorem", "verify-corollary", "proof-trace", "render")
FLOW_ONLY = ("verify-corollary",)


@dataclass(frozen=True)
class Params:
    kappa: float = 0.3
    kappa_prime: float = 1.0
    grid_res: int = 1024
    energy_res: int = 512
    eps_max: float = 0.25
    eps_min: float = 0.01
    eps_ratio: float = DEFAULT_RATIO
    eps_grid: tuple = ()
    proof_eps: float = 0.0
    s_samples: int = 8
    quad_points: int = 1024
    pack_res: int = 256
    t_samples: int = 64
    chain_res: int = 128
    incompress_res: int = 32
    trajectories: int = 100
    formats: tuple = ("ppm", "svg")

    def eps_values(self):
        if self.eps_grid:
            return sorted(self.eps_grid, reverse=True)
        return geometric_eps_grid(self.eps_max, self.eps_min, self.eps_ratio)


def _open_interval(name, v, lo, hi, hi_closed=False, note=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number, got {v!r}")
    ok = lo < v < hi or (hi_closed and v == hi)
    if not ok:
        rb = "]" if hi_closed else ")"
        raise ConfigError(f"{name} = {v} outside its domain ({note or f'{lo}, {hi}'}{rb}")


def _positive_int(name, v, minimum):
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {v!r}")


def validate_params(p: Params):
    for f in fields(p):
        v = getattr(p, f.name)
        if isinstance(v, float) and not math.isfinite(v):
            raise ConfigError(f"{f.name} must be finite, got {v}")
    _open_interval("kappa", p.kappa, 0.0, 0.5, note="0, 1/2")
    _open_interval("kappa_prime", p.kappa_prime, 0.0, 1.0, hi_closed=True, note="0, 1")
    for name in ("eps_max", "eps_min"):
        _open_interval(name, getattr(p, name), 0.0, 0.25, hi_closed=True, note="0, 1/4")
    if p.eps_min > p.eps_max:
        raise ConfigError(f"eps_min = {p.eps_min} exceeds eps_max = {p.eps_max}")
    _open_interval("eps_ratio", p.eps_ratio, 0.0, 1.0, note="0, 1")
    for e in p.eps_grid:
        _open_interval("eps_grid entry", e, 0.0, 0.25, hi_closed=True, note="0, 1/4")
    if p.proof_eps:
        _open_interval("proof_eps", p.proof_eps, 0.0, 0.25, hi_closed=True, note="0, 1/4")
    _positive_int("grid_res", p.grid_res, 64)
    _positive_int("energy_res", p.energy_res, 64)
    _positive_int("s_samples", p.s_samples, 1)
    _positive_int("quad_points", p.quad_points, 128)
    _positive_int("pack_res", p.pack_res, 16)
    _positive_int("t_samples", p.t_samples, 1)
    _positive_int("chain_res", p.chain_res, 16)
    _positive_int("incompress_res", p.incompress_res, 16)
    _positive_int("trajectories", p.trajectories, 1)
    bad = set(p.formats) - {"ppm", "svg"}
    if bad:
        raise ConfigError(f"unknown image formats {sorted(bad)}; use 'ppm' and/or 'svg'")


@dataclass(frozen=True)
class RunConfig:
    name: str
    subject: object  # MapDescriptor | FlowSpec
    analyses: tuple
    params: Params = field(default_factory=Params)
    seed: int = 0
    out: str | None = None

    @property
    def is_flow(self):
        return isinstance(self.subject, FlowSpec)

    def to_toml(self):
        doc = {"name": self.name, "analyses": list(self.analyses), "seed": self.seed}
        if self.out:
            doc["out"] = self.out
        if self.is_flow:
            doc["flow"] = self.subject.to_config()
        else:
            doc["stage"] = self.subject.to_config()
        doc["params"] = {f.name: (list(getattr(self.params, f.name))
                                  if isinstance(getattr(self.params, f.name), tuple)
                                  else getattr(self.params, f.name))
                         for f in fields(self.params)}
        return tomli_w.dumps(doc)

    def echo(self):
        """Plain dict of the resolved configuration, for reports."""
        return tomllib.loads(self.to_toml())


TOP_KEYS = {"name", "analyses", "seed", "out", "stage", "flow", "params"}


def parse_config(doc, default_name="run") -> RunConfig:
    extra = set(doc) - TOP_KEYS
    if extra:
        raise ConfigError(f"unknown top-level keys {sorted(extra)}")
    has_map, has_flow = "stage" in doc, "flow" in doc
    if has_map == has_flow:
        raise ConfigError("config needs exactly one subject: [[stage]] tables or a [flow] table")
    if has_map:
        if not isinstance(doc["stage"], list):
            raise ConfigError("'stage' must be an array of tables ([[stage]])")
        subject = MapDescriptor.from_config(doc["stage"])
    else:
        if not isinstance(doc["flow"], dict):
            raise ConfigError("'flow' must be a table ([flow])")
        subject = FlowSpec.from_config(doc["flow"])
    analyses = doc.get("analyses", ["energy"])
    if not isinstance(analyses, list) or not analyses:
        raise ConfigError("'analyses' must be a non-empty list")
    for a in analyses:
        if a not in ANALYSES:
            raise ConfigError(f"unknown analysis {a!r}; expected one of {list(ANALYSES)}")
        if a in FLOW_ONLY and has_map:
            raise ConfigError(f"analysis {a!r} needs a [flow] subject")
    raw = dict(doc.get("params", {}))
    known = {f.name for f in fields(Params)}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown params {sorted(extra)}")
    for key in ("eps_grid", "formats"):
        if key in raw:
            raw[key] = tuple(raw[key])
    for key, val in list(raw.items()):
        default = getattr(Params, key, None)
        if isinstance(default, float) and isinstance(val, int) and not isinstance(val, bool):
            raw[key] = float(val)
    params = replace(Params(), **raw)
    validate_params(params)
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    name = doc.get("name", default_name)
    if not isinstance(name, str) or not name or "/" in name:
        raise ConfigError(f"name must be a non-empty string without '/', got {name!r}")
    return RunConfig(name, subject, tuple(analyses), params, seed, doc.get("out"))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return parse_config(doc, default_name=path.stem)


def map_to_toml(m: MapDescriptor) -> str:
    return tomli_w.dumps({"stage": m.to_config()})


def map_from_toml(text) -> MapDescriptor:
    doc = tomllib.loads(text)
    if set(doc) != {"stage"}:
        raise ConfigError("map document must contain only [[stage]] tables")
    return MapDescriptor.from_config(doc["stage"])
