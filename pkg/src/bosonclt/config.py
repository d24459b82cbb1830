"""Run configuration: an INI file with a fixed schema.

Schema (section / key, all optional except where a default is missing)::

    [scenario]  name, seed, output
    [grid]      n, L, d
    [potential] kind, then the profile parameters (strength, width, softening, power, values)
    [initial]   kind = gaussian | plane-wave | custom, then width, center, momentum, mode, values
    [dynamics]  kappa, T, dt
    [sweep]     N (comma separated, increasing), k_max, centering = phi | gamma
    [observable] kind = site | cosine | sine | custom-diagonal, then site, mode, values
    [tolerances] defect_ceiling, mass_drift, energy_drift, moment_imag
    [truncation] margin, max_dim

Floats are written with ``repr`` so a dump/parse round trip is bit exact.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def _parse_scalar(text):
    t = text.strip()
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def _parse_value(text):
    if "," in text:
        return [_parse_scalar(x) for x in text.split(",") if x.strip()]
    return _parse_scalar(text)


@dataclass
class RunConfig:
    name: str = "standard"
    seed: int = 0
    output: str = "runs/standard"
    grid_n: int = 4
    grid_L: float = 6.283185307179586
    grid_d: int = 1
    potential: dict = field(default_factory=lambda: {"kind": "gaussian", "strength": 1.0, "width": 1.0})
    initial: dict = field(default_factory=lambda: {"kind": "gaussian", "width": 1.0, "center": 0.3, "momentum": 0.5})
    kappa: float = 1.0
    T: float = 0.5
    dt: float = 1e-3
    N_sweep: list = field(default_factory=lambda: [4, 8, 12])
    k_max: int = 4
    centering: str = "phi"
    observable: dict = field(default_factory=lambda: {"kind": "site", "site": 0})
    defect_ceiling: float = 1e-3
    mass_drift: float = 1e-9
    energy_drift: float = 1e-6
    moment_imag: float = 1e-10
    margin: int = 0
    max_dim: int = 2_000_000

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.N_sweep:
            raise ConfigError("N sweep must be nonempty")
        if any(int(b) <= int(a) for a, b in zip(self.N_sweep, self.N_sweep[1:])):
            raise ConfigError(f"N sweep must be increasing, got {self.N_sweep}")
        if any(int(n) < 1 for n in self.N_sweep):
            raise ConfigError("particle numbers must be positive")
        for tol in ("defect_ceiling", "mass_drift", "energy_drift", "moment_imag"):
            if not getattr(self, tol) > 0:
                raise ConfigError(f"tolerance {tol} must be positive")
        if self.dt <= 0 or self.T < 0:
            raise ConfigError("need dt > 0 and T >= 0")
        if not 1 <= self.k_max <= 8:
            raise ConfigError("k_max must lie in 1..8")
        if self.centering not in ("phi", "gamma"):
            raise ConfigError("centering must be 'phi' or 'gamma'")
        if self.grid_n < 1 or self.grid_L <= 0 or self.grid_d < 1:
            raise ConfigError("invalid grid parameters")
        if "kind" not in self.potential or "kind" not in self.initial or "kind" not in self.observable:
            raise ConfigError("potential, initial and observable need a 'kind'")

    # serialization
    def to_parser(self) -> configparser.ConfigParser:
        cp = configparser.ConfigParser()
        cp["scenario"] = {"name": self.name, "seed": _fmt(self.seed), "output": self.output}
        cp["grid"] = {"n": _fmt(self.grid_n), "L": _fmt(float(self.grid_L)), "d": _fmt(self.grid_d)}
        cp["potential"] = {k: _fmt(v) for k, v in self.potential.items()}
        cp["initial"] = {k: _fmt(v) for k, v in self.initial.items()}
        cp["dynamics"] = {"kappa": _fmt(float(self.kappa)), "T": _fmt(float(self.T)), "dt": _fmt(float(self.dt))}
        cp["sweep"] = {"N": ", ".join(str(int(n)) for n in self.N_sweep) + ("," if len(self.N_sweep) == 1 else ""),
                       "k_max": _fmt(self.k_max), "centering": self.centering}
        cp["observable"] = {k: _fmt(v) for k, v in self.observable.items()}
        cp["tolerances"] = {k: _fmt(float(getattr(self, k)))
                            for k in ("defect_ceiling", "mass_drift", "energy_drift", "moment_imag")}
        cp["truncation"] = {"margin": _fmt(self.margin), "max_dim": _fmt(self.max_dim)}
        return cp

    def dumps(self) -> str:
        import io
        buf = io.StringIO()
        self.to_parser().write(buf)
        return buf.getvalue()

    def save(self, path):
        Path(path).write_text(self.dumps())

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


_KEYS = {
    ("scenario", "name"): ("name", str),
    ("scenario", "seed"): ("seed", int),
    ("scenario", "output"): ("output", str),
    ("grid", "n"): ("grid_n", int),
    ("grid", "l"): ("grid_L", float),
    ("grid", "d"): ("grid_d", int),
    ("dynamics", "kappa"): ("kappa", float),
    ("dynamics", "t"): ("T", float),
    ("dynamics", "dt"): ("dt", float),
    ("sweep", "k_max"): ("k_max", int),
    ("sweep", "centering"): ("centering", str),
    ("tolerances", "defect_ceiling"): ("defect_ceiling", float),
    ("tolerances", "mass_drift"): ("mass_drift", float),
    ("tolerances", "energy_drift"): ("energy_drift", float),
    ("tolerances", "moment_imag"): ("moment_imag", float),
    ("truncation", "margin"): ("margin", int),
    ("truncation", "max_dim"): ("max_dim", int),
}


def loads(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    kw = {}
    known = {s for s, _ in _KEYS} | {"potential", "initial", "observable", "sweep"}
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp[section].items():
            if section in ("potential", "initial", "observable"):
                kw.setdefault(section, {})[key] = _parse_value(raw)
                continue
            if section == "sweep" and key == "n":
                try:
                    kw["N_sweep"] = [int(x) for x in raw.split(",") if x.strip()]
                except ValueError as exc:
                    raise ConfigError(f"bad N sweep {raw!r}") from exc
                continue
            if (section, key) not in _KEYS:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            attr, typ = _KEYS[(section, key)]
            try:
                kw[attr] = typ(raw.strip())
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
    return RunConfig(**kw)


def load(path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} not found")
    return loads(p.read_text())


def config_fields():
    return [f.name for f in fields(RunConfig)]


# Builders from the config dictionaries

def build_grid(cfg: RunConfig):
    from .grid import Grid
    return Grid(cfg.grid_n, float(cfg.grid_L), cfg.grid_d)


def build_potential(cfg: RunConfig, grid):
    from .grid import make_potential
    params = dict(cfg.potential)
    return make_potential(grid, params.pop("kind"), **params)


def build_initial(cfg: RunConfig, grid) -> np.ndarray:
    p = dict(cfg.initial)
    kind = p.pop("kind")
    if kind == "gaussian":
        return grid.gaussian(float(p.get("width", 1.0)), float(p.get("center", 0.0)), float(p.get("momentum", 0.0)))
    if kind == "plane-wave":
        return grid.plane_wave(p.get("mode", 0))
    if kind == "custom":
        vals = np.asarray(p["values"], dtype=float)
        if "imag" in p:
            vals = vals + 1j * np.asarray(p["imag"], dtype=float)
        return grid.normalize(vals.astype(complex))
    raise ConfigError(f"unknown initial state kind {kind!r}")


def build_observable(cfg: RunConfig, grid):
    from .clt import make_observable
    p = dict(cfg.observable)
    return make_observable(grid, p.pop("kind"), **p)
