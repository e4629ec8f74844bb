"""Experiment configuration: INI-style ``key = value`` files with optional
sections, validated into nested dataclasses.

Top-level keys (before any section header) belong to ``[general]``. Keys are
addressed as ``section.key`` in overrides, e.g. ``grid.n=1024``.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from .lattice import Grid

__all__ = ["ConfigError", "SimConfig", "load_config", "apply_overrides", "config_help", "EXPERIMENTS"]

EXPERIMENTS = (
    "evolve",
    "reversal",
    "heat-contrast",
    "hydro",
    "walkers",
    "born",
    "eigen-born",
    "double-slit",
    "eventcalc",
    "spin",
)


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key."""


@dataclass
class GeneralSection:
    experiment: str = "all"
    seed: int = 0
    out_dir: str = "runs"
    bc: str = "dirichlet"
    potential: str = "free"
    potential_file: str = ""
    mass: float = 1.0
    threads: int = 0


@dataclass
class GridSection:
    x_min: float = -20.0
    x_max: float = 20.0
    n: int = 2048


@dataclass
class WindowSection:
    t0: float = 1.0
    n_steps: int = 1000
    export_stride: int = 100


@dataclass
class HeatSection:
    D: float = 0.5
    noise: float = 0.05


@dataclass
class WalkerSection:
    n: int = 100000
    t_c: float = 0.5
    bins: int = 201
    roughness_n: int = 20000
    roughness_t0: float = 0.2
    roughness_steps: int = 200
    masses: str = "1,10,100"


@dataclass
class WellSection:
    n: int = 2048
    width: float = 1.0
    modes: int = 64
    random_intervals: int = 10


@dataclass
class EpsSection:
    start_cells: int = 16
    levels: int = 4


@dataclass
class SlitSection:
    d: float = 4.0
    sigma: float = 0.5
    k: float = 0.0
    t_screen: float = 5.0
    bins: int = 180
    x_min: float = -45.0
    x_max: float = 45.0
    n: int = 4096
    n_steps: int = 2500
    sweep_bins: int = 20
    sweep_width: float = 1.0


@dataclass
class EventSection:
    z: str = "0.6+0.3i"
    random_pairs: int = 1000


@dataclass
class SpinSection:
    c1: str = "0.6"
    c2: str = "0.8i"
    random_states: int = 100


@dataclass
class SimConfig:
    general: GeneralSection = field(default_factory=GeneralSection)
    grid: GridSection = field(default_factory=GridSection)
    window: WindowSection = field(default_factory=WindowSection)
    heat: HeatSection = field(default_factory=HeatSection)
    walkers: WalkerSection = field(default_factory=WalkerSection)
    well: WellSection = field(default_factory=WellSection)
    eps: EpsSection = field(default_factory=EpsSection)
    slit: SlitSection = field(default_factory=SlitSection)
    event: EventSection = field(default_factory=EventSection)
    spin: SpinSection = field(default_factory=SpinSection)

    @property
    def seed(self) -> int:
        return self.general.seed

    @property
    def out_dir(self) -> Path:
        return Path(os.environ.get("REVDIFF_OUT") or self.general.out_dir)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> "SimConfig":
        g = self.general
        if g.experiment not in EXPERIMENTS + ("all",):
            raise ConfigError(f"general.experiment: unknown experiment {g.experiment!r}")
        if not 0 <= g.seed < 2**64:
            raise ConfigError("general.seed: must be a 64-bit unsigned integer")
        if g.bc not in ("dirichlet", "periodic"):
            raise ConfigError(f"general.bc: must be dirichlet or periodic, got {g.bc!r}")
        if g.potential not in ("free", "well", "harmonic", "custom-file"):
            raise ConfigError(f"general.potential: unknown potential {g.potential!r}")
        if g.potential == "custom-file" and not g.potential_file:
            raise ConfigError("general.potential_file: required for potential = custom-file")
        if not g.mass > 0:
            raise ConfigError("general.mass: must be positive")
        if g.threads < 0:
            raise ConfigError("general.threads: must be >= 0")
        for name, sec in (("grid", self.grid), ("slit", self.slit)):
            try:
                Grid(sec.x_min, sec.x_max, sec.n)
            except ValueError as exc:
                raise ConfigError(f"{name}.n / {name}.x_min / {name}.x_max: {exc}") from None
        if self.well.n < 8:
            raise ConfigError(f"well.n: grid needs n >= 8 points, got {self.well.n}")
        if not self.window.t0 > 0 or self.window.n_steps < 0:
            raise ConfigError("window.t0 / window.n_steps: need t0 > 0 and n_steps >= 0")
        if self.eps.levels < 2 or self.eps.start_cells < 2 * 2 ** (self.eps.levels - 1):
            raise ConfigError("eps.start_cells / eps.levels: smallest eps must be at least two cells")
        if self.walkers.n < 0:
            raise ConfigError("walkers.n: must be >= 0")
        return self


def _coerce(section: str, key: str, raw: str, typ):
    try:
        if typ is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if typ is int:
            return int(raw, 0)
        if typ is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected {typ.__name__}, got {raw!r}") from None


def _sections(cfg: SimConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}


def _set(cfg: SimConfig, section: str, key: str, raw: str) -> None:
    secs = _sections(cfg)
    if section not in secs:
        raise ConfigError(f"{section}.{key}: unknown section {section!r}")
    sec = secs[section]
    types = {f.name: f.type for f in dataclasses.fields(sec)}
    if key not in types:
        raise ConfigError(f"{section}.{key}: unknown key")
    typ = {"int": int, "float": float, "str": str, "bool": bool}.get(types[key], types[key])
    setattr(sec, key, _coerce(section, key, raw, typ))


def load_config(path=None, overrides: dict | None = None) -> SimConfig:
    """Read ``path`` (may be None or empty) and apply ``section.key`` overrides."""
    cfg = SimConfig()
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            parser.read_string("[general]\n" + text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in parser.sections():
            for key, raw in parser.items(section):
                _set(cfg, section, key, raw)
    if overrides:
        apply_overrides(cfg, overrides)
    return cfg.validate()


def apply_overrides(cfg: SimConfig, overrides: dict) -> SimConfig:
    for dotted, raw in overrides.items():
        section, _, key = dotted.rpartition(".")
        _set(cfg, section or "general", key, str(raw))
    return cfg


def config_help() -> str:
    lines = ["configuration keys (section.key = default):"]
    for name, sec in _sections(SimConfig()).items():
        for f in dataclasses.fields(sec):
            lines.append(f"  {name}.{f.name} = {getattr(sec, f.name)!r}")
    return "\n".join(lines)
