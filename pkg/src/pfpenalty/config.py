"""INI run configuration for the command-line pipelines.

A file holds a ``[run]`` section and, optionally, ``[sweep.NAME]`` sections
whose keys override ``[run]`` for one member of a sweep::

    [run]
    benchmark = SenShear
    model = AT1
    split = VolDev
    irreversibility = auto

    [sweep.low]
    gamma_scale = 0.01
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigurationError
from .model import ModelKind, SplitKind

BENCHMARKS = ("SenShear", "Sneddon", "Profiles1D", "Tune")


@dataclass(frozen=True)
class RunConfig:
    benchmark: str = "Tune"
    model: ModelKind = ModelKind.AT1
    split: SplitKind = SplitKind.VOL_DEV
    irreversibility: str = "auto"          # auto | history | <gamma>
    gamma_scale: float = 1.0               # multiplies the resolved gamma
    recovery: str = "auto"                 # auto | <rho>
    tol_ir: float = 0.01
    tol_rec: float = 0.01
    tol_stag: float = 1e-4
    tol_nr: float = 1e-6
    max_stag_iters: int = 2000
    res_stag_norm: str = "lumped"
    anderson_depth: int = 5                # 0: plain alternate minimization
    # mesh: a file, or generator parameters on top of a preset
    mesh_file: str | None = None
    preset: str = "desk"                   # desk | full (shear test only)
    length_scale: float | None = None
    h_fine: float | None = None
    h_coarse: float | None = None
    h_crack: float | None = None
    # loading; first/increment default to the preset's scaled schedule
    first: float | None = None
    increment: float | None = None
    n_loading: int = 20
    n_unloading: int = 13
    unload_factor: float = 3.0
    pressure: float = 0.1
    stations: int = 41
    # 1D profiles and sweeps
    ratio: float = 20.0
    penalty: float = 1e4
    points: int = 401
    s_min: float = 1e2
    s_max: float = 1e6
    n_sweep: int = 41
    # penalty tables
    toughness: float | None = None
    half_length: float | None = None
    out: str = "out"
    name: str = "run"

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ConfigurationError(f"benchmark must be one of {BENCHMARKS}, got {self.benchmark!r}")
        if self.preset not in ("desk", "full"):
            raise ConfigurationError(f"preset must be 'desk' or 'full', got {self.preset!r}")
        if not self.gamma_scale > 0:
            raise ConfigurationError("gamma_scale must be positive")
        for k in ("points", "n_sweep", "stations"):
            if getattr(self, k) < 2:
                raise ConfigurationError(f"{k} must be at least 2")


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, text):
    kind = _TYPES[key]
    text = text.strip()
    try:
        if kind == "ModelKind":
            return ModelKind(text)
        if kind == "SplitKind":
            return SplitKind(text)
        if text.lower() in ("", "none") and "None" in kind:
            return None
        if kind.startswith("float"):
            return float(text)
        if kind.startswith("int"):
            return int(text)
        return text
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key}: {text!r}") from exc


def _apply(base: RunConfig, section) -> RunConfig:
    updates = {}
    for key, value in section.items():
        if key not in _TYPES:
            raise ConfigurationError(f"unknown configuration key {key!r}")
        updates[key] = _coerce(key, value)
    return replace(base, **updates)


def parse_config(text: str, defaults: RunConfig | None = None) -> list[RunConfig]:
    """All runs described by ``text``: the base run, or one per sweep section."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration: {exc}") from exc
    unknown = [s for s in cp.sections() if s != "run" and not s.startswith("sweep.")]
    if unknown:
        raise ConfigurationError(f"unknown sections {unknown}")
    base = defaults or RunConfig()
    if cp.has_section("run"):
        base = _apply(base, cp["run"])
    sweeps = [s for s in cp.sections() if s.startswith("sweep.")]
    if not sweeps:
        return [base]
    runs = []
    for s in sweeps:
        name = s.split(".", 1)[1]
        if not name or "/" in name:
            raise ConfigurationError(f"bad sweep name {s!r}")
        runs.append(replace(_apply(base, cp[s]), name=name))
    return runs


def load_config(path, defaults: RunConfig | None = None) -> list[RunConfig]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config(text, defaults)
