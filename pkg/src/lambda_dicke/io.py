"""Run configuration and deterministic data-file emission.

Configuration is TOML with one table per concern::

    [model]        delta, Delta, omega1, omega2, g1, g2
    [thermo]       exactly one of kT_over_Delta, kT, beta (number or list)
    [axes.g1]      min, max, points, scale_by_critical   (likewise axes.g2)
    [grid]         points, y1_max, y2_max
    [boundary]     axis, lo, hi, rtol, scale_by_critical
    [run]          format, spinodals, metastable, workers, out
    [meta]         written to sidecars, ignored on input

Every emitted data file gets a sidecar ``<basename>.toml`` holding the
effective configuration, which reproduces the run when fed back.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from . import __version__
from .minimizer import GRAD_TOL, STEP_TOL, TIE_TOL
from .model import ModelParams, ParameterError, critical_coupling, validate

DEFAULT_MODEL = dict(delta=0.1, Delta=1.0, omega1=1.1, omega2=0.8, g1=0.0, g2=0.0)
TEMPERATURE_KEYS = ("kT_over_Delta", "kT", "beta")
OBS_COLUMNS = ("n1", "n2", "p11", "p22", "p33", "c13", "c23", "c12", "f0")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class AxisSpec:
    name: str
    min: float
    max: float
    points: int
    scale_by_critical: bool = False

    def __post_init__(self):
        if self.name not in ("g1", "g2"):
            raise ConfigError(f"axes.{self.name}: unknown axis (expected g1 or g2)")
        if not isinstance(self.points, int) or self.points < 2:
            raise ConfigError(f"axes.{self.name}.points: need an integer >= 2")
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or self.min < 0:
            raise ConfigError(f"axes.{self.name}: min/max must be finite and min >= 0")
        if self.max < self.min:
            raise ConfigError(f"axes.{self.name}: max < min")

    @property
    def column(self) -> str:
        return f"{self.name}_over_{self.name}c" if self.scale_by_critical else self.name

    def coordinates(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.points)

    def couplings(self, params: ModelParams) -> np.ndarray:
        """Absolute coupling values for the stored coordinates."""
        x = self.coordinates()
        if self.scale_by_critical:
            return x * critical_coupling(params, int(self.name[1]))
        return x

    def as_dict(self) -> dict:
        return dict(min=self.min, max=self.max, points=self.points,
                    scale_by_critical=self.scale_by_critical)


@dataclass(frozen=True)
class BoundarySpec:
    axis: str = "g1"
    lo: float = 0.0
    hi: float = 2.0
    rtol: float = 1e-8
    scale_by_critical: bool = True

    def __post_init__(self):
        if self.axis not in ("g1", "g2"):
            raise ConfigError("boundary.axis: expected g1 or g2")
        if not self.lo < self.hi:
            raise ConfigError("boundary: need lo < hi")
        if not self.rtol > 0:
            raise ConfigError("boundary.rtol: must be positive")

    def bracket(self, params: ModelParams):
        s = critical_coupling(params, int(self.axis[1])) if self.scale_by_critical else 1.0
        return self.lo * s, self.hi * s

    def as_dict(self) -> dict:
        return dict(axis=self.axis, lo=self.lo, hi=self.hi, rtol=self.rtol,
                    scale_by_critical=self.scale_by_critical)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=lambda: ModelParams(**DEFAULT_MODEL))
    temperature_key: str = "kT_over_Delta"
    temperatures: tuple = (0.25,)
    axes: tuple = ()
    grid_points: int = 401
    y1_max: float | None = None
    y2_max: float | None = None
    boundary: BoundarySpec = field(default_factory=BoundarySpec)
    format: str = "csv"
    spinodals: bool = False
    metastable: bool = False
    workers: int = 1
    out: str = "."

    def axis(self, name: str) -> AxisSpec | None:
        for a in self.axes:
            if a.name == name:
                return a
        return None

    def with_axis(self, spec: AxisSpec) -> "RunConfig":
        rest = tuple(a for a in self.axes if a.name != spec.name)
        return replace(self, axes=tuple(sorted(rest + (spec,), key=lambda a: a.name)))

    def betas(self) -> list[float]:
        """Inverse temperatures in the order given."""
        return [beta_from(self.temperature_key, t, self.params) for t in self.temperatures]

    def as_dict(self) -> dict:
        """Canonical document; ``workers`` and ``out`` do not affect results."""
        d = {
            "model": self.params.as_dict(),
            "thermo": {self.temperature_key: list(self.temperatures)},
            "axes": {a.name: a.as_dict() for a in self.axes},
            "grid": {"points": self.grid_points},
            "boundary": self.boundary.as_dict(),
            "run": {"format": self.format, "spinodals": self.spinodals,
                    "metastable": self.metastable},
        }
        if self.y1_max is not None:
            d["grid"]["y1_max"] = self.y1_max
        if self.y2_max is not None:
            d["grid"]["y2_max"] = self.y2_max
        if not d["axes"]:
            del d["axes"]
        return d


def beta_from(key: str, value: float, params: ModelParams) -> float:
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"thermo.{key}: values must be positive and finite")
    if key == "kT_over_Delta":
        return 1.0 / (value * params.Delta)
    if key == "kT":
        return 1.0 / value
    return float(value)


_SCHEMA = {
    "model": {k: float for k in DEFAULT_MODEL},
    "thermo": {k: "temps" for k in TEMPERATURE_KEYS},
    "grid": {"points": int, "y1_max": float, "y2_max": float},
    "boundary": {"axis": str, "lo": float, "hi": float, "rtol": float,
                 "scale_by_critical": bool},
    "run": {"format": str, "spinodals": bool, "metastable": bool, "workers": int, "out": str},
}
_AXIS_SCHEMA = {"min": float, "max": float, "points": int, "scale_by_critical": bool}


def _line_of(text: str, section: str, key: str) -> int | None:
    """Best-effort line number of ``key`` inside table ``section``."""
    current = ""
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line.startswith("[") and line.endswith("]"):
            current = line.strip("[]").strip()
            if not key and current == section:
                return no
            continue
        if key and current == section and line.split("=", 1)[0].strip() == key:
            return no
    return None


def _where(text: str, section: str, key: str = "") -> str:
    no = _line_of(text, section, key)
    name = f"{section}.{key}" if key else section
    return f"{name} (line {no})" if no else name


def _coerce(value, kind, where: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true or false, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    # temperatures: number or non-empty list of numbers
    items = value if isinstance(value, list) else [value]
    if not items:
        raise ConfigError(f"{where}: empty temperature list")
    return tuple(_coerce(v, float, where) for v in items)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Build a :class:`RunConfig` from TOML text; raises :class:`ConfigError`."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return config_from_dict(doc, text, source)


def config_from_dict(doc: dict, text: str = "", source: str = "<config>") -> RunConfig:
    values: dict = {}
    for section, body in doc.items():
        if section == "meta":
            continue
        if section == "axes":
            if not isinstance(body, dict):
                raise ConfigError(f"{source}: {_where(text, 'axes')}: expected a table")
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section {_where(text, section)}")
        if not isinstance(body, dict):
            raise ConfigError(f"{source}: {_where(text, section)}: expected a table")
        for key, value in body.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {_where(text, section, key)}")
            values[(section, key)] = _coerce(value, _SCHEMA[section][key],
                                             f"{source}: {_where(text, section, key)}")

    model = dict(DEFAULT_MODEL)
    model.update({k: v for (s, k), v in values.items() if s == "model"})
    params = ModelParams(**model)
    try:
        validate(params)
    except ParameterError as exc:
        raise ConfigError(f"{source}: model: {exc}") from None

    temps = [(k, v) for (s, k), v in values.items() if s == "thermo"]
    if len(temps) > 1:
        raise ConfigError(f"{source}: thermo: give only one of {', '.join(TEMPERATURE_KEYS)}")
    tkey, tvals = temps[0] if temps else ("kT_over_Delta", (0.25,))
    for t in tvals:
        beta_from(tkey, t, params)

    axes = []
    for name, body in sorted(doc.get("axes", {}).items()):
        sect = f"axes.{name}"
        if not isinstance(body, dict):
            raise ConfigError(f"{source}: {_where(text, sect)}: expected a table")
        for key in body:
            if key not in _AXIS_SCHEMA:
                raise ConfigError(f"{source}: unknown key {_where(text, sect, key)}")
        missing = [k for k in ("min", "max", "points") if k not in body]
        if missing:
            raise ConfigError(f"{source}: {_where(text, sect)}: missing {', '.join(missing)}")
        kw = {k: _coerce(v, _AXIS_SCHEMA[k], f"{source}: {_where(text, sect, k)}")
              for k, v in body.items()}
        try:
            axes.append(AxisSpec(name, **kw))
        except ConfigError as exc:
            raise ConfigError(f"{source}: {exc}") from None

    grid_points = values.get(("grid", "points"), 401)
    if grid_points < 3:
        raise ConfigError(f"{source}: {_where(text, 'grid', 'points')}: need at least 3")
    for key in ("y1_max", "y2_max"):
        v = values.get(("grid", key))
        if v is not None and not (math.isfinite(v) and v >= 0):
            raise ConfigError(f"{source}: {_where(text, 'grid', key)}: must be >= 0")
    bkw = {k: v for (s, k), v in values.items() if s == "boundary"}
    try:
        boundary = BoundarySpec(**bkw)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    fmt = values.get(("run", "format"), "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"{source}: {_where(text, 'run', 'format')}: expected csv or json")
    workers = values.get(("run", "workers"), 1)
    if workers < 1:
        raise ConfigError(f"{source}: {_where(text, 'run', 'workers')}: must be >= 1")
    return RunConfig(
        params=params, temperature_key=tkey, temperatures=tuple(tvals), axes=tuple(axes),
        grid_points=grid_points, y1_max=values.get(("grid", "y1_max")),
        y2_max=values.get(("grid", "y2_max")), boundary=boundary, format=fmt,
        spinodals=values.get(("run", "spinodals"), False),
        metastable=values.get(("run", "metastable"), False),
        workers=workers, out=values.get(("run", "out"), "."),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def format_value(v) -> str:
    """17 significant digits for floats, which round-trip exactly."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def _json_value(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def metadata(config: RunConfig, command: str) -> dict:
    d = config.as_dict()
    d["meta"] = {
        "command": command,
        "version": __version__,
        "tolerances": {"grad": GRAD_TOL, "step": STEP_TOL, "tie": TIE_TOL},
    }
    return d


def emit(columns, rows, basename, fmt: str = "csv", meta: dict | None = None) -> Path:
    """Write ``rows`` under ``basename`` plus a ``.toml`` sidecar.

    Returns the data-file path.  Output depends only on its arguments.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    base = Path(basename)
    data_path = base.with_suffix("." + fmt)
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        with open(data_path, "w", newline="") as fh:
            if fmt == "csv":
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(columns)
                for row in rows:
                    w.writerow([format_value(v) for v in row])
            else:
                recs = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
                json.dump({"columns": list(columns), "rows": recs}, fh, indent=1)
                fh.write("\n")
        if meta is not None:
            with open(base.with_suffix(".toml"), "wb") as fh:
                tomli_w.dump(meta, fh)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {exc.filename or data_path}: {exc.strerror}") from None
    return data_path


def read_csv(path):
    """Parse an emitted CSV back into (columns, rows of str)."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        columns = next(r)
        return columns, [row for row in r]
