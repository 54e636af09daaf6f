"""
Run configuration: an INI file with ``[model]``, ``[family]``, ``[run]`` and
``[output]`` sections.

Example::

    [model]
    type = power_law        ; or ideal_gas
    A0 = 1
    m = -0.6666666666666666
    rho_range = 1e-3, 1e3

    [family]
    lambda = 1
    alpha0 = 1
    alpha2 = -2
    t0 = 1
    x0 = 0

    [run]
    t = 0, 2.7, 3.75
    rho_points = 4001

    [output]
    dir = out
    formats = csv, json, svg

``ideal_gas`` takes ``n``, optional ``R`` (default 1) and ``s0`` (default 0).
Numbers are parsed with ``float``; lists are comma separated.  Every error
names the offending ``section.key``.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, GasfoldError
from .family import SolutionFamily
from .thermo import (
    DEFAULT_RHO_RANGE,
    HomentropicModel,
    IdealGasParams,
    ThermodynamicModel,
    homentropic_reduce,
    ideal_gas_model,
    power_law_model,
)

__all__ = ["RunConfig", "load_config", "parse_config", "parse_formats", "FORMATS"]

FORMATS = ("csv", "json", "svg")
MODEL_TYPES = ("ideal_gas", "power_law")

_KNOWN = {
    "model": {"type", "n", "r", "s0", "a0", "m", "rho_range"},
    "family": {"lambda", "alpha0", "alpha2", "t0", "x0"},
    "run": {"t", "rho_points", "rho_range", "dt", "t_span", "branch", "cut", "perturb_m",
            "t_window", "mass_window", "mass_t", "x_range"},
    "output": {"dir", "formats"},
}


@dataclass
class RunConfig:
    model_type: str
    thermo_model: ThermodynamicModel | None
    hm: HomentropicModel
    family: SolutionFamily | None
    model_params: dict
    run: dict = field(default_factory=dict)
    out_dir: Path = Path(".")
    formats: tuple = ("csv",)

    def require_family(self):
        if self.family is None:
            raise ConfigError("section [family] is required for this command")
        return self.family


_DISPLAY = {"a0": "A0", "r": "R"}


class _Section:
    def __init__(self, parser, name):
        self.name = name
        self.data = parser[name] if parser.has_section(name) else {}

    def label(self, key):
        return f"{self.name}.{_DISPLAY.get(key, key)}"

    def has(self, key):
        return key in self.data

    def raw(self, key):
        return self.data[key].strip()

    def number(self, key, default=None):
        if not self.has(key):
            if default is None:
                raise ConfigError(f"{self.label(key)}: required key is missing")
            return float(default)
        text = self.raw(key)
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{self.label(key)}: expected a number, got {text!r}") from None

    def integer(self, key, default):
        value = self.number(key, default)
        if value != int(value) or value < 2:
            raise ConfigError(f"{self.label(key)}: expected an integer >= 2, got {self.raw(key)!r}")
        return int(value)

    def numbers(self, key, default=None, length=None):
        if not self.has(key):
            if default is None:
                raise ConfigError(f"{self.label(key)}: required key is missing")
            return tuple(float(v) for v in default)
        text = self.raw(key).strip("[]()")
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            values = tuple(float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{self.label(key)}: expected comma-separated numbers, got {self.raw(key)!r}") from None
        if not values:
            raise ConfigError(f"{self.label(key)}: empty list")
        if length is not None and len(values) != length:
            raise ConfigError(f"{self.label(key)}: expected {length} numbers, got {len(values)}")
        return values

    def range(self, key, default=None, positive=False):
        lo, hi = self.numbers(key, default, length=2)
        if not lo < hi:
            raise ConfigError(f"{self.label(key)}: range is empty ({lo!r} >= {hi!r})")
        if positive and not lo > 0:
            raise ConfigError(f"{self.label(key)}: density range must be positive")
        return lo, hi

    def choice(self, key, options, default):
        value = self.raw(key) if self.has(key) else default
        if value not in options:
            raise ConfigError(f"{self.label(key)}: expected one of {', '.join(options)}, got {value!r}")
        return value

    def flag(self, key, default=False):
        if not self.has(key):
            return default
        text = self.raw(key).lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{self.label(key)}: expected a boolean, got {self.raw(key)!r}")


def _check_unknown(parser):
    for name in parser.sections():
        if name not in _KNOWN:
            raise ConfigError(f"unknown section [{name}]")
        for key in parser[name]:
            if key not in _KNOWN[name]:
                raise ConfigError(f"{name}.{_DISPLAY.get(key, key)}: unknown key")


def _build_model(sec: _Section):
    kind = sec.choice("type", MODEL_TYPES, None) if sec.has("type") else None
    if kind is None:
        raise ConfigError("model.type: required key is missing")
    rho_range = sec.range("rho_range", DEFAULT_RHO_RANGE, positive=True)
    try:
        if kind == "ideal_gas":
            params = IdealGasParams(sec.number("n"), sec.number("r", 1.0), sec.number("s0", 0.0))
            model = ideal_gas_model(params)
            hm = homentropic_reduce(model, params.s0, rho_range)
            info = {"type": kind, "n": params.n, "R": params.R, "s0": params.s0,
                    "m": params.m, "A0": params.A0, "rho_range": list(rho_range)}
            return model, hm, info
        A0, m = sec.number("a0"), sec.number("m")
        hm = power_law_model(A0, m, rho_range)
        return None, hm, {"type": kind, "A0": A0, "m": m, "rho_range": list(rho_range)}
    except ConfigError:
        raise
    except GasfoldError as exc:
        raise ConfigError(f"model: {exc}") from None


def parse_config(text, source="<config>"):
    """Parse configuration text into a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        On syntax errors (with the line number) and on missing, unknown or
        malformed keys (naming ``section.key``).
    """
    if not text.strip():
        raise ConfigError(f"{source}: configuration is empty")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}, line {exc.lineno}: expected a [section] header, got {exc.line.strip()!r}") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        # some Python versions store the offending line as its repr
        line = line.strip().strip("'\"").replace("\\n", "").strip()
        raise ConfigError(f"{source}, line {lineno}: expected 'key = value', got {line!r}") from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"{source}, line {exc.lineno}: duplicate key {exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"{source}, line {exc.lineno}: duplicate section [{exc.section}]") from None
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    _check_unknown(parser)
    if not parser.has_section("model"):
        raise ConfigError("model.type: section [model] is missing")

    model, hm, info = _build_model(_Section(parser, "model"))

    family = None
    if parser.has_section("family"):
        fs = _Section(parser, "family")
        family = SolutionFamily(
            lam=fs.number("lambda", 1.0),
            alpha0=fs.number("alpha0"),
            alpha2=fs.number("alpha2"),
            t0=fs.number("t0"),
            x0=fs.number("x0", 0.0),
            hm=hm,
        )

    rs = _Section(parser, "run")
    lo, hi = hm.rho_range
    run = {
        "t": rs.numbers("t") if rs.has("t") else None,
        "rho_points": rs.integer("rho_points", 4001),
        "rho_range": rs.range("rho_range", (max(lo, 1e-3), min(hi, 1e3)), positive=True),
        "dt": rs.number("dt", 0.01),
        "t_span": rs.number("t_span", 3.0),
        "branch": rs.choice("branch", ("plus", "minus", "both"), "plus"),
        "cut": rs.flag("cut", False),
        "perturb_m": rs.number("perturb_m", 0.0),
        "t_window": rs.range("t_window", (1.0, 6.0)),
        "mass_window": rs.range("mass_window", (-6.0, -2.5)),
        "mass_t": rs.range("mass_t", (2.1, 3.1)),
        "x_range": rs.range("x_range") if rs.has("x_range") else None,
    }
    if not run["dt"] > 0:
        raise ConfigError("run.dt: must be positive")
    if not run["t_span"] > 0:
        raise ConfigError("run.t_span: must be positive")
    r_lo, r_hi = run["rho_range"]
    if r_lo < lo or r_hi > hi:
        raise ConfigError(f"run.rho_range: must lie inside model.rho_range [{lo!r}, {hi!r}]")

    os_ = _Section(parser, "output")
    out_dir = Path(os_.raw("dir")) if os_.has("dir") else Path(".")
    formats = ("csv",)
    if os_.has("formats"):
        formats = parse_formats(os_.raw("formats"), "output.formats")
    return RunConfig(info["type"], model, hm, family, info, run, out_dir, formats)


def parse_formats(text, where):
    items = tuple(dict.fromkeys(p.strip().lower() for p in text.split(",") if p.strip()))
    if not items:
        raise ConfigError(f"{where}: empty list")
    bad = [f for f in items if f not in FORMATS]
    if bad:
        raise ConfigError(f"{where}: unknown format {bad[0]!r} (choose from {', '.join(FORMATS)})")
    return items


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    return parse_config(text, str(path))
