"""Line-oriented experiment configuration.

Schema (``#`` starts a comment; section and key order are free)::

    [run]
    model = one_detector        # one_detector | two_detector | full_continuous | full_hitting
    preset = gamma_2            # optional: gamma_micro | gamma_1 | gamma_2
    p0 = 2/3                    # initial |c_R|^2; fractions allowed
    t_max = 40 ns
    n_paths = 1000
    seed = 12345
    dt = 0.5 ps                 # optional
    epsilon = 1e-3              # optional, default 1/n_paths
    record_stride = 40          # optional
    threads = 4                 # optional, execution only

    [detector]
    a = 1 mm                    # pointer shift
    gamma = 0.5e11 cm^-2 s^-1
    T = 5 ns                    # activation time, 0 = instantaneous

    [observables]               # full models; default A1 = 0 a
    A1 = 0 1 mm
    A2 = 1 0 mm

    [hitting]                   # full_hitting only
    alpha = 100 cm^-2
    lambda = 1e9 s^-1

Internally lengths are cm and times are s.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Optional

from .core import HittingConfig, ObservableSet
from .detectors import DetectorParams
from .engine import FullModelParams, Model, RunConfig
from .errors import ConfigParseError, ConfigurationError

PRESETS = {
    "gamma_micro": {"gamma": 0.5e-9},
    "gamma_1": {"gamma": 0.5e14, "a": 1.0},
    "gamma_2": {"gamma": 0.5e11, "a": 0.1},
}

PRESET_NOTES = {
    "gamma_micro": "single-constituent strength; lambda = 1e-17 s^-1, alpha^-1/2 = 1e-4 cm",
    "gamma_1": "1 cm^3 pointer (1e23 constituents), shift a = 1 cm",
    "gamma_2": "1 mm^3 pointer (1e20 constituents), shift a = 1 mm",
}

LENGTH_UNITS = {"cm": 1.0, "mm": 0.1, "m": 100.0, "um": 1e-4, "nm": 1e-7}
TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15}
GAMMA_UNITS = {"cm^-2 s^-1": 1.0}
ALPHA_UNITS = {"cm^-2": 1.0}
RATE_UNITS = {"s^-1": 1.0, "Hz": 1.0}

# section -> key -> (attribute, kind)
SCHEMA = {
    "run": {
        "model": ("model", "model"),
        "preset": ("preset", "preset"),
        "p0": ("p0", "number"),
        "t_max": ("t_max", "time"),
        "n_paths": ("n_paths", "int"),
        "seed": ("seed", "int"),
        "dt": ("dt", "time"),
        "epsilon": ("epsilon", "number"),
        "record_stride": ("record_stride", "int"),
        "threads": ("threads", "int"),
    },
    "detector": {
        "a": ("a", "length"),
        "gamma": ("gamma", "gamma"),
        "T": ("T", "time"),
    },
    "hitting": {
        "alpha": ("alpha", "alpha"),
        "lambda": ("lam", "rate"),
    },
}

REQUIRED = ("run.model", "run.p0", "run.t_max")

_UNIT_TABLES = {
    "length": LENGTH_UNITS,
    "time": TIME_UNITS,
    "gamma": GAMMA_UNITS,
    "alpha": ALPHA_UNITS,
    "rate": RATE_UNITS,
}


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    p0: float
    t_max: float
    n_paths: int = 1000
    seed: int = 0
    preset: Optional[str] = None
    a: Optional[float] = None
    gamma: Optional[float] = None
    T: float = 0.0
    observables: Optional[tuple] = None
    alpha: Optional[float] = None
    lam: Optional[float] = None
    dt: Optional[float] = None
    epsilon: Optional[float] = None
    record_stride: Optional[int] = None
    threads: int = 1

    def to_run_config(self) -> RunConfig:
        model = Model(self.model)
        if model in (Model.ONE_DETECTOR, Model.TWO_DETECTOR):
            if self.a is None or self.gamma is None:
                raise ConfigurationError(f"{model.value} needs detector.a and detector.gamma")
            params = DetectorParams(self.a, self.gamma, self.T)
        else:
            if self.observables is not None:
                obs = ObservableSet(self.observables)
            elif self.a is not None:
                obs = ObservableSet([[0.0, self.a]])
            else:
                raise ConfigurationError(f"{model.value} needs [observables] or detector.a")
            if model is Model.FULL_CONTINUOUS:
                if self.gamma is None:
                    raise ConfigurationError("full_continuous needs detector.gamma")
                params = FullModelParams(obs, gamma=self.gamma)
            else:
                if self.alpha is None or self.lam is None:
                    raise ConfigurationError("full_hitting needs hitting.alpha and hitting.lambda")
                params = FullModelParams(obs, hitting=HittingConfig(self.alpha, self.lam))
        return RunConfig(
            model=model,
            params=params,
            p0=self.p0,
            t_max=self.t_max,
            n_paths=self.n_paths,
            dt=self.dt,
            epsilon=self.epsilon,
            master_seed=self.seed,
            record_stride=self.record_stride,
        )


def _number(text: str, key: str, line: int) -> float:
    try:
        if "/" in text:
            return float(Fraction(text.replace(" ", "")))
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigParseError(f"expected a number, got {text!r}", key, line) from None


def _quantity(text: str, kind: str, key: str, line: int) -> float:
    table = _UNIT_TABLES[kind]
    m = re.match(r"^(\S+)\s*(.*)$", text)
    value, unit = m.group(1), m.group(2).strip()
    if not unit:
        return _number(value, key, line)
    if unit not in table:
        raise ConfigParseError(
            f"unit {unit!r} is not a {kind} unit (allowed: {', '.join(table)})", key, line
        )
    return _number(value, key, line) * table[unit]


def _convert(text: str, kind: str, key: str, line: int):
    if kind == "model":
        try:
            return Model(text).value
        except ValueError:
            allowed = ", ".join(m.value for m in Model)
            raise ConfigParseError(f"unknown model {text!r} (allowed: {allowed})", key, line) from None
    if kind == "preset":
        if text not in PRESETS:
            raise ConfigParseError(f"unknown preset {text!r} (allowed: {', '.join(PRESETS)})", key, line)
        return text
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            raise ConfigParseError(f"expected an integer, got {text!r}", key, line) from None
    if kind == "number":
        return _number(text, key, line)
    return _quantity(text, kind, key, line)


def _eigenvalues(text: str, key: str, line: int) -> tuple:
    parts = text.split()
    scale = 1.0
    if parts and parts[-1] in LENGTH_UNITS:
        scale = LENGTH_UNITS[parts.pop()]
    elif parts and re.match(r"^[A-Za-z]", parts[-1]):
        raise ConfigParseError(f"unit {parts[-1]!r} is not a length unit", key, line)
    if not parts:
        raise ConfigParseError("an observable needs at least one eigenvalue", key, line)
    return tuple(_number(p, key, line) * scale for p in parts)


_CHECKS = {
    "p0": (lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]"),
    "t_max": (lambda v: v > 0, "must be positive"),
    "n_paths": (lambda v: v >= 1, "must be >= 1"),
    "dt": (lambda v: v > 0, "must be positive"),
    "epsilon": (lambda v: 0.0 < v < 0.5, "must lie in (0, 0.5)"),
    "record_stride": (lambda v: v >= 1, "must be >= 1"),
    "threads": (lambda v: v >= 1, "must be >= 1"),
    "a": (lambda v: v > 0, "must be positive"),
    "gamma": (lambda v: v > 0, "must be positive"),
    "T": (lambda v: v >= 0, "must be non-negative"),
    "alpha": (lambda v: v > 0, "must be positive"),
    "lam": (lambda v: v > 0, "must be positive"),
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text; every error names the key and line."""
    values = {}
    where = {}
    observables = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^\[(\w+)\]$", line)
        if m:
            section = m.group(1)
            if section not in SCHEMA and section != "observables":
                raise ConfigParseError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if section is None:
            raise ConfigParseError("key outside of any section", key, lineno)
        qualified = f"{section}.{key}"
        if not value:
            raise ConfigParseError("empty value", qualified, lineno)
        if qualified in where:
            raise ConfigParseError(f"duplicate key (first set on line {where[qualified]})", qualified, lineno)
        where[qualified] = lineno
        if section == "observables":
            if not re.match(r"^A\d+$", key):
                raise ConfigParseError("observable keys are A1, A2, ...", qualified, lineno)
            observables[int(key[1:])] = _eigenvalues(value, qualified, lineno)
            continue
        if key not in SCHEMA[section]:
            raise ConfigParseError(f"unknown key (allowed: {', '.join(SCHEMA[section])})", qualified, lineno)
        attr, kind = SCHEMA[section][key]
        converted = _convert(value, kind, qualified, lineno)
        check = _CHECKS.get(attr)
        if check and not check[0](converted):
            raise ConfigParseError(f"value {value!r} {check[1]}", qualified, lineno)
        values[attr] = converted

    missing = [k for k in REQUIRED if k not in where]
    if missing:
        raise ConfigParseError(f"missing required keys: {', '.join(missing)}")

    if observables:
        order = sorted(observables)
        if order != list(range(1, len(order) + 1)):
            raise ConfigParseError("observables must be numbered A1..AK without gaps", "observables")
        rows = [observables[i] for i in order]
        if len({len(r) for r in rows}) != 1:
            raise ConfigParseError("all observables need the same number of eigenvalues", "observables")
        values["observables"] = tuple(rows)

    preset = values.get("preset")
    if preset:
        for attr, v in PRESETS[preset].items():
            values.setdefault(attr, v)

    cfg = ExperimentConfig(**values)
    try:
        cfg.to_run_config()
    except ConfigurationError as exc:
        raise ConfigParseError(str(exc)) from None
    return cfg


def _fmt(v) -> str:
    return repr(float(v))


def emit_config(cfg: ExperimentConfig) -> str:
    """Serialize to the text format; ``parse_config(emit_config(c)) == c``."""
    out = ["[run]", f"model = {cfg.model}"]
    if cfg.preset:
        out.append(f"preset = {cfg.preset}")
    out += [
        f"p0 = {_fmt(cfg.p0)}",
        f"t_max = {_fmt(cfg.t_max)} s",
        f"n_paths = {cfg.n_paths}",
        f"seed = {cfg.seed}",
    ]
    if cfg.dt is not None:
        out.append(f"dt = {_fmt(cfg.dt)} s")
    if cfg.epsilon is not None:
        out.append(f"epsilon = {_fmt(cfg.epsilon)}")
    if cfg.record_stride is not None:
        out.append(f"record_stride = {cfg.record_stride}")
    if cfg.threads != 1:
        out.append(f"threads = {cfg.threads}")
    out += ["", "[detector]"]
    if cfg.a is not None:
        out.append(f"a = {_fmt(cfg.a)} cm")
    if cfg.gamma is not None:
        out.append(f"gamma = {_fmt(cfg.gamma)} cm^-2 s^-1")
    out.append(f"T = {_fmt(cfg.T)} s")
    if cfg.observables is not None:
        out += ["", "[observables]"]
        for m, row in enumerate(cfg.observables, start=1):
            out.append(f"A{m} = {' '.join(_fmt(v) for v in row)} cm")
    if cfg.alpha is not None or cfg.lam is not None:
        out += ["", "[hitting]"]
        if cfg.alpha is not None:
            out.append(f"alpha = {_fmt(cfg.alpha)} cm^-2")
        if cfg.lam is not None:
            out.append(f"lambda = {_fmt(cfg.lam)} s^-1")
    return "\n".join(out) + "\n"


def config_to_dict(cfg: ExperimentConfig) -> dict:
    d = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    if d["observables"] is not None:
        d["observables"] = [list(r) for r in d["observables"]]
    return d


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **changes)
