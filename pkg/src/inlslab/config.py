"""Run configuration: TOML parsing, environment overrides, canonical re-serialization."""
from __future__ import annotations

import copy
import math
import os
import re
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .exceptions import ConfigError
from .grid import alpha_gate_message

ENV_PREFIX = "INLSLAB_"
_REQUIRED = object()

# section -> key -> (type, default); ``_REQUIRED`` marks mandatory keys
SCHEMA = {
    "params": {
        "d": (int, _REQUIRED),
        "alpha": (float, _REQUIRED),
        "kappa": (float, 1.0),
        "gamma": (float, 0.0),
        "omega": (float, 1.0),
    },
    "grid": {
        "kind": (str, "radial"),
        "extent": (float, 12.0),
        "counts": (list, [32000]),
    },
    "solver": {
        "tol": (float, 1e-8),
        "max_iter": (int, 50000),
        "init": (str, "gaussian"),
        "seed": (int, 0),
    },
    "evolve": {
        "dt": (float, None),
        "t_end": (float, 1.0),
        "dt_min": (float, 1e-9),
        "diag_stride": (int, 10),
        "cutoff_R": (float, None),
        "blowup_K_factor": (float, 1e3),
        "snapshot_stride": (int, 0),
        "energy_tol": (float, 1e-8),
        "adaptive": (bool, True),
        "init": (str, "ground_state"),
        "profile": (str, None),
        "amplitude": (float, 1.0),
        "width": (float, 1.0),
        "phase_k": (float, 0.0),
    },
    "classify": {
        "state": (str, None),
        "ground_state": (str, None),
        "wp": (float, None),
    },
    "sweep": {
        "axis": (str, None),
        "values": (list, None),
        "task": (str, "ground_state"),
        "cap": (int, 1000),
        "evolve": (bool, False),
    },
    "output": {
        "directory": (str, "out"),
        "format": (str, "csv"),
    },
}

SECTION_ORDER = tuple(SCHEMA)
CHOICES = {
    ("grid", "kind"): ("radial", "cartesian"),
    ("solver", "init"): ("gaussian", "wide", "random"),
    ("evolve", "init"): ("ground_state", "gaussian", "profile"),
    ("sweep", "axis"): ("alpha", "omega", "kappa", "gamma", "mu"),
    ("sweep", "task"): ("ground_state", "classify"),
    ("output", "format"): ("csv", "bin"),
}


def _locate(text, section, key):
    """1-based line of ``key`` inside ``[section]`` (or of the section header), else ``None``."""
    if text is None:
        return None
    current = None
    header_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        m = re.match(r"^\[\s*([A-Za-z0-9_.\-]+)\s*\]$", line)
        if m:
            current = m.group(1)
            if current == section:
                header_line = lineno
            continue
        if current == section and key is not None and re.match(rf"^{re.escape(key)}\s*=", line):
            return lineno
    return header_line


def _fail(msg, text, section, key):
    name = f"{section}.{key}" if key else section
    raise ConfigError(msg, key=name, line=_locate(text, section, key))


def _coerce(value, kind, section, key, text):
    if value is None:
        return None
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(f"expected a number, got {value!r}", text, section, key)
        value = float(value)
        if not math.isfinite(value):
            _fail(f"expected a finite number, got {value!r}", text, section, key)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            _fail(f"expected an integer, got {value!r}", text, section, key)
        return int(value)
    if kind is bool:
        if not isinstance(value, bool):
            _fail(f"expected true or false, got {value!r}", text, section, key)
        return value
    if kind is str:
        if not isinstance(value, str):
            _fail(f"expected a string, got {value!r}", text, section, key)
        return value
    if kind is list:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, list):
            _fail(f"expected a list, got {value!r}", text, section, key)
        return list(value)
    raise TypeError(kind)


def _apply_env(raw, environ):
    """Overrides like ``INLSLAB_PARAMS__ALPHA=0.5``; values use TOML literal syntax."""
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX):
            continue
        parts = name[len(ENV_PREFIX):].lower().split("__")
        if len(parts) != 2 or parts[0] not in SCHEMA or parts[1] not in SCHEMA[parts[0]]:
            raise ConfigError(f"unknown override {name}", key=name)
        text = environ[name]
        try:
            value = tomllib.loads(f"v = {text}")["v"]
        except tomllib.TOMLDecodeError:
            value = text
        raw.setdefault(parts[0], {})[parts[1]] = value


def validate(raw, text=None):
    """Fill defaults, coerce types and check ranges; returns a new nested dict."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    for section in raw:
        if section not in SCHEMA:
            _fail(f"unknown section [{section}]", text, section, None)
    cfg = {}
    for section, keys in SCHEMA.items():
        given = raw.get(section, {})
        if not isinstance(given, dict):
            _fail("expected a table", text, section, None)
        for key in given:
            if key not in keys:
                _fail(f"unknown key {key!r}", text, section, key)
        out = {}
        for key, (kind, default) in keys.items():
            if key in given:
                out[key] = _coerce(given[key], kind, section, key, text)
            elif default is _REQUIRED:
                if section == "params":
                    _fail("missing required key", text, section, key)
                out[key] = None
            else:
                out[key] = copy.deepcopy(default)
            allowed = CHOICES.get((section, key))
            if allowed and out[key] is not None and out[key] not in allowed:
                _fail(f"expected one of {allowed}, got {out[key]!r}", text, section, key)
        cfg[section] = out
    _check_ranges(cfg, text)
    return cfg


def _check_ranges(cfg, text):
    par = cfg["params"]
    if not 1 <= par["d"] <= 5:
        _fail(f"d must be in 1..5, got {par['d']}", text, "params", "d")
    msg = alpha_gate_message(par["d"], par["alpha"])
    if msg is not None:
        _fail(msg, text, "params", "alpha")
    for key in ("kappa", "omega"):
        if not par[key] > 0:
            _fail(f"{key} must be positive, got {par[key]}", text, "params", key)
    grid = cfg["grid"]
    if not grid["extent"] > 0:
        _fail("extent must be positive", text, "grid", "extent")
    counts = grid["counts"]
    if not counts or any(isinstance(c, bool) or not isinstance(c, int) or c < 16 for c in counts):
        _fail(f"counts must be integers >= 16, got {counts}", text, "grid", "counts")
    sol = cfg["solver"]
    if not 0 < sol["tol"] < 1:
        _fail("tol must lie in (0, 1)", text, "solver", "tol")
    if sol["max_iter"] < 1:
        _fail("max_iter must be positive", text, "solver", "max_iter")
    if not 0 <= sol["seed"] < 2 ** 64:
        _fail("seed must be an unsigned 64-bit integer", text, "solver", "seed")
    ev = cfg["evolve"]
    for key in ("dt", "t_end", "dt_min", "blowup_K_factor", "energy_tol", "width", "cutoff_R"):
        if ev[key] is not None and not ev[key] > 0:
            _fail(f"{key} must be positive", text, "evolve", key)
    if ev["diag_stride"] < 1:
        _fail("diag_stride must be positive", text, "evolve", "diag_stride")
    if ev["snapshot_stride"] < 0:
        _fail("snapshot_stride must be nonnegative", text, "evolve", "snapshot_stride")
    sw = cfg["sweep"]
    if sw["values"] is not None:
        for v in sw["values"]:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                _fail(f"sweep values must be numbers, got {v!r}", text, "sweep", "values")
        sw["values"] = [float(v) for v in sw["values"]]
    if sw["cap"] < 1:
        _fail("cap must be positive", text, "sweep", "cap")


def loads(text, environ=None):
    """Parse TOML ``text``; ``environ`` (default ``os.environ``) supplies overrides."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"syntax error: {exc}", line=line) from exc
    _apply_env(raw, os.environ if environ is None else environ)
    return validate(raw, text)


def load(path, environ=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", key="--config") from exc
    return loads(text, environ)


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, list):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def dumps(cfg):
    """Canonical TOML: fixed section and key order, defaults explicit, unset keys omitted."""
    lines = []
    for section in SECTION_ORDER:
        body = [f"{key} = {_format_value(cfg[section][key])}"
                for key in SCHEMA[section] if cfg[section].get(key) is not None]
        if not body:
            continue
        if lines:
            lines.append("")
        lines.append(f"[{section}]")
        lines.extend(body)
    return "\n".join(lines) + "\n"
