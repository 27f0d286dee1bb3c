"""Profile, diagnostics and JSON artifacts with lossless float formatting."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, GridError
from .grid import FieldPair, PhysParams, build_grid

FLOAT_FMT = "%.17g"
DIAG_HEADER = "t,M,K,P,E,G,H,Vchi,Mchi,localmass,spacetime_accum"
PROFILE_FORMATS = ("csv", "bin")


def _plain(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val if math.isfinite(val) else None
    return obj


def dumps_json(obj):
    """Deterministic JSON: insertion key order, shortest round-trip float repr."""
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _coord_names(grid):
    if grid.is_radial:
        return ["r"]
    return ["x", "y"][: grid.d]


def _columns(fields):
    real = not (np.any(fields.u.imag) or np.any(fields.v.imag))
    if real:
        return ["phi", "psi"], [fields.u.real, fields.v.real]
    return (
        ["u_re", "u_im", "v_re", "v_im"],
        [fields.u.real, fields.u.imag, fields.v.real, fields.v.imag],
    )


def _sidecar_path(path):
    return Path(path).with_suffix(".json")


def write_profile(path, fields, params, d_omega=None, fmt=None, extra=None):
    """Write ``fields`` to ``path`` (``.csv`` or ``.bin``) plus a JSON sidecar.

    Returns the pair of written paths.
    """
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".") or "csv"
    if fmt not in PROFILE_FORMATS:
        raise ConfigError(f"unknown profile format {fmt!r}; expected one of {PROFILE_FORMATS}", key="output.format")
    path = path.with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = fields.grid
    names, cols = _columns(fields)
    coords = [c.ravel() for c in grid.coords] if not grid.is_radial else [grid.radius.ravel()]
    data = [c.ravel() for c in cols]
    if fmt == "csv":
        header = ",".join(["index"] + _coord_names(grid) + names)
        lines = [header]
        for i in range(grid.size):
            vals = [FLOAT_FMT % c[i] for c in coords] + [FLOAT_FMT % c[i] for c in data]
            lines.append(",".join([str(i)] + vals))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        np.stack(data).astype("<f8").tofile(path)
    meta = {
        "format": fmt,
        "columns": names,
        "grid": grid.spec(),
        "params": params.as_dict(),
        "d_omega": d_omega,
    }
    if extra:
        meta.update(extra)
    side = write_json(_sidecar_path(path), meta)
    return path, side


def read_profile(path):
    """Read a profile written by :func:`write_profile`.

    ``path`` may name the data file or its JSON sidecar. Returns
    ``(fields, params, meta)``.
    """
    path = Path(path)
    side = _sidecar_path(path)
    if not side.exists():
        raise FileNotFoundError(f"profile sidecar not found: {side}")
    meta = read_json(side)
    data_path = path.with_suffix("." + meta["format"])
    if not data_path.exists():
        raise FileNotFoundError(f"profile data not found: {data_path}")
    spec = meta["grid"]
    p = PhysParams(**meta["params"])
    grid = build_grid(spec["kind"], spec["d"], spec["extent"], spec["counts"], alpha=p.alpha)
    ncol = len(meta["columns"])
    if meta["format"] == "csv":
        table = np.loadtxt(data_path, delimiter=",", skiprows=1, dtype=float, ndmin=2)
        if table.shape[0] != grid.size:
            raise GridError(f"{data_path}: {table.shape[0]} rows, grid has {grid.size} nodes")
        cols = table[:, -ncol:].T
    else:
        flat = np.fromfile(data_path, dtype="<f8")
        if flat.size != ncol * grid.size:
            raise GridError(f"{data_path}: {flat.size} values, expected {ncol * grid.size}")
        cols = flat.reshape(ncol, grid.size)
    cols = [c.reshape(grid.shape) for c in cols]
    if ncol == 2:
        fields = FieldPair(cols[0], cols[1], grid)
    else:
        fields = FieldPair(cols[0] + 1j * cols[1], cols[2] + 1j * cols[3], grid)
    return fields, p, meta


def write_diagnostics(path, diag):
    """Diagnostics table ``(n_rows, 11)`` as CSV with the fixed header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    diag = np.atleast_2d(np.asarray(diag, dtype=float))
    lines = [DIAG_HEADER]
    lines += [",".join(FLOAT_FMT % x for x in row) for row in diag]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_diagnostics(path):
    """Return a dict ``column -> array`` from a diagnostics CSV."""
    table = np.loadtxt(path, delimiter=",", skiprows=1, dtype=float, ndmin=2)
    return {name: table[:, i] for i, name in enumerate(DIAG_HEADER.split(","))}


def write_table(path, header, rows):
    """Generic CSV writer; floats use the lossless format, everything else ``str``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def fmt(x):
        if isinstance(x, (bool, np.bool_)):
            return "true" if x else "false"
        if isinstance(x, (float, np.floating)):
            return FLOAT_FMT % x
        if x is None:
            return ""
        return str(x)

    lines = [",".join(header)] + [",".join(fmt(row.get(h)) for h in header) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
