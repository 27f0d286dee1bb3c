"""Input-validation helpers shared by the estimators, the solvers and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .exceptions import GridError, NonFinite, ParameterError


def check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value <= 0:
        raise ParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_positive(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_tolerance(value, name="tol"):
    value = check_positive(value, name)
    if value >= 1.0:
        raise ParameterError(f"{name} must be below 1, got {value!r}")
    return value


def check_finite_array(arr, name):
    arr = np.asarray(arr)
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains non-finite samples")
    return arr


def check_conforming(arr, grid, name):
    arr = np.asarray(arr)
    if arr.shape != grid.shape:
        raise GridError(f"{name} has shape {arr.shape}, grid expects {grid.shape}")
    return arr


def check_state(state):
    """Finite, grid-conforming FieldPair."""
    check_conforming(state.u, state.grid, "u")
    check_conforming(state.v, state.grid, "v")
    check_finite_array(state.u, "u")
    check_finite_array(state.v, "v")
    return state


def check_same_grid(a, b):
    if a.grid is not b.grid and (a.grid.shape != b.grid.shape or a.grid.kind != b.grid.kind
                                 or a.grid.extent != b.grid.extent or a.grid.d != b.grid.d):
        raise GridError("states live on different grids")
