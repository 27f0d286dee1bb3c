"""Spatial grids, quadrature and differential operators.

Two discretizations are supported:

* ``cartesian`` (d = 1, 2): periodic box ``[-L, L)^d`` sampled at cell
  midpoints, so no node sits on the origin. Derivatives are spectral.
* ``radial`` (d = 1..5): radially symmetric profiles on ``[0, R]`` sampled at
  cell centres ``r_i = (i + 1/2) h``. Operators are second-order finite
  volumes with exact shell volumes; the flux through the origin face is zero
  (even reflection) and the profile vanishes on the outer face ``r = R``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma as gamma_fn
from math import pi

import numpy as np

from .exceptions import GridError, ParameterError

CARTESIAN = "cartesian"
RADIAL = "radial"


def sphere_area(d):
    """Surface area of the unit sphere in R^d (2 for d = 1)."""
    return 2.0 * pi ** (d / 2.0) / gamma_fn(d / 2.0)


@dataclass(frozen=True)
class PhysParams:
    """Physical parameters ``(d, alpha, kappa, gamma, omega)``."""

    d: int
    alpha: float
    kappa: float = 1.0
    gamma: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        if int(self.d) != self.d or not 1 <= self.d <= 5:
            raise ParameterError(f"d must be an integer in 1..5, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        for name in ("alpha", "kappa", "gamma", "omega"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.kappa <= 0:
            raise ParameterError(f"kappa must be positive, got {self.kappa}")

    @property
    def s_c(self):
        return self.d / 2.0 - 2.0 + self.alpha

    @property
    def nonlinear_degree(self):
        """``(d + 2 alpha) / 2``, the dilation degree of the interaction."""
        return (self.d + 2.0 * self.alpha) / 2.0

    @property
    def sigma(self):
        denom = self.d + 2.0 * self.alpha - 4.0
        if denom <= 0:
            raise ParameterError("sigma is only defined when d + 2 alpha > 4")
        return (6.0 - self.d - 2.0 * self.alpha) / denom

    def replace(self, **changes):
        values = self.as_dict()
        values.update(changes)
        return PhysParams(**values)

    def as_dict(self):
        return {
            "d": self.d,
            "alpha": self.alpha,
            "kappa": self.kappa,
            "gamma": self.gamma,
            "omega": self.omega,
        }


def alpha_gate_message(d, alpha):
    """Return ``None`` if ``alpha`` is admissible in dimension ``d``, else a reason."""
    upper = min(2.0, float(d))
    if not 0.0 < alpha < upper:
        return f"alpha must satisfy 0 < alpha < min(2, d) = {upper:g} (got alpha={alpha:g}, d={d})"
    if 3 <= d <= 5 and not alpha < (6.0 - d) / 2.0:
        return (
            f"alpha must be below the energy-critical value (6-d)/2 = {(6.0 - d) / 2.0:g} "
            f"for d={d} (energy-subcritical gate, got alpha={alpha:g})"
        )
    return None


def check_alpha_gate(d, alpha, allow_zero=False):
    if allow_zero and alpha == 0.0:
        return
    msg = alpha_gate_message(d, alpha)
    if msg is not None:
        raise ParameterError(msg)


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable spatial discretization.

    ``quad_weights`` integrates samples at the nodes. For radial grids the
    gradient lives on the cell faces ``r = j h`` (j = 1..N) and is integrated
    with ``face_weights``; for cartesian grids ``k2`` holds ``|k|^2`` per mode.
    """

    kind: str
    d: int
    shape: tuple
    extent: float
    spacing: tuple
    coords: tuple
    radius: np.ndarray
    quad_weights: np.ndarray
    alpha: float | None = None
    weight_alpha: np.ndarray | None = None
    k2: np.ndarray | None = None
    kvec: tuple | None = None
    face_r: np.ndarray | None = None
    face_weights: np.ndarray | None = None
    _lap_bands: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_radial(self):
        return self.kind == RADIAL

    @property
    def h(self):
        return self.spacing[0]

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def volume(self):
        return float(self.quad_weights.sum())

    def spec(self):
        """The grid-spec mapping this grid was built from."""
        return {
            "kind": self.kind,
            "d": self.d,
            "extent": self.extent,
            "counts": list(self.shape),
        }

    def with_alpha(self, alpha):
        """Same grid with the singular weight recomputed for ``alpha``."""
        return build_grid(self.kind, self.d, self.extent, self.shape, alpha=alpha)

    def zeros(self, dtype=complex):
        return np.zeros(self.shape, dtype=dtype)


def build_grid(kind, d, extent, counts, alpha=None):
    """Construct a :class:`Grid`.

    ``counts`` is an int or a per-axis sequence (at least 16 per axis). When
    ``alpha`` is given the regularized singular weight ``|x|^-alpha`` is
    precomputed; ``alpha = 0`` yields the constant weight 1.
    """
    kind = str(kind).lower()
    if kind not in (CARTESIAN, RADIAL):
        raise GridError(f"unknown grid kind {kind!r}")
    if int(d) != d or not 1 <= d <= 5:
        raise GridError(f"d must be an integer in 1..5, got {d}")
    d = int(d)
    extent = float(extent)
    if not extent > 0:
        raise GridError(f"extent must be positive, got {extent}")
    if kind == CARTESIAN and d > 2:
        raise GridError("cartesian grids are limited to d <= 2; use a radial grid for d >= 3")
    naxes = 1 if kind == RADIAL else d
    if np.isscalar(counts):
        counts = (int(counts),) * naxes
    counts = tuple(int(c) for c in counts)
    if len(counts) != naxes:
        raise GridError(f"expected {naxes} counts, got {len(counts)}")
    if min(counts) < 16:
        raise GridError(f"at least 16 samples per axis are required, got {counts}")
    if alpha is not None:
        check_alpha_gate(d, float(alpha), allow_zero=True)

    if kind == RADIAL:
        grid = _build_radial(d, extent, counts[0])
    else:
        grid = _build_cartesian(d, extent, counts)
    if alpha is not None:
        object.__setattr__(grid, "alpha", float(alpha))
        object.__setattr__(grid, "weight_alpha", singular_weight(grid, float(alpha)))
    return grid


def _build_radial(d, extent, n):
    h = extent / n
    r = (np.arange(n) + 0.5) * h
    faces = np.arange(n + 1) * h
    area = sphere_area(d)
    vols = area * (faces[1:] ** d - faces[:-1] ** d) / d
    face_area = area * faces[1:] ** (d - 1)
    face_weights = face_area * h
    # outer face: Dirichlet value sits on the face, half a cell from the last node
    face_weights[-1] *= 0.5
    face_area_all = area * faces ** (d - 1)
    if d == 1:
        face_area_all[0] = 0.0  # even reflection: no flux through the origin
    lower = np.zeros(n)
    upper = np.zeros(n)
    diag = np.zeros(n)
    inv = 1.0 / (h * h * vols)
    # flux through face j (between cells j-1 and j) for j = 1..n-1
    upper[:-1] = face_area_all[1:-1] * h * inv[:-1]
    lower[1:] = face_area_all[1:-1] * h * inv[1:]
    diag[:-1] -= upper[:-1]
    diag[1:] -= lower[1:]
    # outer ghost f_N = -f_{N-1}
    diag[-1] -= 2.0 * face_area_all[-1] * h * inv[-1]
    bands = np.vstack([np.r_[0.0, upper[:-1]], diag, np.r_[lower[1:], 0.0]])
    return Grid(
        kind=RADIAL,
        d=d,
        shape=(n,),
        extent=extent,
        spacing=(h,),
        coords=(r,),
        radius=r,
        quad_weights=vols,
        face_r=faces[1:],
        face_weights=face_weights,
        _lap_bands=bands,
    )


def _build_cartesian(d, extent, counts):
    axes = []
    ks = []
    spacing = []
    for n in counts:
        h = 2.0 * extent / n
        axes.append(-extent + (np.arange(n) + 0.5) * h)
        ks.append(2.0 * pi * np.fft.fftfreq(n, d=h))
        spacing.append(h)
    mesh = np.meshgrid(*axes, indexing="ij")
    kmesh = np.meshgrid(*ks, indexing="ij")
    radius = np.sqrt(sum(x * x for x in mesh))
    k2 = sum(k * k for k in kmesh)
    # first-derivative symbols drop the unpaired Nyquist mode
    kd = []
    for axis, (n, k) in enumerate(zip(counts, kmesh)):
        kk = k.copy()
        if n % 2 == 0:
            idx = [slice(None)] * d
            idx[axis] = n // 2
            kk[tuple(idx)] = 0.0
        kd.append(kk)
    cell = float(np.prod(spacing))
    return Grid(
        kind=CARTESIAN,
        d=d,
        shape=tuple(counts),
        extent=extent,
        spacing=tuple(spacing),
        coords=tuple(mesh),
        radius=radius,
        quad_weights=np.full(tuple(counts), cell),
        k2=k2,
        kvec=tuple(kd),
    )


def singular_weight(grid, alpha):
    """Regularized samples of ``|x|^-alpha`` on ``grid``.

    Radial grids use the exact shell average over the origin cell
    ``[0, h]``; every other node (and every cartesian node, none of which
    lies on the origin) uses the pointwise value.
    """
    alpha = float(alpha)
    if alpha < 0:
        raise ParameterError(f"alpha must be nonnegative, got {alpha}")
    if alpha >= grid.d:
        raise ParameterError(f"|x|^-alpha is not locally integrable for alpha={alpha} >= d={grid.d}")
    if alpha == 0.0:
        return np.ones(grid.shape)
    w = grid.radius ** (-alpha)
    if grid.is_radial:
        d = grid.d
        w[0] = d / (d - alpha) * grid.h ** (-alpha)
    return w


def integrate(f, grid):
    """Quadrature of samples ``f`` over the domain."""
    f = np.asarray(f)
    if f.shape != grid.shape:
        raise GridError(f"shape {f.shape} does not conform to grid {grid.shape}")
    return float(np.sum(f * grid.quad_weights).real)


def laplacian(f, grid):
    """Discrete Laplacian of ``f`` (complex or real samples)."""
    f = np.asarray(f)
    if f.shape != grid.shape:
        raise GridError(f"shape {f.shape} does not conform to grid {grid.shape}")
    if grid.is_radial:
        b = grid._lap_bands
        out = b[1] * f
        out[:-1] += b[0][1:] * f[1:]
        out[1:] += b[2][:-1] * f[:-1]
        return out
    return np.fft.ifftn(-grid.k2 * np.fft.fftn(f))


def laplacian_bands(grid):
    """Tridiagonal Laplacian of a radial grid in ``scipy.linalg.solve_banded`` layout."""
    if not grid.is_radial:
        raise GridError("banded Laplacian only exists on radial grids")
    return grid._lap_bands.copy()


def face_gradient(f, grid):
    """Radial derivative on the faces ``r = j h`` (j = 1..N) plus face averages.

    Returns ``(df, favg)``. The outer face uses the Dirichlet ghost value.
    """
    h = grid.h
    ghost = np.append(f, -f[-1])
    df = (ghost[1:] - ghost[:-1]) / h
    favg = 0.5 * (ghost[1:] + ghost[:-1])
    return df, favg


def gradient(f, grid):
    """Cartesian spectral gradient as a tuple of arrays (one per axis)."""
    if grid.is_radial:
        raise GridError("use face_gradient on radial grids")
    fh = np.fft.fftn(f)
    return tuple(np.fft.ifftn(1j * k * fh) for k in grid.kvec)


def grad_norm2(f, grid):
    """``||grad f||^2``; summation-by-parts consistent with :func:`laplacian`."""
    if grid.is_radial:
        df, _ = face_gradient(f, grid)
        return float(np.sum(grid.face_weights * np.abs(df) ** 2))
    fh = np.fft.fftn(f)
    cell = float(np.prod(grid.spacing))
    return float(np.sum(grid.k2 * np.abs(fh) ** 2) * cell / grid.size)


def l2_norm2(f, grid):
    return integrate(np.abs(f) ** 2, grid)


@dataclass(eq=False)
class FieldPair:
    """Complex samples of ``(u, v)`` on a grid."""

    u: np.ndarray
    v: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=complex)
        self.v = np.asarray(self.v, dtype=complex)
        if self.u.shape != self.grid.shape or self.v.shape != self.grid.shape:
            raise GridError(
                f"field shapes {self.u.shape}, {self.v.shape} do not conform to grid {self.grid.shape}"
            )

    def copy(self):
        return FieldPair(self.u.copy(), self.v.copy(), self.grid)

    def scaled(self, mu):
        return FieldPair(mu * self.u, mu * self.v, self.grid)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))

    def with_phases(self, theta_u, theta_v):
        return FieldPair(np.exp(1j * theta_u) * self.u, np.exp(1j * theta_v) * self.v, self.grid)


def gaussian_pair(grid, amp_u=1.0, amp_v=1.0, width=1.0, phase_k=0.0):
    """Gaussian test data ``amp * exp(-|x|^2 / width^2)`` with optional linear phase along x1."""
    g = np.exp(-(grid.radius / width) ** 2)
    phase = np.exp(1j * phase_k * grid.coords[0]) if phase_k else 1.0
    return FieldPair(amp_u * g * phase, amp_v * g * phase, grid)
