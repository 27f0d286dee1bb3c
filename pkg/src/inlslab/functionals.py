"""Conserved quantities, variational functionals and virial quantities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .exceptions import DomainTooSmall, GridError, ZeroState
from .grid import face_gradient, grad_norm2, gradient, integrate, l2_norm2


@dataclass(frozen=True)
class InvariantSet:
    M: float
    K: float
    P: float
    E: float
    G: float
    H: float


@dataclass(frozen=True)
class ActionSet:
    A_omega: float
    B_omega: float
    S: float


@dataclass(frozen=True)
class RawIntegrals:
    """Elementary integrals every functional is assembled from."""

    u2: float  # ||u||^2
    v2: float  # ||v||^2
    gu2: float  # ||grad u||^2
    gv2: float  # ||grad v||^2
    P: float


def _weight(grid):
    if grid.weight_alpha is None:
        raise GridError("grid was built without a singular weight; pass alpha to build_grid")
    return grid.weight_alpha


def interaction(u, v, grid):
    """``P = Re int |x|^-alpha u^2 conj(v)``."""
    return integrate((_weight(grid) * u * u * np.conj(v)).real, grid)


def raw_integrals(state):
    g = state.grid
    return RawIntegrals(
        u2=l2_norm2(state.u, g),
        v2=l2_norm2(state.v, g),
        gu2=grad_norm2(state.u, g),
        gv2=grad_norm2(state.v, g),
        P=interaction(state.u, state.v, g),
    )


def _invariants_from_raw(raw, p):
    M = raw.u2 + 2.0 * raw.v2
    K = raw.gu2 + p.kappa * raw.gv2
    P = raw.P
    E = 0.5 * K + p.gamma * raw.v2 - P
    G = K - p.nonlinear_degree * P
    H = E if p.gamma >= 0 else E + 0.5 * abs(p.gamma) * M
    return InvariantSet(M=M, K=K, P=P, E=E, G=G, H=H)


def invariants(state, p):
    """Mass, kinetic, interaction, energy, Pohozaev functional and surrogate."""
    return _invariants_from_raw(raw_integrals(state), p)


def _action_from_raw(raw, p):
    M = raw.u2 + 2.0 * raw.v2
    K = raw.gu2 + p.kappa * raw.gv2
    S = K + 2.0 * p.omega * M + 2.0 * p.gamma * raw.v2
    E = 0.5 * K + p.gamma * raw.v2 - raw.P
    return ActionSet(A_omega=E + p.omega * M, B_omega=S - 3.0 * raw.P, S=S)


def action_nehari(state, p):
    """Action ``A = E + omega M``, Nehari functional ``B`` and ``S = B + 3P``."""
    return _action_from_raw(raw_integrals(state), p)


def weinstein(state, p, inv=None):
    """``P / (K^((d+2a)/4) M^((6-d-2a)/4))``."""
    inv = invariants(state, p) if inv is None else inv
    if inv.M * inv.K == 0:
        raise ZeroState("Weinstein functional needs M > 0 and K > 0")
    a = (p.d + 2.0 * p.alpha) / 4.0
    b = (6.0 - p.d - 2.0 * p.alpha) / 4.0
    return inv.P / (inv.K ** a * inv.M ** b)


def localized_mass(state, R):
    """``int_{|x| <= R} |u|^2 + 2|v|^2``."""
    g = state.grid
    mask = g.radius <= R
    dens = np.abs(state.u) ** 2 + 2.0 * np.abs(state.v) ** 2
    return integrate(np.where(mask, dens, 0.0), g)


def cubic_density(state):
    """``int |x|^-alpha (|u|^3 + |v|^3)``."""
    g = state.grid
    return integrate(_weight(g) * (np.abs(state.u) ** 3 + np.abs(state.v) ** 3), g)


# --- cutoff functions -----------------------------------------------------

CHI_R = "chi_r"
PHI_R = "phi_r"
RHO_R = "rho_r"
QUADRATIC = "quadratic"
_KINDS = {
    "chir": CHI_R, "chi_r": CHI_R, "chi": CHI_R,
    "phir": PHI_R, "phi_r": PHI_R, "phi": PHI_R,
    "rhor": RHO_R, "rho_r": RHO_R, "rho": RHO_R,
    "quadratic": QUADRATIC, "x2": QUADRATIC,
}

_S0 = 1.0 + 4.0 ** (-1.0 / 3.0)


def _hermite_quintic(x0, vals0, x1, vals1):
    """Quintic matching value, slope and curvature at both ends."""
    rows, rhs = [], []
    for x, vals in ((x0, vals0), (x1, vals1)):
        for k, val in enumerate(vals):
            row = [0.0] * 6
            for j in range(k, 6):
                row[j] = float(np.prod(np.arange(j - k + 1, j + 1))) * x ** (j - k)
            rows.append(row)
            rhs.append(val)
    return Polynomial(np.linalg.solve(np.array(rows), np.array(rhs)))


class _PiecewiseProfile:
    """Radial profile ``c(s)`` given as polynomial pieces on ``[breaks[i], breaks[i+1])``."""

    def __init__(self, breaks, pieces, tail):
        self.breaks = np.asarray(breaks, dtype=float)
        self.pieces = pieces
        self.tail = tail  # polynomial used beyond the last break

    def __call__(self, s, k=0):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        idx = np.searchsorted(self.breaks, s, side="right") - 1
        polys = list(self.pieces) + [self.tail]
        for i, poly in enumerate(polys):
            mask = idx == i
            if np.any(mask):
                out[mask] = poly.deriv(k)(s[mask]) if k else poly(s[mask])
        return out


def _chi_profile():
    s = Polynomial([0.0, 1.0])
    inner = s ** 2
    # zeta = 2s - 2(s-1)^4 on (1, s0]
    mid = s ** 2 - 0.4 * (s - 1.0) ** 5
    zeta_mid = mid.deriv()
    bridge_zeta = _hermite_quintic(
        _S0, (zeta_mid(_S0), zeta_mid.deriv()(_S0), zeta_mid.deriv(2)(_S0)),
        2.0, (0.0, 0.0, 0.0),
    )
    bridge = bridge_zeta.integ(lbnd=_S0, k=mid(_S0))
    tail = Polynomial([bridge(2.0)])
    return _PiecewiseProfile([0.0, 1.0, _S0, 2.0], [inner, mid, bridge], tail)


def _phi_profile():
    s = Polynomial([0.0, 1.0])
    inner = s ** 2
    t = s - 1.0
    eta = 2.0 * (1.0 - (10 * t ** 3 - 15 * t ** 4 + 6 * t ** 5))
    d1 = eta.integ(lbnd=1.0, k=2.0)
    bridge = d1.integ(lbnd=1.0, k=1.0)
    tail = Polynomial([bridge(2.0) - 2.0 * d1(2.0), d1(2.0)])  # phi' constant beyond 2
    return _PiecewiseProfile([0.0, 1.0, 2.0], [inner, bridge], tail)


def _smooth_step(t):
    """C-infinity transition from 1 (t <= 0) to 0 (t >= 1) and its derivative."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
        val = b / (a + b)
        da = np.where((t > 0) & (t < 1), a / np.where(t > 0, t, 1.0) ** 2, 0.0)
        db = np.where((t > 0) & (t < 1), -b / np.where(t < 1, 1.0 - t, 1.0) ** 2, 0.0)
        dval = (db * (a + b) - b * (da + db)) / (a + b) ** 2
    return val, dval


@dataclass(frozen=True, eq=False)
class CutoffFn:
    """A radial weight sampled on a grid: value, r-derivatives, Laplacian, bi-Laplacian.

    ``d1_over_r`` is ``chi'(r)/r`` (finite at the origin).
    """

    kind: str
    R: float | None
    grid: object
    chi: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d1_over_r: np.ndarray
    lap: np.ndarray
    bilap: np.ndarray

    def derivative(self, r, k):
        """``k``-th r-derivative of the cutoff at arbitrary radii."""
        return _cutoff_derivs(self.kind, self.R, np.asarray(r, dtype=float), self.grid.d)[k]


def _cutoff_derivs(kind, R, r, d):
    """Return (chi, chi', chi'', chi'/r, lap chi, bilap chi) at radii ``r``."""
    a = d - 1.0
    if kind == QUADRATIC:
        one = np.ones_like(r)
        return r * r, 2.0 * r, 2.0 * one, 2.0 * one, 2.0 * d * one, 0.0 * one
    if kind == RHO_R:
        val, dval = _smooth_step(2.0 * r / R - 1.0)
        d1 = 2.0 * dval / R
        with np.errstate(divide="ignore", invalid="ignore"):
            d1r = np.where(r > 0, d1 / np.where(r > 0, r, 1.0), 0.0)
        nan = np.full_like(r, np.nan)
        return val, d1, nan, d1r, nan, nan
    prof = _CHI if kind == CHI_R else _PHI
    s = r / R
    c0 = R * R * prof(s)
    c1 = R * prof(s, 1)
    c2 = prof(s, 2)
    c3 = prof(s, 3) / R
    c4 = prof(s, 4) / (R * R)
    inner = s <= 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        rr = np.where(inner, 1.0, r)
        d1r = np.where(inner, 2.0, c1 / rr)
        lap = np.where(inner, 2.0 * d, c2 + a * c1 / rr)
        bilap = np.where(
            inner,
            0.0,
            c4 + 2.0 * a * c3 / rr + (a * a - 2.0 * a) * (c2 / rr ** 2 - c1 / rr ** 3),
        )
    return c0, c1, c2, d1r, lap, bilap


_CHI = _chi_profile()
_PHI = _phi_profile()


def make_cutoff(kind, R, grid):
    """Sample a cutoff (``chi_r``, ``phi_r``, ``rho_r`` or ``quadratic``) on ``grid``."""
    key = _KINDS.get(str(kind).lower())
    if key is None:
        raise ValueError(f"unknown cutoff kind {kind!r}")
    if key != QUADRATIC:
        R = float(R)
        if not R > 0:
            raise ValueError(f"R must be positive, got {R}")
        support = R if key == RHO_R else 2.0 * R
        if support > grid.extent:
            raise DomainTooSmall(f"cutoff support {support:g} exceeds grid extent {grid.extent:g}")
    else:
        R = None
    chi, d1, d2, d1r, lap, bilap = _cutoff_derivs(key, R, grid.radius, grid.d)
    return CutoffFn(kind=key, R=R, grid=grid, chi=chi, d1=d1, d2=d2, d1_over_r=d1r, lap=lap, bilap=bilap)


# --- virial quantities ----------------------------------------------------


def _momentum_forms(state, c):
    """``Im int grad chi . grad f conj(f)`` for f = u and f = v."""
    g = state.grid
    if g.is_radial:
        # chi' on interior faces from node differences keeps dV/dt exact for the
        # semi-discrete flow; the outer-face term vanishes identically.
        dchi = np.empty(g.shape[0])
        dchi[:-1] = np.diff(c.chi) / g.h
        dchi[-1] = c.derivative(g.face_r[-1:], 1)[0]
        out = []
        for f in (state.u, state.v):
            df, favg = face_gradient(f, g)
            out.append(float(np.sum(g.face_weights * dchi * np.imag(np.conj(favg) * df))))
        return out
    with np.errstate(divide="ignore", invalid="ignore"):
        unit = [x / g.radius for x in g.coords]
    grad_chi = [c.d1 * e for e in unit]
    out = []
    for f in (state.u, state.v):
        gf = gradient(f, g)
        dens = sum(gc * np.imag(gk * np.conj(f)) for gc, gk in zip(grad_chi, gf))
        out.append(integrate(dens, g))
    return out


def virial_moment(state, c, p):
    """Return ``{"V", "Mchi", "Vdot"}`` for the cutoff ``c``."""
    if c.grid is not state.grid and c.grid.shape != state.grid.shape:
        raise GridError("cutoff was sampled on a different grid")
    g = state.grid
    V = integrate(c.chi * (np.abs(state.u) ** 2 + 2.0 * np.abs(state.v) ** 2), g)
    mu, mv = _momentum_forms(state, c)
    return {"V": V, "Mchi": mu + mv, "Vdot": mu + 2.0 * p.kappa * mv}


def virial_rate(state, c, p):
    """Right-hand side of ``d/dt M_chi`` for a radial cutoff.

    For the quadratic weight this is exactly ``2 G``.
    """
    g = state.grid
    if c.kind == QUADRATIC:
        raw = raw_integrals(state)
        K = raw.gu2 + p.kappa * raw.gv2
        return 2.0 * K - 2.0 * p.nonlinear_degree * raw.P
    if c.kind == RHO_R:
        raise ValueError("virial_rate needs a cutoff with bounded fourth derivatives (chi_r or phi_r)")
    dens0 = np.abs(state.u) ** 2 + p.kappa * np.abs(state.v) ** 2
    term1 = 0.25 * integrate(c.bilap * dens0, g)
    if g.is_radial:
        # radial fields: |grad f|^2 = |x.grad f|^2 / r^2, so the two gradient terms
        # combine to chi'' |f_r|^2; chi'' is evaluated on the faces
        c2f = c.derivative(g.face_r, 2)
        grad_terms = 0.0
        for f, coef in ((state.u, 1.0), (state.v, p.kappa)):
            df, _ = face_gradient(f, g)
            grad_terms += coef * float(np.sum(g.face_weights * c2f * np.abs(df) ** 2))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ang = np.where(g.radius > 0, (c.d2 - c.d1_over_r) / g.radius ** 2, 0.0)
        grad_terms = 0.0
        for f, coef in ((state.u, 1.0), (state.v, p.kappa)):
            gf = gradient(f, g)
            gsq = sum(np.abs(x) ** 2 for x in gf)
            xdot = sum(x * y for x, y in zip(g.coords, gf))
            grad_terms += coef * integrate(c.d1_over_r * gsq + ang * np.abs(xdot) ** 2, g)
    nl_w = c.d2 + (p.d - 1.0 + 2.0 * p.alpha) * c.d1_over_r
    nl = integrate((nl_w * _weight(g) * state.u ** 2 * np.conj(state.v)).real, g)
    return term1 + grad_terms - 0.5 * nl
