"""Ground states of the stationary system by scale-free Nehari minimization.

The stationary system for ``(u, v) = (e^{i w t} phi, e^{2 i w t} psi)`` reads::

    1/2 lap phi - w phi + |x|^-a phi psi = 0
    k/2 lap psi - (2w + g) psi + 1/2 |x|^-a phi^2 = 0

Ground states minimize the action on the Nehari set. Along any ray the action
``lam^2 S/2 - lam^3 P`` peaks at ``lam = S/(3P)`` with value ``S^3/(54 P^2)``,
so we minimize that scale-free quotient directly with a Sobolev-preconditioned
projected gradient flow and rescale onto the Nehari set at the end.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from sklearn.base import BaseEstimator

from .exceptions import (
    GridError,
    InvalidFrequency,
    NonpositiveP,
    NoZeroCrossing,
    NotConverged,
    ParameterError,
    TailBelowFloor,
)
from .functionals import action_nehari, invariants, weinstein
from .grid import FieldPair, PhysParams, build_grid, grad_norm2, l2_norm2, laplacian_bands

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 50_000
# accepted steps may raise the objective by at most this relative amount (rounding)
_ROUNDING_SLACK = 1e-14
_ARMIJO = 1e-4


# --- operators ------------------------------------------------------------


class ShiftedLaplacian:
    """``c (-lap) + m`` with ``c > 0, m >= 0``: symmetric under the quadrature.

    ``solve`` needs ``m > 0``.
    """

    def __init__(self, grid, c, m):
        if not (c > 0 and m >= 0):
            raise ParameterError(f"operator needs c > 0 and m >= 0, got c={c}, m={m}")
        self.grid = grid
        if grid.is_radial:
            bands = -c * laplacian_bands(grid)
            bands[1] += m
            self.bands = bands
        else:
            self.symbol = c * grid.k2 + m
        self.c = c
        self.m = m

    def form(self, x):
        """``<x, L x>`` as a sum of squares (no cancellation at small spacing)."""
        return self.c * grad_norm2(x, self.grid) + self.m * l2_norm2(x, self.grid)

    def apply(self, x):
        if self.grid.is_radial:
            b = self.bands
            out = b[1] * x
            out[:-1] += b[0][1:] * x[1:]
            out[1:] += b[2][:-1] * x[:-1]
            return out
        return np.fft.ifftn(self.symbol * np.fft.fftn(x)).real

    def solve(self, rhs):
        if self.grid.is_radial:
            return solve_banded((1, 1), self.bands, rhs)
        return np.fft.ifftn(np.fft.fftn(rhs) / self.symbol).real


def pair_operators(p, grid):
    """Operators with ``S = <phi, L1 phi> + <psi, L2 psi>``."""
    if not p.omega > 0:
        raise InvalidFrequency(f"ground states need omega > 0, got omega={p.omega}")
    if not p.gamma + 2.0 * p.omega > 0:
        raise InvalidFrequency(f"ground states need gamma + 2 omega > 0, got {p.gamma + 2.0 * p.omega}")
    return (
        ShiftedLaplacian(grid, 1.0, 2.0 * p.omega),
        ShiftedLaplacian(grid, p.kappa, 4.0 * p.omega + 2.0 * p.gamma),
    )


# --- scale-free objectives ------------------------------------------------


class _PairQuotient:
    """``J = S^3 / (54 P^2)`` and its gradient in the quadrature inner product."""

    def __init__(self, grid, ops):
        self.V = grid.quad_weights
        self.w = grid.weight_alpha
        self.ops = ops

    def parts(self, x):
        f, g = x
        Lx = np.stack([self.ops[0].apply(f), self.ops[1].apply(g)])
        S = self.ops[0].form(f) + self.ops[1].form(g)
        P = float(np.sum(self.V * self.w * f * f * g))
        return S, P, Lx

    def value(self, x):
        f, g = x
        S = self.ops[0].form(f) + self.ops[1].form(g)
        P = float(np.sum(self.V * self.w * f * f * g))
        return S ** 3 / (54.0 * P * P) if P > 0 else np.inf

    def value_grad(self, x):
        f, g = x
        S, P, Lx = self.parts(x)
        J = S ** 3 / (54.0 * P * P)
        dP = np.stack([2.0 * self.w * f * g, self.w * f * f])
        return J, J * (6.0 * Lx / S - 2.0 * dP / P)

    def rescale(self, x):
        S, P, _ = self.parts(x)
        return x * (S / (3.0 * P))


class _ScalarQuotient:
    """One-component analogue: ``S^3 / (6 P^2)`` with ``P = int w q^3``."""

    def __init__(self, grid, op):
        self.V = grid.quad_weights
        self.w = grid.weight_alpha
        self.ops = (op,)

    def parts(self, x):
        q = x[0]
        Lq = self.ops[0].apply(q)
        return self.ops[0].form(q), float(np.sum(self.V * self.w * q ** 3)), Lq

    def value(self, x):
        S, P, _ = self.parts(x)
        return S ** 3 / (6.0 * P * P) if P > 0 else np.inf

    def value_grad(self, x):
        q = x[0]
        S, P, Lq = self.parts(x)
        J = S ** 3 / (6.0 * P * P)
        return J, (J * (6.0 * Lq / S - 6.0 * self.w * q * q / P))[None]

    def rescale(self, x):
        S, P, _ = self.parts(x)
        return x * (S / P)


class _PohozaevQuotient:
    """Action after amplitude scaling onto ``G = 0``: ``K^2/(s^2 P^2) (S/2 - K/s)``."""

    def __init__(self, grid, p, ops):
        self.V = grid.quad_weights
        self.w = grid.weight_alpha
        self.ops = ops
        self.s = p.nonlinear_degree
        self.kin = (ShiftedLaplacian(grid, 1.0, 0.0), ShiftedLaplacian(grid, p.kappa, 0.0))

    def parts(self, x):
        f, g = x
        Lx = np.stack([self.ops[0].apply(f), self.ops[1].apply(g)])
        Kx = np.stack([self.kin[0].apply(f), self.kin[1].apply(g)])
        S = self.ops[0].form(f) + self.ops[1].form(g)
        K = self.kin[0].form(f) + self.kin[1].form(g)
        P = float(np.sum(self.V * self.w * f * f * g))
        return S, K, P, Lx, Kx

    def value(self, x):
        S, K, P, _, _ = self.parts(x)
        if P <= 0:
            return np.inf
        s = self.s
        return K * K / (s * s * P * P) * (0.5 * S - K / s)

    def value_grad(self, x):
        f, g = x
        S, K, P, Lx, Kx = self.parts(x)
        s = self.s
        pref = K * K / (s * s * P * P)
        core = 0.5 * S - K / s
        F = pref * core
        dP = np.stack([2.0 * self.w * f * g, self.w * f * f])
        grad = F * (4.0 * Kx / K - 2.0 * dP / P) + pref * (Lx - 2.0 * Kx / s)
        return F, grad

    def rescale(self, x):
        S, K, P, _, _ = self.parts(x)
        return x * (K / (self.s * P))


@dataclass
class DescentLog:
    iterations: int
    grad_norm: float
    converged: bool
    history: list = field(default_factory=list)
    message: str = ""


def _descend(x, obj, V, tol, max_iter, positive=True):
    """Projected preconditioned gradient flow with Barzilai-Borwein trial steps.

    ``obj`` must be invariant under amplitude scaling; iterates are rescaled
    by ``obj.rescale`` after every accepted step. Returns ``(x, log)``.
    """
    ops = obj.ops

    def precond(gr):
        return np.stack([op.solve(c) for op, c in zip(ops, gr)])

    def ip(a, b):
        return float(sum(np.sum(V * ai * op.apply(bi)) for op, ai, bi in zip(ops, a, b)))

    def norm2(a):
        return float(sum(op.form(ai) for op, ai in zip(ops, a)))

    J, grad = obj.value_grad(x)
    d = precond(grad)
    history = [J]
    step = 1.0
    prev = None
    stalls = 0
    rel = np.inf
    for it in range(max_iter + 1):
        gn2 = norm2(d)
        rel = np.sqrt(gn2 * norm2(x)) / abs(J)
        if rel < tol:
            return x, DescentLog(it, rel, True, history)
        if it == max_iter:
            break
        if prev is not None:
            s = x - prev[0]
            y = d - prev[1]
            sy = ip(s, y)
            step = norm2(s) / sy if sy > 0 else 2.0 * step
        while True:
            trial = x - step * d
            if positive:
                trial = np.maximum(trial, 0.0)
            Jn = obj.value(trial)
            if Jn <= J - _ARMIJO * step * gn2 or Jn <= J * (1.0 + _ROUNDING_SLACK):
                break
            step *= 0.5
            if step < 1e-14:
                break
        if not Jn <= J * (1.0 + _ROUNDING_SLACK):
            stalls += 1
            if stalls >= 3:
                return x, DescentLog(it, rel, False, history, "line search stalled")
            step = 1.0
            prev = None
            continue
        stalls = 0
        prev = (x, d)
        x = obj.rescale(trial)
        J, grad = obj.value_grad(x)
        d = precond(grad)
        history.append(J)
    return x, DescentLog(max_iter, rel, False, history, "iteration limit reached")


# --- results --------------------------------------------------------------


@dataclass(eq=False)
class GroundStateResult:
    """Converged (or best-effort) ground state rescaled onto the Nehari set."""

    fields: FieldPair
    params: PhysParams
    d_omega: float
    c_omega: float
    C_GN: float
    pohozaev_res: tuple
    decay_rate: float
    iterations: int
    converged: bool
    grad_norm: float = np.nan
    history: list = field(default_factory=list, repr=False)

    @property
    def phi(self):
        return self.fields.u.real

    @property
    def psi(self):
        return self.fields.v.real

    @property
    def grid(self):
        return self.fields.grid

    @property
    def is_gn_normalized(self):
        """True for the ``omega = 1, gamma = 0`` optimizer of the GN inequality."""
        return self.params.omega == 1.0 and self.params.gamma == 0.0

    @classmethod
    def from_profile(cls, fields, params, d_omega=None):
        """Wrap stored profiles; diagnostics not saved with the profile are NaN."""
        if d_omega is None:
            d_omega = action_nehari(fields, params).A_omega
        return cls(
            fields=fields,
            params=params,
            d_omega=float(d_omega),
            c_omega=np.nan,
            C_GN=np.nan,
            pohozaev_res=(np.nan, np.nan),
            decay_rate=np.nan,
            iterations=0,
            converged=True,
        )

    def summary(self):
        return {
            "d_omega": self.d_omega,
            "c_omega": self.c_omega,
            "C_GN": self.C_GN,
            "pohozaev_res": list(self.pohozaev_res),
            "decay_rate": self.decay_rate,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _gaussian_init(grid, width=1.0):
    prof = np.exp(-(grid.radius / width) ** 2)
    return np.stack([prof, 0.5 * prof])


def random_smooth_pair(grid, rng, n_bumps=3):
    """Positive sum of Gaussian bumps with random amplitudes, widths and centres."""
    out = np.zeros((2,) + grid.shape)
    for comp in range(2):
        for _ in range(n_bumps):
            amp = rng.uniform(0.2, 2.0)
            width = rng.uniform(0.4, 3.0)
            if grid.is_radial:
                centre = rng.uniform(0.0, 2.0)
                dist = grid.radius - centre
            else:
                shift = rng.uniform(-1.5, 1.5, size=grid.d)
                dist = np.sqrt(sum((x - c) ** 2 for x, c in zip(grid.coords, shift)))
            out[comp] += amp * np.exp(-(dist / width) ** 2)
    return out


def _initial_array(grid, init, seed):
    if init is None or (isinstance(init, str) and init == "gaussian"):
        return _gaussian_init(grid)
    if isinstance(init, str):
        if init == "random":
            return random_smooth_pair(grid, np.random.default_rng(seed))
        if init == "wide":
            return _gaussian_init(grid, width=2.0)
        raise ParameterError(f"unknown init preset {init!r}")
    if isinstance(init, FieldPair):
        if init.grid.shape != grid.shape:
            raise GridError("initial FieldPair lives on a different grid")
        return np.stack([np.abs(init.u), np.abs(init.v)])
    arr = np.asarray(init, dtype=float)
    if arr.shape != (2,) + grid.shape:
        raise GridError(f"initial array must have shape {(2,) + grid.shape}, got {arr.shape}")
    return arr


def _require_weight(grid, p):
    if grid.weight_alpha is None or grid.alpha != p.alpha:
        return grid.with_alpha(p.alpha)
    return grid


def check_ground_state_params(p):
    if not p.omega > 0:
        raise InvalidFrequency(f"ground states need omega > 0, got omega={p.omega}")
    if not p.gamma + 2.0 * p.omega > 0:
        raise InvalidFrequency(f"ground states need gamma + 2 omega > 0, got {p.gamma + 2.0 * p.omega}")


def minimize_nehari(p, grid, init=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=0):
    """Ground state of the stationary system on ``grid``.

    ``init`` is a preset name (``"gaussian"``, ``"wide"``, ``"random"``), a
    :class:`FieldPair` or a ``(2, *grid.shape)`` array. Non-convergence is
    reported through ``converged=False`` rather than raised.
    """
    check_ground_state_params(p)
    grid = _require_weight(grid, p)
    ops = pair_operators(p, grid)
    x0 = np.maximum(_initial_array(grid, init, seed), 0.0)
    obj = _PairQuotient(grid, ops)
    _, P0, _ = obj.parts(x0)
    if not P0 > 0:
        raise NonpositiveP(f"initial data has P = {P0:g} <= 0 after positivity projection")
    x, log = _descend(obj.rescale(x0), obj, grid.quad_weights, tol, max_iter, positive=grid.is_radial)
    return _finish(x, p, grid, obj, log)


def _finish(x, p, grid, obj, log):
    x = obj.rescale(x)
    fields = FieldPair(x[0], x[1], grid)
    act = action_nehari(fields, p)
    inv = invariants(fields, p)
    res = GroundStateResult(
        fields=fields,
        params=p,
        d_omega=act.A_omega,
        c_omega=np.nan,
        C_GN=np.nan,
        pohozaev_res=(np.nan, np.nan),
        decay_rate=np.nan,
        iterations=log.iterations,
        converged=log.converged,
        grad_norm=log.grad_norm,
        history=log.history,
    )
    res.pohozaev_res = _residuals(fields, p)
    res.c_omega = ray_maximum(fields, p)[1]
    if p.gamma == 0.0:
        res.C_GN = weinstein(fields, p, inv)
    try:
        res.decay_rate = decay_fit(res)
    except TailBelowFloor:
        pass
    return res


def _residuals(fields, p):
    g = fields.grid
    K = grad_norm2(fields.u, g) + p.kappa * grad_norm2(fields.v, g)
    M = l2_norm2(fields.u, g) + 2.0 * l2_norm2(fields.v, g)
    v2 = l2_norm2(fields.v, g)
    inv = invariants(fields, p)
    P = inv.P
    r1 = abs(0.5 * K + p.omega * M + p.gamma * v2 - 1.5 * P) / (0.5 * K + p.omega * M + abs(p.gamma) * v2)
    r2 = abs(K - p.nonlinear_degree * P) / K
    return (float(r1), float(r2))


def pohozaev_residuals(gs, p=None):
    """Relative residuals of the two Pohozaev identities."""
    p = gs.params if p is None else p
    return _residuals(gs.fields, p)


def gn_crosscheck(gs, p=None):
    """Weinstein value of ``gs`` and its closed-form counterpart.

    Returns ``{"C_GN", "closed_form", "rel_diff", "formula"}``; the closed form
    is ``1/(2 sqrt(M))`` when ``d + 2 alpha = 4`` and
    ``2/(d+2a) (K M^sigma)^(-(d+2a-4)/4)`` when ``d + 2 alpha > 4``.
    """
    p = gs.params if p is None else p
    if not gs.converged:
        raise NotConverged("the sharp constant needs a converged ground state")
    if p.gamma != 0.0:
        raise ParameterError("the sharp GN constant is attained by gamma = 0 ground states only")
    inv = invariants(gs.fields, p)
    W = weinstein(gs.fields, p, inv)
    excess = p.d + 2.0 * p.alpha - 4.0
    if abs(excess) < 1e-12:
        closed, name = 1.0 / (2.0 * np.sqrt(inv.M)), "mass_critical"
    elif excess > 0:
        closed = 2.0 / (p.d + 2.0 * p.alpha) * (inv.K * inv.M ** p.sigma) ** (-excess / 4.0)
        name = "supercritical"
    else:
        closed, name = np.nan, "none"
    rel = abs(W - closed) / W if np.isfinite(closed) else np.nan
    return {"C_GN": W, "closed_form": closed, "rel_diff": rel, "formula": name}


def gn_constant(gs, p=None):
    """Sharp GN constant ``W(phi, psi)`` of a converged ``gamma = 0`` ground state."""
    return gn_crosscheck(gs, p)["C_GN"]


def ray_maximum(fields, p):
    """``(lam*, max_lam A(lam phi, lam psi))`` in closed form."""
    act = action_nehari(fields, p)
    P = act.S - act.B_omega
    P /= 3.0
    if not P > 0:
        raise NonpositiveP("the action is unbounded above only along rays with P > 0")
    lam = act.S / (3.0 * P)
    return lam, act.S ** 3 / (54.0 * P * P)


def mountain_pass_level(gs, p=None):
    """Mountain-pass level along the ray through the ground state."""
    p = gs.params if p is None else p
    if not gs.converged:
        raise NotConverged("mountain-pass level needs a converged ground state")
    _, level = ray_maximum(gs.fields, p)
    if abs(level - gs.d_omega) > 1e-10 * abs(gs.d_omega):
        raise NotConverged(f"ray maximum {level!r} differs from action {gs.d_omega!r}")
    return level


def decay_fit(gs, component=0, window=(0.5, 0.9), floor=1e-13):
    """Exponential decay rate of the profile tail by least squares on ``log``."""
    g = gs.fields.grid
    prof = (gs.fields.u if component == 0 else gs.fields.v).real
    r = g.radius.ravel()
    prof = prof.ravel()
    if not g.is_radial:
        # cartesian: take the samples along the positive first axis
        mask1 = np.ones(g.shape, dtype=bool)
        for ax in range(1, g.d):
            mask1 &= np.abs(g.coords[ax]) == np.abs(g.coords[ax]).min()
        mask1 &= g.coords[0] > 0
        r = g.radius[mask1]
        prof = prof.reshape(g.shape)[mask1]
    lo, hi = window[0] * g.extent, window[1] * g.extent
    sel = (r >= lo) & (r <= hi)
    vals = prof[sel]
    if vals.size < 2 or np.any(vals <= floor):
        raise TailBelowFloor(f"tail on [{lo:g}, {hi:g}] drops below the floor {floor:g}")
    slope = np.polyfit(r[sel], np.log(vals), 1)[0]
    rate = -float(slope)
    if not rate > 0:
        raise TailBelowFloor(f"fitted tail rate {rate:g} is not positive")
    return rate


def scalar_Q(p, grid, init=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Positive radial solution of ``1/2 lap Q - omega Q + |x|^-alpha Q^2 = 0``.

    Returns ``(Q, log)``.
    """
    if not p.omega > 0:
        raise InvalidFrequency(f"omega must be positive, got {p.omega}")
    grid = _require_weight(grid, p)
    op = ShiftedLaplacian(grid, 0.5, p.omega)
    obj = _ScalarQuotient(grid, op)
    if init is None:
        q0 = np.exp(-grid.radius ** 2)[None]
    else:
        q0 = np.asarray(init, dtype=float).reshape((1,) + grid.shape)
    q0 = np.maximum(q0, 0.0)
    if not obj.parts(q0)[1] > 0:
        raise NonpositiveP("initial profile has nonpositive cubic interaction")
    x, log = _descend(obj.rescale(q0), obj, grid.quad_weights, tol, max_iter, positive=grid.is_radial)
    return obj.rescale(x)[0], log


def scalar_residual(Q, p, grid):
    """Weighted L2 norm of the scalar equation residual under the discrete operators."""
    from .grid import laplacian

    grid = _require_weight(grid, p)
    res = 0.5 * laplacian(Q, grid).real - p.omega * Q + grid.weight_alpha * Q * Q
    return float(np.sqrt(l2_norm2(res, grid)))


def h1_norm2(u, v, grid):
    """``||u||_H1^2 + ||v||_H1^2``."""
    return (
        l2_norm2(u, grid) + grad_norm2(u, grid) + l2_norm2(v, grid) + grad_norm2(v, grid)
    )


def alpha_limit(p0, alphas, grid, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, init=None):
    """Ground states along a descending list of ``alpha`` values down to 0.

    Rows are ``{"alpha", "d_omega", "distance", "converged"}`` where
    ``distance`` is the H1 distance to the ``alpha = 0`` ground state.
    """
    alphas = [float(a) for a in alphas]
    if any(b > a for a, b in zip(alphas, alphas[1:])):
        raise ParameterError("alphas must be listed in descending order")
    if any(a < 0 for a in alphas):
        raise ParameterError("alphas must be nonnegative")
    runs = {}
    for a in sorted(set(alphas) | {0.0}):
        pa = p0.replace(alpha=a)
        runs[a] = minimize_nehari(pa, grid.with_alpha(a), init=init, tol=tol, max_iter=max_iter)
    base = runs[0.0]
    g0 = base.grid
    rows = []
    for a in alphas:
        gs = runs[a]
        du = np.abs(gs.phi) - np.abs(base.phi)
        dv = np.abs(gs.psi) - np.abs(base.psi)
        rows.append({
            "alpha": a,
            "d_omega": gs.d_omega,
            "distance": float(np.sqrt(h1_norm2(du, dv, g0))),
            "converged": gs.converged,
        })
    return rows, base.d_omega


def compute_d_minus(p, grid, init=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, gs=None, seed=0):
    """Infimum of the action over ``{G = 0}`` reached by amplitude scaling.

    Each iterate is scaled by ``K / (s P)`` onto ``G = 0`` (``s = (d+2a)/2``)
    and the resulting action is minimized. When ``d + 2 alpha = 4`` the
    scaled action is also dilation invariant, so its minimizers form a flat
    family through the ground state; the value is then taken at the ground
    state itself. Returns ``{"d_minus", "wp", "converged", "fields", "iterations"}``
    with ``wp = min(d_omega, d_minus)``.
    """
    excess = p.d + 2.0 * p.alpha - 4.0
    if excess < -1e-12:
        raise ParameterError("d_minus is only considered when d + 2 alpha >= 4")
    check_ground_state_params(p)
    grid = _require_weight(grid, p)
    ops = pair_operators(p, grid)
    obj = _PohozaevQuotient(grid, p, ops)
    if gs is None:
        gs = minimize_nehari(p, grid, tol=tol, max_iter=max_iter)
    if abs(excess) <= 1e-12:
        x = np.stack([gs.phi, gs.psi])
        log = DescentLog(0, np.nan, gs.converged)
    else:
        x0 = np.maximum(_initial_array(grid, init, seed), 0.0)
        if not obj.parts(x0)[2] > 0:
            raise NoZeroCrossing("P <= 0 after projection: the ray never meets G = 0")
        x, log = _descend(obj.rescale(x0), obj, grid.quad_weights, tol, max_iter, positive=grid.is_radial)
    x = obj.rescale(x)
    fields = FieldPair(x[0], x[1], grid)
    d_minus = action_nehari(fields, p).A_omega
    return {
        "d_minus": d_minus,
        "wp": min(gs.d_omega, d_minus),
        "converged": log.converged,
        "fields": fields,
        "iterations": log.iterations,
    }


def suggested_extent(p, tail=1e-12):
    """Radius beyond which the slower linear decay ``exp(-sqrt(2 omega) r)`` is below ``tail``."""
    rate = np.sqrt(2.0 * p.omega)
    return float(-np.log(tail) / rate)


class NehariGroundState(BaseEstimator):
    """Estimator wrapper around :func:`minimize_nehari`.

    ``fit`` computes the ground state (``X`` optionally supplies initial data
    as a ``(2, n)`` array or :class:`FieldPair`); ``predict`` interpolates the
    radial profiles at the given radii; ``transform`` maps radii to
    ``(phi, psi)`` columns as well.
    """

    def __init__(self, d=2, alpha=1.0, kappa=1.0, gamma=0.0, omega=1.0, kind="radial",
                 extent=12.0, counts=32000, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                 init="gaussian", seed=0):
        self.d = d
        self.alpha = alpha
        self.kappa = kappa
        self.gamma = gamma
        self.omega = omega
        self.kind = kind
        self.extent = extent
        self.counts = counts
        self.tol = tol
        self.max_iter = max_iter
        self.init = init
        self.seed = seed

    def _params(self):
        return PhysParams(self.d, self.alpha, self.kappa, self.gamma, self.omega)

    def fit(self, X=None, y=None):
        from .validation import check_positive_int, check_tolerance

        check_tolerance(self.tol, "tol")
        check_positive_int(self.max_iter, "max_iter")
        p = self._params()
        grid = build_grid(self.kind, self.d, self.extent, self.counts, alpha=self.alpha)
        init = self.init if X is None else X
        self.result_ = minimize_nehari(p, grid, init=init, tol=self.tol, max_iter=self.max_iter,
                                       seed=self.seed)
        self.params_ = p
        self.grid_ = grid
        self.d_omega_ = self.result_.d_omega
        self.converged_ = self.result_.converged
        self.n_iter_ = self.result_.iterations
        return self

    def _check_fitted(self):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "result_")

    def predict(self, X):
        """Profiles at radii ``X``; returns an ``(n, 2)`` array."""
        self._check_fitted()
        r = np.asarray(X, dtype=float).ravel()
        g = self.grid_
        if not g.is_radial:
            raise GridError("predict interpolates radial profiles only")
        phi = np.interp(r, g.radius, self.result_.phi, right=0.0)
        psi = np.interp(r, g.radius, self.result_.psi, right=0.0)
        return np.column_stack([phi, psi])

    def transform(self, X):
        return self.predict(X)

    def score(self, X=None, y=None):
        """Negative Pohozaev residual ``r2`` (higher is better)."""
        self._check_fitted()
        return -self.result_.pohozaev_res[1]
