"""Regime labels, global-existence and blow-up thresholds, stability criterion."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .exceptions import ParamsMismatch
from .functionals import action_nehari, invariants
from .grid import alpha_gate_message

MASS_SUB = "MassSub"
MASS_CRITICAL = "MassCritical"
MASS_SUPER = "MassSuper"
ENERGY_CRITICAL = "EnergyCritical"
OUT_OF_RANGE = "OutOfRange"

GLOBAL_SUBCRITICAL = "GlobalSubcritical"
GLOBAL_BELOW_MASS = "GlobalBelowMass"
GLOBAL_BELOW_THRESHOLD = "GlobalBelowThreshold"
GLOBAL_AND_SCATTERING = "GlobalAndScattering"
BLOWUP_OR_GROWUP = "BlowupOrGrowup"
KMINUS_UNSTABLE = "KMinusUnstable"
BOUNDARY = "Boundary"
UNKNOWN = "Unknown"

GLOBAL_LABELS = (GLOBAL_SUBCRITICAL, GLOBAL_BELOW_MASS, GLOBAL_BELOW_THRESHOLD, GLOBAL_AND_SCATTERING)

BOUNDARY_BAND = 1e-9
_EXACT = 1e-12


@dataclass
class Verdict:
    label: str
    evidence: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def add(self, name, lhs, rhs):
        self.evidence.append((name, float(lhs), float(rhs)))

    def to_dict(self):
        return {
            "label": self.label,
            "evidence": [{"name": n, "lhs": lhs, "rhs": rhs} for n, lhs, rhs in self.evidence],
            "params": dict(self.params),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data):
        ev = [(e["name"], e["lhs"], e["rhs"]) for e in data["evidence"]]
        return cls(label=data["label"], evidence=ev, params=dict(data["params"]))


def regime(d, alpha):
    """Label ``(d, alpha)`` by the sign of ``s_c = d/2 - 2 + alpha``."""
    s_c = d / 2.0 - 2.0 + alpha
    if 3 <= d <= 5 and abs(alpha - (6.0 - d) / 2.0) < _EXACT and 0 < alpha < min(2.0, d):
        return {"label": ENERGY_CRITICAL, "s_c": s_c}
    if alpha_gate_message(d, alpha) is not None:
        return {"label": OUT_OF_RANGE, "s_c": s_c}
    if abs(s_c) < _EXACT:
        return {"label": MASS_CRITICAL, "s_c": 0.0}
    return {"label": MASS_SUB if s_c < 0 else MASS_SUPER, "s_c": s_c}


def _check_params(gs, p, need_gn):
    q = gs.params
    if (q.d, q.alpha, q.kappa) != (p.d, p.alpha, p.kappa):
        raise ParamsMismatch(
            f"ground state has (d, alpha, kappa) = {(q.d, q.alpha, q.kappa)}, "
            f"state has {(p.d, p.alpha, p.kappa)}"
        )
    if need_gn and not gs.is_gn_normalized:
        raise ParamsMismatch(
            "threshold inequalities need the omega = 1, gamma = 0 ground state, "
            f"got omega={q.omega}, gamma={q.gamma}"
        )


def _compare(lhs, rhs):
    """-1 (below), 0 (within the boundary band), +1 (above)."""
    if abs(lhs - rhs) <= BOUNDARY_BAND * max(abs(lhs), abs(rhs)):
        return 0
    return -1 if lhs < rhs else 1


def _gs_constants(gs):
    inv = invariants(gs.fields, gs.params)
    return inv.M, inv.K, 0.5 * inv.K - inv.P


def _threshold_sides(inv, gs, p):
    Mg, Kg, E0g = _gs_constants(gs)
    sig = p.sigma
    return (
        (inv.H * inv.M ** sig, E0g * Mg ** sig),
        (inv.K * inv.M ** sig, Kg * Mg ** sig),
    )


def global_threshold_check(state0, gs, p):
    """Sufficient conditions for global existence (and scattering)."""
    reg = regime(p.d, p.alpha)
    verdict = Verdict(UNKNOWN, params=p.as_dict())
    if reg["label"] == MASS_SUB:
        _check_params(gs, p, need_gn=False)
        verdict.add("s_c < 0", reg["s_c"], 0.0)
        verdict.label = GLOBAL_SUBCRITICAL
        return verdict
    if reg["label"] not in (MASS_CRITICAL, MASS_SUPER):
        verdict.add("s_c", reg["s_c"], 0.0)
        return verdict
    _check_params(gs, p, need_gn=True)
    inv = invariants(state0, p)
    if reg["label"] == MASS_CRITICAL:
        Mg = _gs_constants(gs)[0]
        verdict.add("M(u0,v0) < M(gs)", inv.M, Mg)
        c = _compare(inv.M, Mg)
        verdict.label = {-1: GLOBAL_BELOW_MASS, 0: BOUNDARY, 1: UNKNOWN}[c]
        return verdict
    (h_l, h_r), (k_l, k_r) = _threshold_sides(inv, gs, p)
    verdict.add("H M^sigma < E0(gs) M(gs)^sigma", h_l, h_r)
    verdict.add("K M^sigma < K(gs) M(gs)^sigma", k_l, k_r)
    ch, ck = _compare(h_l, h_r), _compare(k_l, k_r)
    if ch == -1 and ck == -1:
        scatter = 3 <= p.d <= 5 and p.alpha < min(2.0, p.d / 2.0)
        verdict.label = GLOBAL_AND_SCATTERING if scatter else GLOBAL_BELOW_THRESHOLD
    elif ch == 0 or ck == 0:
        verdict.label = BOUNDARY
    return verdict


def blowup_threshold_check(state0, gs, p, wp=None):
    """Sufficient conditions for blow-up or grow-up.

    Membership of the invariant set ``{A < wp, B < 0, G < 0}`` is reported first
    when ``wp`` is supplied; otherwise ``H < 0`` or the mass-supercritical
    threshold pair decides.
    """
    _check_params(gs, p, need_gn=False)
    inv = invariants(state0, p)
    verdict = Verdict(UNKNOWN, params=p.as_dict())
    if wp is not None:
        act = action_nehari(state0, p)
        verdict.add("A_omega < wp", act.A_omega, wp)
        verdict.add("B_omega < 0", act.B_omega, 0.0)
        verdict.add("G < 0", inv.G, 0.0)
        if act.A_omega < wp and act.B_omega < 0 and inv.G < 0:
            verdict.label = KMINUS_UNSTABLE
            return verdict
    verdict.add("H < 0", inv.H, 0.0)
    if inv.H < 0:
        verdict.label = BLOWUP_OR_GROWUP
        return verdict
    if regime(p.d, p.alpha)["label"] == MASS_SUPER and gs.is_gn_normalized:
        (h_l, h_r), (k_l, k_r) = _threshold_sides(inv, gs, p)
        verdict.add("H M^sigma < E0(gs) M(gs)^sigma", h_l, h_r)
        verdict.add("K M^sigma > K(gs) M(gs)^sigma", k_l, k_r)
        if _compare(h_l, h_r) == -1 and _compare(k_l, k_r) == 1:
            verdict.label = BLOWUP_OR_GROWUP
    return verdict


def classify_state(state0, gs, p, wp=None):
    """Global-existence check first; fall through to the blow-up check."""
    verdict = global_threshold_check(state0, gs, p)
    if verdict.label in GLOBAL_LABELS or verdict.label == BOUNDARY:
        return verdict
    second = blowup_threshold_check(state0, gs, p, wp)
    second.evidence = verdict.evidence + second.evidence
    return second


def stability_criterion(p):
    """Expected orbital stability of standing waves from ``d + 2 alpha < 4`` (``gamma = 0`` only)."""
    if p.gamma != 0.0:
        return {"stable_expected": None, "reason": "L''(omega) sign not evaluated for gamma != 0"}
    val = p.d + 2.0 * p.alpha
    return {
        "stable_expected": bool(val < 4.0),
        "reason": f"d + 2 alpha = {val:g} {'<' if val < 4.0 else '>='} 4",
    }
