"""Command-line front end: ground states, evolution, classification, sweeps."""
from __future__ import annotations

import argparse
import math
import multiprocessing
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as config_mod
from .classify import classify_state, stability_criterion
from .evolution import BLOWUP, COMPLETED, DIVERGED, EvolveConfig, blowup_monitor, evolve, scattering_diagnostics
from .exceptions import ConfigError, InlsError, NonFinite, NotConverged, ParameterError, ParamsMismatch
from .functionals import action_nehari, invariants
from .grid import FieldPair, PhysParams, build_grid, gaussian_pair
from .ground_state import (
    GroundStateResult,
    compute_d_minus,
    gn_crosscheck,
    h1_norm2,
    minimize_nehari,
)
from .io import read_profile, write_diagnostics, write_json, write_profile, write_table

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_BLOWUP = 3
EXIT_DIVERGED = 4

_GN_TOL = 1e-6
_EVOLVE_EXIT = {COMPLETED: EXIT_OK, BLOWUP: EXIT_BLOWUP, DIVERGED: EXIT_DIVERGED}


def _params(cfg):
    return PhysParams(**cfg["params"])


def _grid(cfg, p):
    g = cfg["grid"]
    counts = g["counts"][0] if len(g["counts"]) == 1 else g["counts"]
    return build_grid(g["kind"], p.d, g["extent"], counts, alpha=p.alpha)


def _solve(cfg, p, grid=None):
    grid = _grid(cfg, p) if grid is None else grid
    sol = cfg["solver"]
    return minimize_nehari(p, grid, init=sol["init"], tol=sol["tol"], max_iter=sol["max_iter"], seed=sol["seed"])


def _out_dir(cfg):
    path = Path(cfg["output"]["directory"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _profile_path(cfg, stem):
    return _out_dir(cfg) / f"{stem}.{cfg['output']['format']}"


def _needs_wp(p):
    return p.d + 2.0 * p.alpha >= 4.0 - 1e-12


def cmd_ground_state(cfg):
    p = _params(cfg)
    gs = _solve(cfg, p)
    write_profile(_profile_path(cfg, "ground_state"), gs.fields, p, d_omega=gs.d_omega)
    summary = {"params": p.as_dict(), "grid": gs.grid.spec(), **gs.summary()}
    if p.gamma == 0.0 and gs.converged:
        check = gn_crosscheck(gs, p)
        check["consistent"] = bool(check["rel_diff"] < _GN_TOL)
        summary["gn_crosscheck"] = check
    summary["stability"] = stability_criterion(p)
    write_json(_out_dir(cfg) / "summary.json", summary)
    print(f"d_omega = {gs.d_omega!r}  iterations = {gs.iterations}  converged = {gs.converged}")
    return EXIT_OK if gs.converged else EXIT_NOT_CONVERGED


def cmd_gn_constant(cfg):
    p = _params(cfg).replace(omega=1.0, gamma=0.0)
    gs = _solve(cfg, p)
    if not gs.converged:
        print("ground state did not converge; no constant reported", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    check = gn_crosscheck(gs, p)
    inv = invariants(gs.fields, p)
    report = {"params": p.as_dict(), **check, "M": inv.M, "K": inv.K, "P": inv.P}
    write_json(_out_dir(cfg) / "gn_constant.json", report)
    print(f"C_GN = {check['C_GN']!r}")
    return EXIT_OK


def _initial_state(cfg, p):
    ev = cfg["evolve"]
    if ev["init"] == "profile" or ev["profile"] is not None:
        if ev["profile"] is None:
            raise ConfigError("init = 'profile' needs a profile path", key="evolve.profile")
        if not Path(ev["profile"]).with_suffix(".json").exists():
            raise ConfigError(f"profile not found: {ev['profile']}", key="evolve.profile")
        fields, _, _ = read_profile(ev["profile"])
        grid = fields.grid.with_alpha(p.alpha)
        fields = FieldPair(fields.u, fields.v, grid)
    elif ev["init"] == "ground_state":
        fields = _solve(cfg, p).fields
    else:
        fields = gaussian_pair(_grid(cfg, p), 1.0, 1.0, ev["width"], ev["phase_k"])
    return fields.scaled(ev["amplitude"])


def _evolve_config(cfg, p):
    ev = cfg["evolve"]
    return EvolveConfig(
        p=p,
        dt=ev["dt"],
        t_end=ev["t_end"],
        dt_min=ev["dt_min"],
        diag_stride=ev["diag_stride"],
        cutoff_R=ev["cutoff_R"],
        blowup_K_factor=ev["blowup_K_factor"],
        snapshot_stride=ev["snapshot_stride"],
        energy_tol=ev["energy_tol"],
        adaptive=ev["adaptive"],
    )


def _scatter_summary(rep):
    return {k: rep[k] for k in ("P_ratio", "localmass_decreasing", "beta", "beta_bound")}


def cmd_evolve(cfg):
    p = _params(cfg)
    state0 = _initial_state(cfg, p)
    ecfg = _evolve_config(cfg, p)
    tr = evolve(state0, ecfg)
    out = _out_dir(cfg)
    write_diagnostics(out / "diagnostics.csv", [list(row.values()) for row in tr.diag])
    if tr.final is not None and tr.final.is_finite():
        write_profile(_profile_path(cfg, "final"), tr.final, p, extra={"t": tr.times[-1]})
    verdict = {
        "status": tr.status,
        "message": tr.message,
        "steps": tr.steps,
        "t_final": tr.times[-1],
        "dt_final": tr.dt_final,
        "blowup": blowup_monitor(tr, ecfg, wp=cfg["classify"]["wp"], state0=state0),
        "scattering": _scatter_summary(scattering_diagnostics(tr, ecfg)),
    }
    write_json(out / "verdict.json", verdict)
    print(f"{tr.status} at t = {tr.times[-1]!r} after {tr.steps} steps")
    return _EVOLVE_EXIT[tr.status]


def _load_checked(path, p, key):
    if path is None:
        raise ConfigError("path required", key=key)
    if not Path(path).with_suffix(".json").exists():
        raise ConfigError(f"profile not found: {path}", key=key)
    fields, q, meta = read_profile(path)
    if (q.d, q.alpha, q.kappa) != (p.d, p.alpha, p.kappa):
        raise ParamsMismatch(
            f"[{key}] profile has (d, alpha, kappa) = {(q.d, q.alpha, q.kappa)}, "
            f"config has {(p.d, p.alpha, p.kappa)}"
        )
    return fields, q, meta


def _wp_for(cfg, p, gs):
    if cfg["classify"]["wp"] is not None:
        return cfg["classify"]["wp"]
    if not _needs_wp(p) or (gs.params.omega, gs.params.gamma) != (p.omega, p.gamma):
        return None
    sol = cfg["solver"]
    return compute_d_minus(p, gs.grid, gs=gs, tol=sol["tol"], max_iter=sol["max_iter"], seed=sol["seed"])["wp"]


def cmd_classify(cfg, state_path=None, gs_path=None):
    p = _params(cfg)
    state_path = state_path or cfg["classify"]["state"]
    gs_path = gs_path or cfg["classify"]["ground_state"]
    state, _, _ = _load_checked(state_path, p, "classify.state")
    gfields, q, meta = _load_checked(gs_path, p, "classify.ground_state")
    gs = GroundStateResult.from_profile(gfields, q, meta.get("d_omega"))
    verdict = classify_state(state, gs, p, wp=_wp_for(cfg, p, gs))
    text = verdict.to_json()
    write_json(_out_dir(cfg) / "verdict.json", verdict.to_dict())
    sys.stdout.write(text)
    return EXIT_OK


def _sweep_gs_row(cfg, axis, value):
    p = _params(cfg).replace(**{axis: value})
    grid = _grid(cfg, _params(cfg)).with_alpha(p.alpha)
    gs = _solve(cfg, p, grid)
    row = {
        axis: value,
        "d_omega": gs.d_omega,
        "converged": gs.converged,
        "iterations": gs.iterations,
        "r1": gs.pohozaev_res[0],
        "r2": gs.pohozaev_res[1],
        "status": "ok",
    }
    return row, np.stack([gs.phi, gs.psi])


def _sweep_mu_row(cfg, value, gs, wp):
    p = gs.params
    state = gs.fields.scaled(value)
    verdict = classify_state(state, gs, p, wp=wp)
    inv = invariants(state, p)
    act = action_nehari(state, p)
    row = {
        "mu": value,
        "label": verdict.label,
        "M": inv.M,
        "K": inv.K,
        "H": inv.H,
        "G": inv.G,
        "A_omega": act.A_omega,
        "B_omega": act.B_omega,
        "status": "ok",
    }
    if cfg["sweep"]["evolve"]:
        tr = evolve(state, _evolve_config(cfg, p))
        rep = blowup_monitor(tr, _evolve_config(cfg, p))
        row.update({
            "evolve_status": tr.status,
            "K_max_ratio": rep["K_max_ratio"],
            "detection_time": rep["detection_time"],
        })
    return row, None


def _run_row(job):
    kind, cfg, axis, value, extra = job
    try:
        if kind == "gs":
            return _sweep_gs_row(cfg, axis, value)
        return _sweep_mu_row(cfg, value, *extra)
    except (InlsError, ValueError, FloatingPointError, RuntimeError) as exc:
        return {axis: value, "status": f"error: {exc}"}, None


def _map_rows(jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [_run_row(job) for job in jobs]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs)), mp_context=ctx) as pool:
        return list(pool.map(_run_row, jobs))


def cmd_sweep(cfg, workers=None):
    sw = cfg["sweep"]
    axis, values = sw["axis"], sw["values"]
    if axis is None:
        raise ConfigError("sweep axis not set", key="sweep.axis")
    if not values:
        raise ConfigError("sweep axis has no values", key="sweep.values")
    if len(values) > sw["cap"]:
        raise ConfigError(f"{len(values)} runs exceed cap {sw['cap']}", key="sweep.cap")
    workers = workers or os.cpu_count() or 1
    if axis == "mu":
        p = _params(cfg)
        gs = _solve(cfg, p)
        wp = _wp_for(cfg, p, gs)
        jobs = [("mu", cfg, axis, v, (gs, wp)) for v in values]
        header = ["mu", "label", "M", "K", "H", "G", "A_omega", "B_omega"]
        if sw["evolve"]:
            header += ["evolve_status", "K_max_ratio", "detection_time"]
    else:
        if sw["task"] != "ground_state":
            raise ConfigError(f"task {sw['task']!r} needs axis 'mu'", key="sweep.task")
        run_values = list(values)
        if axis == "alpha" and 0.0 not in run_values:
            run_values.append(0.0)
        jobs = [("gs", cfg, axis, v, None) for v in run_values]
        header = [axis, "d_omega", "converged", "iterations", "r1", "r2"]
    results = _map_rows(jobs, workers)
    rows = [r for r, _ in results[: len(values)]]
    if axis == "alpha":
        _attach_alpha_distances(cfg, values, results)
        header += ["distance", "d_diff"]
    header.append("status")
    write_table(_out_dir(cfg) / "sweep.csv", header, rows)
    failures = sum(1 for r in rows if r["status"] != "ok")
    print(f"{len(rows)} rows, {failures} failed")
    return EXIT_ERROR if failures == len(rows) else EXIT_OK


def _attach_alpha_distances(cfg, values, results):
    base = next(((r, x) for r, x in results if r.get("alpha") == 0.0 and r["status"] == "ok"), None)
    if base is None:
        return
    p = _params(cfg)
    grid = _grid(cfg, p)
    base_row, base_x = base
    for row, x in results[: len(values)]:
        if row["status"] != "ok":
            continue
        diff = np.abs(x) - np.abs(base_x)
        row["distance"] = float(math.sqrt(h1_norm2(diff[0], diff[1], grid)))
        row["d_diff"] = abs(row["d_omega"] - base_row["d_omega"])


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML run configuration")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--seed", type=int, help="seed for stochastic initial data (u64)")
    common.add_argument("--workers", type=int, help="sweep worker processes (default: logical cores)")
    parser = argparse.ArgumentParser(prog="inlslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ground-state", parents=[common], help="compute a ground state")
    sub.add_parser("evolve", parents=[common], help="time-evolve initial data")
    cls = sub.add_parser("classify", parents=[common], help="classify initial data against a ground state")
    cls.add_argument("--state", help="initial-data profile")
    cls.add_argument("--gs", help="ground-state profile")
    sub.add_parser("sweep", parents=[common], help="parameter sweep")
    sub.add_parser("gn-constant", parents=[common], help="sharp Gagliardo-Nirenberg constant")
    return parser


def run(argv=None, environ=None):
    """Parse ``argv``, execute the command and return the exit status."""
    args = build_parser().parse_args(argv)
    try:
        cfg = config_mod.load(args.config, environ)
        if args.out is not None:
            cfg["output"]["directory"] = args.out
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("seed must be an unsigned 64-bit integer", key="--seed")
            cfg["solver"]["seed"] = args.seed
        if args.workers is not None and args.workers < 1:
            raise ConfigError("workers must be positive", key="--workers")
        if args.command == "ground-state":
            return cmd_ground_state(cfg)
        if args.command == "evolve":
            return cmd_evolve(cfg)
        if args.command == "classify":
            return cmd_classify(cfg, args.state, args.gs)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.workers)
        return cmd_gn_constant(cfg)
    except NonFinite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (InlsError, ParameterError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
