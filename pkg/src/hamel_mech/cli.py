"""Command-line front end.

    hamel-mech simulate --config run.toml --out results/
    hamel-mech phase    --config run.toml --out results/ [--momentum]
    hamel-mech coeffs   --config run.toml --out results/
    hamel-mech check    --config run.toml --out results/

Exit status: 0 success, 2 config/input error, 3 numerical failure.  Errors
print one JSON line {"status": "error", "exit_code": ..., "reason": ...} on
stderr.  ``HAMEL_MECH_LOG`` sets the log level (debug, info, warning).
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from . import lie, models, quasi
from .connection import curvature, locked_mass_matrix, mechanical
from .dynamics import normalize_family
from .errors import ConfigError, HamelMechError, InputError
from .reconstruction import (ShapePath, diagnostics, dynamic_phase, geometric_phase, integrate, polygon_loop,
                             rotor_cycle_path, square_loop, total_phase)
from .system import BundleState

log = logging.getLogger("hamel_mech")


def _setup_logging():
    level = os.environ.get("HAMEL_MECH_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _num(x):
    """Deterministic float text."""
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path, obj):
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# config

def load_config(path):
    try:
        with open(path, "rb") as fh:
            doc = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    if "model" not in doc:
        raise ConfigError("model: missing required section")
    return doc


def _run_settings(doc, args):
    run = doc.get("run", {})
    dt = args.dt if getattr(args, "dt", None) is not None else run.get("dt")
    t_end = args.t_end if getattr(args, "t_end", None) is not None else run.get("t_end")
    if dt is None:
        raise ConfigError("run.dt: missing required field")
    if t_end is None:
        raise ConfigError("run.t_end: missing required field")
    try:
        dt, t_end = float(dt), float(t_end)
    except (TypeError, ValueError):
        raise ConfigError("run.dt and run.t_end must be numbers") from None
    if not (dt > 0 and math.isfinite(dt)):
        raise ConfigError("dt must be positive")
    if not (t_end >= 0 and math.isfinite(t_end)):
        raise ConfigError("t_end must be non-negative")
    every = run.get("record_every", 1)
    if not isinstance(every, int) or every < 1:
        raise ConfigError("run.record_every: expected positive integer")
    return dt, t_end, every


def _vector(section, key, n, path, default=0.0):
    if key not in section:
        return np.full(n, default)
    try:
        v = np.asarray(section[key], dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}: expected numbers") from None
    if v.size != n:
        raise ConfigError(f"{path}.{key}: expected {n} entries, got {v.size}")
    return v


def _initial_state(doc, system):
    init = doc.get("run", {}).get("initial", {})
    path = "run.initial"
    m, d = system.n_fiber, system.n_shape
    R = np.eye(3)
    if "rotation" in init:
        try:
            R = np.asarray(init["rotation"], float).reshape(3, 3)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}.rotation: expected 3x3 numbers") from None
    p = _vector(init, "translation", 3, path) if system.group is not lie.Group.SO3 else None
    try:
        g = lie.GroupElement(system.group, R, p)
    except InputError as exc:
        raise ConfigError(f"{path}.rotation: {exc}") from None
    return BundleState(g, _vector(init, "r", d, path), _vector(init, "xi", m, path),
                       _vector(init, "rdot", d, path), 0.0)


def _model(doc):
    return models.load_model(doc["model"])


# --------------------------------------------------------------------------
# commands

def _header(system):
    cols = ["t"] + [f"R{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)] + ["p1", "p2", "p3"]
    cols += [f"xi{k + 1}" for k in range(system.n_fiber)]
    cols += [f"r{k + 1}" for k in range(system.n_shape)]
    cols += [f"rdot{k + 1}" for k in range(system.n_shape)]
    return cols + ["energy", "momentum_norm", "constraint_residual"]


def cmd_simulate(doc, args, out):
    system, conn = _model(doc)
    family = normalize_family(doc.get("run", {}).get("formulation", "euler-poincare"))
    if family == "constrained" and conn is None:
        raise ConfigError("run.formulation: constrained runs need a model with a connection")
    dt, t_end, every = _run_settings(doc, args)
    state0 = _initial_state(doc, system)
    log.info("simulate %s (%s) t_end=%s dt=%s", system.name, family, t_end, dt)
    traj = integrate(system, family, state0, t_end, dt, connection=conn, record_every=every)
    diag = np.array([diagnostics(system, s, family, conn) for s in traj.states])
    with open(out / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_header(system))
        for s, (e, mu, res) in zip(traj.states, diag):
            row = [s.t, *s.g.flat(), *s.xi, *s.r, *s.rdot, e, mu, res]
            w.writerow([_num(x) for x in row])
    e0 = diag[0, 0]
    summary = {
        "model": system.name,
        "formulation": family,
        "samples": len(traj.states),
        "t_end": t_end,
        "dt": dt,
        "energy_initial": e0,
        "energy_drift_max": float(np.abs(diag[:, 0] - e0).max()),
        "energy_drift_relative": float(np.abs(diag[:, 0] - e0).max() / max(abs(e0), 1e-300)),
        "momentum_drift_max": float(np.abs(diag[:, 1] - diag[0, 1]).max()),
        "constraint_residual_max": float(diag[:, 2].max()),
        "rebase_events": traj.rebase_events,
    }
    _write_json(out / "diagnostics.json", summary)
    resolved = dict(doc)
    resolved["run"] = {**doc.get("run", {}), "dt": dt, "t_end": t_end, "formulation": family}
    (out / "config.resolved.toml").write_text(tomli_w.dumps(resolved))
    return summary


def _path_from_config(doc, system):
    ph = doc.get("phase")
    if ph is None:
        raise ConfigError("phase: missing required section")
    kind = ph.get("path", "rotor-cycle")
    period = float(ph.get("period", 1.0))
    if not period > 0:
        raise ConfigError("phase.period: must be positive")
    if kind == "rotor-cycle":
        if system.n_shape != 3:
            raise ConfigError("phase.path: rotor-cycle needs three shape coordinates")
        return rotor_cycle_path(period)
    if kind == "square":
        for key in ("center", "side"):
            if key not in ph:
                raise ConfigError(f"phase.{key}: missing required field")
        center = _vector(ph, "center", system.n_shape, "phase")
        return square_loop(center, float(ph["side"]), period, tuple(ph.get("plane", (0, 1))))
    if kind == "polygon":
        if "vertices" not in ph:
            raise ConfigError("phase.vertices: missing required field")
        verts = np.asarray(ph["vertices"], float)
        if verts.ndim != 2 or verts.shape[1] != system.n_shape:
            raise ConfigError("phase.vertices: expected a list of shape points")
        return polygon_loop(verts, period)
    if kind == "open-segment":
        a = _vector(ph, "start", system.n_shape, "phase")
        b = _vector(ph, "end", system.n_shape, "phase")
        return ShapePath(lambda t: a + (b - a) * t / period, lambda t: (b - a) / period, period, name="segment")
    raise ConfigError(f"phase.path: unknown path {kind!r}")


def _element_record(g):
    return {"rotation": g.rotation.tolist(),
            "translation": (g.translation if g.group is not lie.Group.SO3 else np.zeros(3)).tolist(),
            "log": lie.log(g).tolist()}


def cmd_phase(doc, args, out):
    system, conn = _model(doc)
    path = _path_from_config(doc, system)
    if path.closure_error() > 1e-10:
        raise InputError("shape path is not closed")
    ph = doc["phase"]
    cycles = ph.get("cycles", 1)
    if not isinstance(cycles, int) or cycles < 1:
        raise ConfigError("phase.cycles: expected positive integer")
    dt = args.dt if args.dt is not None else float(ph.get("dt", doc.get("run", {}).get("dt", 1e-3)))
    if not dt > 0:
        raise ConfigError("dt must be positive")
    connection = conn or mechanical(system)
    geo = geometric_phase(connection, path, dt=dt, cycles=cycles)
    report = {"model": system.name, "path": path.name, "cycles": cycles, "dt": dt,
              "geometric": {"per_cycle": [_element_record(g) for g in geo.per_cycle],
                            "total": _element_record(geo.total)}}
    if args.momentum:
        spec = ph.get("momentum", "injected")
        if isinstance(spec, str):
            if spec != "injected":
                raise ConfigError("phase.momentum: expected 'injected' or a vector")
            Pi0 = system.blocks(path.position(0.0))[1] @ path.velocity(0.0)
        else:
            Pi0 = _vector(ph, "momentum", system.n_fiber, "phase")
        tot = total_phase(system, path, Pi0, dt=dt, cycles=cycles, connection=conn)
        dyn = dynamic_phase(system, path, Pi0, dt=dt, cycles=cycles)
        report["momentum"] = Pi0.tolist()
        report["total"] = {"per_cycle": [_element_record(g) for g in tot.per_cycle],
                           "total": _element_record(tot.total)}
        report["dynamic"] = {"per_cycle": [_element_record(g) for g in dyn.per_cycle],
                             "total": _element_record(dyn.total)}
    _write_json(out / "phase.json", report)
    return report


def _table(arr, upper_offset, lower_offsets, tol=0.0):
    """Non-zero entries of a 3-index array with one-based labels."""
    rows = []
    for idx in zip(*np.nonzero(np.abs(arr) > tol)):
        a, i, j = (int(k) for k in idx)
        rows.append({"upper": a + 1 + upper_offset,
                     "lower": [i + 1 + lower_offsets[0], j + 1 + lower_offsets[1]],
                     "value": float(arr[a, i, j])})
    return rows


def _points(sec, n):
    try:
        pts = np.asarray(sec.get("points", [[0.0] * n]), float)
        return pts.reshape(-1, n)
    except (TypeError, ValueError):
        raise ConfigError(f"coeffs.points: expected a list of points with {n} entries") from None


def cmd_coeffs(doc, args, out):
    sec = doc.get("coeffs", {})
    source = sec.get("source", "connection")
    tol = float(sec.get("zero_tol", 1e-12))
    report = {"source": source, "points": []}
    if source == "group-velocity":
        g = sec.get("group", "SO3")
        triv = sec.get("trivialization", "left")
        try:
            qmap = quasi.group_velocity_map(g, triv)
        except InputError as exc:
            raise ConfigError(f"coeffs: {exc}") from None
        for q in _points(sec, qmap.n):
            gam = quasi.hamel_numeric(qmap, q).gamma
            report["points"].append({"q": q.tolist(), "hamel": _table(gam, 0, (0, 0), 1e-8)})
        report["structure_constants"] = _table(quasi.structure_constants(g, triv).gamma, 0, (0, 0))
    elif source == "constant":
        n = sec.get("n", 3)
        if not isinstance(n, int) or n < 1:
            raise ConfigError("coeffs.n: expected positive integer")
        try:
            C = np.asarray(sec.get("matrix", np.eye(n)), float)
        except (TypeError, ValueError):
            raise ConfigError("coeffs.matrix: expected numbers") from None
        if C.shape != (n, n):
            raise ConfigError(f"coeffs.matrix: expected shape ({n}, {n}), got {C.shape}")
        qmap = quasi.QuasiVelocityMap(lambda q: C, C.shape[0])
        for q in _points(sec, qmap.n):
            gam = quasi.hamel_numeric(qmap, q).gamma
            report["points"].append({"q": q.tolist(), "hamel": _table(gam, 0, (0, 0)),
                                     "max_abs": float(np.abs(gam).max())})
    elif source == "connection":
        system, conn = _model(doc)
        conn = conn or mechanical(system)
        if conn.n_shape == 0:
            raise ConfigError("coeffs.source: model has no shape coordinates, use group-velocity")
        m = conn.n_fiber
        for r in _points(sec, conn.n_shape):
            A = conn(r)
            B = curvature(conn, r)
            report["points"].append({
                "r": r.tolist(),
                "connection": [{"upper": a + 1, "lower": m + i + 1, "value": float(A[a, i])}
                               for a, i in zip(*np.nonzero(np.abs(A) > tol))],
                "curvature": _table(B, 0, (m, m), tol),
                "max_abs_curvature": float(np.abs(B).max(initial=0.0)),
            })
        report["model"] = system.name
    else:
        raise ConfigError(f"coeffs.source: unknown source {source!r}")
    _write_json(out / "coeffs.json", report)
    return report


def cmd_check(doc, args, out):
    system, conn = _model(doc)
    rng = np.random.default_rng(0)
    d = system.n_shape
    samples = [np.zeros(d)] + [rng.uniform(-1.0, 1.0, d) for _ in range(4)]
    results = []

    def record(name, ok, value):
        results.append({"name": name, "pass": bool(ok), "value": float(value)})

    worst_sym = worst_dec = worst_conn = worst_curv = 0.0
    for r in samples:
        M = system.mass_matrix(r)
        worst_sym = max(worst_sym, float(np.abs(M - M.T).max()))
        np.linalg.cholesky(M)
        Ml = locked_mass_matrix(system, r)
        worst_dec = max(worst_dec, float(np.abs(Ml[:system.n_fiber, system.n_fiber:]).max(initial=0.0)))
        L, K, _ = system.blocks(r)
        A = mechanical(system)(r)
        worst_conn = max(worst_conn, float(np.abs(L @ A - K).max(initial=0.0)))
        for c in filter(None, (conn, mechanical(system))):
            B = curvature(c, r)
            worst_curv = max(worst_curv, float(np.abs(B + B.transpose(0, 2, 1)).max(initial=0.0)))
    record("mass_matrix_symmetric", worst_sym < 1e-12, worst_sym)
    record("locked_mass_decoupled", worst_dec == 0.0, worst_dec)
    record("mechanical_connection_identity", worst_conn < 1e-10, worst_conn)
    record("curvature_antisymmetric", worst_curv < 1e-10, worst_curv)

    g0 = lie.identity(system.group)
    xi0 = rng.uniform(-0.5, 0.5, system.n_fiber)
    rd0 = rng.uniform(-1.0, 1.0, d)
    family = "constrained" if conn is not None else "euler-poincare"
    traj = integrate(system, family, BundleState(g0, np.zeros(d), xi0, rd0), 0.1, 1e-3, connection=conn)
    e = np.array([diagnostics(system, s, family, conn)[0] for s in traj.states])
    drift = float(np.abs(e - e[0]).max() / max(abs(e[0]), 1e-300))
    record("energy_conservation", drift < 1e-8, drift)
    report = {"model": system.name, "checks": results, "pass": all(r["pass"] for r in results)}
    _write_json(out / "check.json", report)
    for r in results:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {r['name']} {r['value']:.3e}")
    if not report["pass"]:
        raise _CheckFailed("invariant check failed")
    return report


class _CheckFailed(HamelMechError):
    exit_code = 3


COMMANDS = {"simulate": cmd_simulate, "phase": cmd_phase, "coeffs": cmd_coeffs, "check": cmd_check}


def build_parser():
    p = argparse.ArgumentParser(prog="hamel-mech", description="Hamel-equation simulations on Lie-group bundles.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", action="append", required=True, metavar="PATH",
                       help="TOML config; repeat for batch runs")
        s.add_argument("--out", default=".", metavar="DIR", help="output directory")
        s.add_argument("--dt", type=float, default=None, help="override the time step (s)")
        s.add_argument("--t-end", type=float, default=None, dest="t_end", help="override the end time (s)")
        s.add_argument("--momentum", action="store_true", help="phase: include the momentum drift term")
        s.add_argument("--jobs", type=int, default=1, metavar="N", help="run N configs concurrently")
    return p


def _run_one(command, config, out, args):
    """Run one config; returns (exit code, error line or None)."""
    try:
        doc = load_config(config)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[command](doc, args, out)
        return 0, None
    except HamelMechError as exc:
        return exc.exit_code, json.dumps({"status": "error", "exit_code": exc.exit_code,
                                          "reason": str(exc), "config": str(config)})
    except (np.linalg.LinAlgError, FloatingPointError, OverflowError) as exc:
        return 3, json.dumps({"status": "error", "exit_code": 3, "reason": f"numerical failure: {exc}",
                              "config": str(config)})


def _run_packed(packed):
    return _run_one(*packed)


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    configs = args.config
    if args.jobs < 1:
        print(json.dumps({"status": "error", "exit_code": 2, "reason": "jobs must be positive"}), file=sys.stderr)
        return 2
    if len(configs) == 1:
        jobs = [(args.command, configs[0], out, args)]
    else:
        jobs = [(args.command, c, out / Path(c).stem, args) for c in configs]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_packed, jobs))
    else:
        results = [_run_packed(j) for j in jobs]
    code = 0
    for rc, err in results:
        if err:
            print(err, file=sys.stderr)
        code = max(code, rc)
    return code


if __name__ == "__main__":
    sys.exit(main())
