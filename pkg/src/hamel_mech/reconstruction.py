"""Lie-group time integration and phase computation.

The integrator is the Munthe-Kaas fourth-order Runge-Kutta method.  The
fiber is written g = g0 exp(eta) (left) or exp(eta) g0 (right), eta obeys
eta_dot = dexpinv_eta(xi), and eta is integrated by classical RK4 together
with the remaining state y.  Whenever the rotational part of eta exceeds
pi/2 the chart is moved: g0 <- g, eta <- 0.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dynamics, lie
from .connection import curvature, mechanical, mechanical_connection
from .errors import DivergenceError, InputError
from .system import BundleState, conserved_momentum, energy, momentum, spd_solve

REBASE_THRESHOLD = math.pi / 2
CLOSED_TOL = 1e-10


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    rebase_events: list = field(default_factory=list)
    family: str = ""

    def __len__(self):
        return len(self.states)

    @property
    def final(self):
        return self.states[-1]

    @property
    def xi(self):
        return np.array([s.xi for s in self.states])

    @property
    def r(self):
        return np.array([s.r for s in self.states])

    @property
    def rdot(self):
        return np.array([s.rdot for s in self.states])

    @property
    def poses(self):
        return [s.g for s in self.states]


@dataclass
class PhaseResult:
    """``phase`` is the first cycle's displacement, ``total`` the displacement
    over all cycles; displacements are g_prev^-1 g (left) or g g_prev^-1 (right)."""

    phase: lie.GroupElement
    cycle_count: int
    per_cycle: list
    total: lie.GroupElement
    trajectory: Trajectory = None

    @property
    def log(self):
        return lie.log(self.phase)

    @property
    def per_cycle_logs(self):
        return [lie.log(p) for p in self.per_cycle]


def _place(g0, eta, triv):
    e = lie.exp(eta, g0.group)
    return g0 @ e if triv is lie.Trivialization.LEFT else e @ g0


def rebase(eta, g0, trivialization="left"):
    """Fold the chart offset eta into the base point; returns (0, g)."""
    triv = lie.as_trivialization(trivialization)
    eta = np.asarray(eta, float)
    if not np.any(eta):
        return np.zeros_like(eta), g0
    return np.zeros_like(eta), _place(g0, eta, triv).renormalized()


def _step_count(t0, t_end, dt):
    if not dt > 0 or not math.isfinite(dt):
        raise InputError("dt must be positive")
    span = t_end - t0
    if span < 0 or not math.isfinite(span):
        raise InputError("t_end must not precede the start time")
    n = int(math.ceil(span / dt - 1e-9))
    return n, (span / n if n else dt)


def run_mk_rk4(stage, group, trivialization, g0, y0, t0, t_end, dt,
               record=None, record_every=1, rebase_threshold=REBASE_THRESHOLD):
    """Integrate g and y from t0 to t_end.

    ``stage(t, g, y)`` returns (xi, y_dot).  ``record(t, g, y)`` is called at
    t0 and after every ``record_every`` steps (and always at the end).
    Returns (g, y, rebase_step_indices).
    """
    group = lie.as_group(group)
    triv = lie.as_trivialization(trivialization)
    n, h = _step_count(t0, t_end, dt)
    y = np.array(y0, dtype=float)
    eta = np.zeros(lie.algebra_dim(group))
    events = []
    ny = y.size

    def f(t, z):
        e = z[:eta.size]
        xi, ydot = stage(t, _place(g0, e, triv), z[eta.size:])
        return np.concatenate([lie.dexpinv(e, group, triv) @ xi, np.asarray(ydot, float).reshape(ny)])

    if record:
        record(t0, g0, y)
    t = t0
    for k in range(n):
        z = np.concatenate([eta, y])
        try:
            k1 = f(t, z)
            k2 = f(t + h / 2, z + h / 2 * k1)
            k3 = f(t + h / 2, z + h / 2 * k2)
            k4 = f(t + h, z + h * k3)
        except (FloatingPointError, ValueError, np.linalg.LinAlgError, InputError) as exc:
            # non-finite stage values surface here as ValueError from the solvers
            raise DivergenceError(f"integration failed: {exc}", t) from None
        z = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(z)):
            raise DivergenceError("non-finite state", t)
        t = t0 + (k + 1) * h
        eta, y = z[:eta.size], z[eta.size:]
        if np.linalg.norm(lie.rotation_part(eta)) > rebase_threshold:
            eta, g0 = rebase(eta, g0, triv)
            events.append(k + 1)
        if record and ((k + 1) % record_every == 0 or k + 1 == n):
            record(t, _place(g0, eta, triv), y)
    return _place(g0, eta, triv), y, events


def _shape_split(y, d):
    return y[:d], y[d:]


def integrate(system, family, state0, t_end, dt, connection=None, forces=None,
              record_every=1, rebase_threshold=REBASE_THRESHOLD):
    """Integrate one of the equation families from ``state0`` to ``t_end``.

    For 'constrained' (``connection`` required) and 'momentum-conserved'
    (mechanical connection) the fiber velocity is determined by the
    constraint xi = -A(r) rdot and ``state0.xi`` is ignored.
    """
    family = dynamics.normalize_family(family)
    state0.check(system)
    m, d = system.n_fiber, system.n_shape
    G, triv = system.group, system.trivialization

    def force_vec(t, g, r, xi, rdot):
        return dynamics._forces(system, forces, t, lambda: BundleState(g, r, xi, rdot, t))

    if family == "euler-poincare":
        y0 = np.concatenate([state0.r, state0.xi, state0.rdot])

        def unpack(y):
            return y[:d], y[d:d + m], y[d + m:]

        def stage(t, g, y):
            r, xi, rdot = unpack(y)
            xid, rdd = dynamics.ep_accelerations(system, r, xi, rdot, force_vec(t, g, r, xi, rdot))
            return xi, np.concatenate([rdot, xid, rdd])

    elif family == "lagrange-poincare":
        conn = mechanical(system)
        y0 = np.concatenate([state0.r, state0.xi + conn(state0.r) @ state0.rdot, state0.rdot])

        def unpack(y):
            r, Om, rdot = y[:d], y[d:d + m], y[d + m:]
            return r, Om - conn(r) @ rdot, rdot

        def stage(t, g, y):
            r, Om, rdot = y[:d], y[d:d + m], y[d + m:]
            xi = Om - conn(r) @ rdot
            Omd, rdd = dynamics.lp_accelerations(system, r, Om, rdot, force_vec(t, g, r, xi, rdot))
            return xi, np.concatenate([rdot, Omd, rdd])

    else:
        if family == "constrained":
            if connection is None:
                raise InputError("constrained formulation needs a connection")
            conn = connection
        else:
            conn = mechanical(system)
        y0 = np.concatenate([state0.r, state0.rdot])

        def unpack(y):
            r, rdot = _shape_split(y, d)
            return r, -conn(r) @ rdot, rdot

        def stage(t, g, y):
            r, rdot = _shape_split(y, d)
            xi = -conn(r) @ rdot
            rdd, _ = dynamics.constrained_accelerations(system, conn, r, rdot, force_vec(t, g, r, xi, rdot))
            return xi, np.concatenate([rdot, rdd])

    times, states = [], []

    def record(t, g, y):
        r, xi, rdot = unpack(y)
        times.append(t)
        states.append(BundleState(g, r, xi, rdot, t))

    _, _, events = run_mk_rk4(stage, G, triv, state0.g, y0, state0.t, t_end, dt,
                              record, record_every, rebase_threshold)
    return Trajectory(np.array(times), states, events, family)


def integrate_kinematics(xi_of_t, group, trivialization, g0, t_end, dt, t0=0.0,
                         record_every=1, rebase_threshold=REBASE_THRESHOLD):
    """Reconstruct g from a prescribed velocity xi(t); returns (times, poses, rebase events)."""
    times, poses = [], []

    def record(t, g, y):
        times.append(t)
        poses.append(g)

    run_mk_rk4(lambda t, g, y: (np.asarray(xi_of_t(t), float), np.zeros(0)),
               group, trivialization, g0, np.zeros(0), t0, t_end, dt,
               record, record_every, rebase_threshold)
    return np.array(times), poses


# --------------------------------------------------------------------------
# shape paths

@dataclass(frozen=True, eq=False)
class ShapePath:
    """Prescribed shape motion r(t), rdot(t) on [0, duration] (any t if periodic)."""

    position: Callable
    velocity: Callable
    duration: float
    periodic: bool = False
    name: str = ""

    def covers(self, t_end):
        return self.periodic or t_end <= self.duration + 1e-12

    def closure_error(self):
        return float(np.linalg.norm(np.asarray(self.position(self.duration), float)
                                    - np.asarray(self.position(0.0), float)))


def rotor_cycle_path(period=1.0):
    """r(t) = (pi (cos wt - 1), pi sin wt, pi/2 sin 2wt), w = 2 pi / period."""
    w = 2 * math.pi / period

    def pos(t):
        return np.array([math.pi * (math.cos(w * t) - 1), math.pi * math.sin(w * t),
                         math.pi / 2 * math.sin(2 * w * t)])

    def vel(t):
        return np.array([-math.pi * w * math.sin(w * t), math.pi * w * math.cos(w * t),
                         math.pi * w * math.cos(2 * w * t)])

    return ShapePath(pos, vel, period, periodic=True, name="rotor-cycle")


def polygon_loop(vertices, period=1.0):
    """Closed polygon traversed with equal time per edge and smooth
    (zero-velocity) corners, so the path is C^1."""
    V = np.asarray(vertices, dtype=float)
    nseg = len(V)
    T = period / nseg

    def locate(t):
        t = t % period
        k = min(int(t // T), nseg - 1)
        tau = (t - k * T) / T
        return k, tau

    def pos(t):
        k, tau = locate(t)
        s = tau - math.sin(2 * math.pi * tau) / (2 * math.pi)
        return V[k] + s * (V[(k + 1) % nseg] - V[k])

    def vel(t):
        k, tau = locate(t)
        sd = (1 - math.cos(2 * math.pi * tau)) / T
        return sd * (V[(k + 1) % nseg] - V[k])

    return ShapePath(pos, vel, period, periodic=True, name="polygon")


def square_loop(center, side, period=1.0, plane=(0, 1), dim=None):
    """Counter-clockwise square of the given side in coordinates ``plane``."""
    c = np.asarray(center, dtype=float)
    dim = c.size if dim is None else dim
    i, j = plane
    verts = []
    for di, dj in [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]:
        v = c.copy()
        v[i] += di * side
        v[j] += dj * side
        verts.append(v)
    return polygon_loop(verts, period)


def constant_path(r, duration=math.inf):
    r = np.array(r, dtype=float)
    zero = np.zeros_like(r)
    return ShapePath(lambda t: r, lambda t: zero, duration, periodic=math.isinf(duration), name="constant")


def _displacement(prev, cur, triv):
    return prev.inverse() @ cur if triv is lie.Trivialization.LEFT else cur @ prev.inverse()


def _phase_result(poses_at_cycles, triv, trajectory):
    per = [_displacement(a, b, triv) for a, b in zip(poses_at_cycles[:-1], poses_at_cycles[1:])]
    total = _displacement(poses_at_cycles[0], poses_at_cycles[-1], triv)
    return PhaseResult(per[0], len(per), per, total, trajectory)


def _cycle_poses(traj, period, cycles):
    out = []
    for k in range(cycles + 1):
        i = int(np.argmin(np.abs(traj.times - k * period)))
        if abs(traj.times[i] - k * period) > 1e-9:
            raise InputError("dt does not divide the cycle period")
        out.append(traj.states[i].g)
    return out


def _drift_trajectory(conn, locked_inverse, transport, path, g0, t_end, dt, record_every=1):
    G, triv = conn.group, conn.trivialization
    times, states = [], []

    def velocity(t, g):
        r, rdot = np.asarray(path.position(t), float), np.asarray(path.velocity(t), float)
        xi = -conn(r) @ rdot
        if transport is not None:
            xi = xi + locked_inverse(r, transport(g))
        return r, xi, rdot

    def record(t, g, y):
        r, xi, rdot = velocity(t, g)
        times.append(t)
        states.append(BundleState(g, r, xi, rdot, t))

    run_mk_rk4(lambda t, g, y: (velocity(t, g)[1], np.zeros(0)), G, triv, g0, np.zeros(0),
               0.0, t_end, dt, record, record_every)
    return Trajectory(np.array(times), states, [], "reconstruction")


def _transport(system, momentum0, g0):
    """Body/spatial momentum at g carrying the conserved value fixed by (g0, momentum0)."""
    Pi0 = np.asarray(momentum0, float)
    Ad0 = lie.adjoint(g0)
    if system.trivialization is lie.Trivialization.LEFT:
        mu = np.linalg.solve(Ad0.T, Pi0)
        return lambda g: lie.adjoint(g).T @ mu
    mu = Ad0.T @ Pi0
    return lambda g: np.linalg.solve(lie.adjoint(g).T, mu)


def reconstruct_with_drift(system, momentum0, path, g0, dt, t_end=None, connection=None, record_every=1):
    """Fiber motion for a prescribed shape path with conserved momentum.

    xi = L(r)^-1 Pi(g) - A(r) rdot, where Pi(g) is ``momentum0`` (given at
    g0, in the system's trivialization) transported so that the spatial
    momentum stays constant.  ``momentum0 = 0`` gives the geometric flow.
    """
    t_end = path.duration if t_end is None else t_end
    if not path.covers(t_end):
        raise InputError("shape path does not cover the time interval", f"[0, {t_end}]")
    conn = mechanical(system) if connection is None else connection
    Pi0 = np.zeros(system.n_fiber) if momentum0 is None else np.asarray(momentum0, float)
    if Pi0.shape != (system.n_fiber,):
        raise InputError("momentum has wrong length")
    transport = _transport(system, Pi0, g0) if np.any(Pi0) else None

    def locked_inverse(r, Pi):
        return spd_solve(system.blocks(r)[0], Pi, "locked inertia L")

    return _drift_trajectory(conn, locked_inverse, transport, path, g0, t_end, dt, record_every)


def geometric_phase(connection, path, g0=None, dt=1e-3, cycles=1):
    """Per-cycle fiber displacement for a closed shape path with xi = -A(r) rdot."""
    if path.closure_error() > CLOSED_TOL:
        raise InputError("shape path is not closed", f"|r(T) - r(0)| = {path.closure_error():.3e}")
    if cycles < 1:
        raise InputError("cycles must be at least 1")
    T = path.duration
    if cycles > 1 and not path.periodic:
        raise InputError("multiple cycles need a periodic path")
    g0 = g0 or lie.identity(connection.group)
    traj = _drift_trajectory(connection, None, None, path, g0, cycles * T, dt)
    return _phase_result(_cycle_poses(traj, T, cycles), connection.trivialization, traj)


def total_phase(system, path, momentum0, g0=None, dt=1e-3, cycles=1, connection=None):
    """Per-cycle displacement including the momentum drift term."""
    if path.closure_error() > CLOSED_TOL:
        raise InputError("shape path is not closed", f"|r(T) - r(0)| = {path.closure_error():.3e}")
    T = path.duration
    g0 = g0 or lie.identity(system.group)
    traj = reconstruct_with_drift(system, momentum0, path, g0, dt, cycles * T, connection)
    return _phase_result(_cycle_poses(traj, T, cycles), system.trivialization, traj)


def dynamic_phase(system, path, momentum0, g0=None, dt=1e-3, cycles=1):
    """Displacement from the momentum term alone: shape held at r(0) for the
    same period, so xi = L(r0)^-1 Pi(g)."""
    r0 = np.array(path.position(0.0), dtype=float)
    zero = np.zeros_like(r0)
    frozen = ShapePath(lambda t: r0, lambda t: zero, path.duration, periodic=True, name="frozen")
    return total_phase(system, frozen, momentum0, g0, dt, cycles)


def pseudo_holonomy_scan(connection, grid, tol=1e-8):
    """Grid points where the curvature vanishes (max-norm below ``tol``).

    ``grid`` is an (N, d) array of points or a sequence of d 1-D axes.
    """
    if isinstance(grid, (list, tuple)) and len(grid) == connection.n_shape and all(np.ndim(a) == 1 for a in grid):
        mesh = np.meshgrid(*[np.asarray(a, float) for a in grid], indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
    else:
        pts = np.asarray(grid, float).reshape(-1, connection.n_shape)
    return [p for p in pts if np.abs(curvature(connection, p)).max(initial=0.0) < tol]


def diagnostics(system, state, family, connection=None):
    """(energy, momentum norm, constraint residual) for one state.

    Momentum is the conserved (spatial) representation.  The residual is
    |xi + A rdot| for constrained runs, |Pi| for zero-momentum runs and the
    orthonormality defect of the rotation otherwise.
    """
    e = energy(system, state.r, state.xi, state.rdot)
    mu = float(np.linalg.norm(conserved_momentum(system, state.g, state.r, state.xi, state.rdot)))
    if family == "constrained" and connection is not None:
        res = float(np.linalg.norm(state.xi + connection(state.r) @ state.rdot))
    elif family == "momentum-conserved":
        res = float(np.linalg.norm(momentum(system, state.r, state.xi, state.rdot)))
    else:
        res = state.g.orthonormality_error()
    return e, mu, res


__all__ = [
    "PhaseResult", "ShapePath", "Trajectory", "constant_path", "diagnostics", "dynamic_phase", "geometric_phase",
    "integrate", "integrate_kinematics", "mechanical_connection", "polygon_loop",
    "pseudo_holonomy_scan", "rebase", "reconstruct_with_drift", "rotor_cycle_path",
    "run_mk_rk4", "square_loop", "total_phase",
]
