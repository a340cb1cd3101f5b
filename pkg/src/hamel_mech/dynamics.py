"""Right-hand sides of the reduced equations of motion.

All families share the reduced Lagrangian of a MechanicalSystem and the
Hamel sign convention s = +1 (left) / -1 (right):

* Euler-Poincare + Euler-Lagrange in (xi, rdot):
    d/dt (L xi + K rdot) = s ad_xi^T Pi + Q_xi
    d/dt (K^T xi + S rdot) - dl/dr = Q_r
* Lagrange-Poincare in locked velocities (Omega, rdot), block-diagonal mass.
* Constrained / zero-momentum reduced shape equations for xi = -A(r) rdot,
  with curvature force Pi . B(., rdot) on the left-hand side.

Derivatives with respect to r are central differences.
"""

import numpy as np

from . import lie
from .connection import curvature, locked_mass_matrix, mechanical  # noqa: F401  (re-export)
from .errors import InputError
from .numdiff import directional, jacobian
from .quasi import block_hamel_holonomic, chaplygin_map, structure_constants
from .system import BundleState, spd_solve

FAMILIES = ("euler-poincare", "lagrange-poincare", "constrained", "momentum-conserved")


def normalize_family(tag):
    t = str(tag).strip().lower().replace("_", "-")
    if t not in FAMILIES:
        raise InputError("unknown formulation", repr(tag))
    return t


def mass_matrix(system, r):
    return system.mass_matrix(r)


def _forces(system, forces, t, state_fn):
    n = system.n_fiber + system.n_shape
    if forces is None:
        if system.Q is None:
            return np.zeros(n)
        forces = system.Q
    Q = forces(t, state_fn()) if callable(forces) else forces
    Q = np.asarray(Q, dtype=float).reshape(-1)
    if Q.shape != (n,):
        raise InputError("forces have wrong length", f"expected {n}, got {Q.size}")
    return Q


def _shape_gradient(system, z, r):
    """d/dr of 1/2 z^T M(r) z - V(r) at fixed z."""
    if system.n_shape == 0:
        return np.zeros(0)
    return jacobian(lambda x: 0.5 * z @ system.mass_matrix(x) @ z - system.potential(x), r)


def ep_accelerations(system, r, xi, rdot, Q):
    r, xi, rdot = (np.asarray(a, dtype=float) for a in (r, xi, rdot))
    m = system.n_fiber
    z = np.concatenate([xi, rdot])
    M = system.mass_matrix(r)
    Pi = M[:m] @ z
    Mdot = directional(system.mass_matrix, r, rdot) if system.n_shape else np.zeros_like(M)
    bias = np.concatenate([system.sign * lie.ad(xi, system.group).T @ Pi,
                           _shape_gradient(system, z, r)])
    acc = spd_solve(M, bias - Mdot @ z + Q)
    return acc[:m], acc[m:]


def euler_poincare_rhs(system, state, forces=None):
    """(xi_dot, r_ddot) for a BundleState; ``forces`` is a vector, a callback
    Q(t, state), or None to use the system's own forces."""
    state.check(system)
    Q = _forces(system, forces, state.t, lambda: state)
    return ep_accelerations(system, state.r, state.xi, state.rdot, Q)


def lp_accelerations(system, r, Omega, rdot, Q):
    r, Omega, rdot = (np.asarray(a, dtype=float) for a in (r, Omega, rdot))
    m, d = system.n_fiber, system.n_shape
    conn = mechanical(system)
    L, _, _ = system.blocks(r)
    A = conn(r)
    s = system.sign
    c = structure_constants(system.group, "left").gamma
    gam_fiber = s * c                                   # gamma^b_{a l}
    E = s * np.einsum("bad,di->bai", c, A)              # gamma^b_{I a}, indexed [b, a, I]
    Pi = L @ Omega
    Q_fiber = Q[:m]
    Q_shape = Q[m:] - A.T @ Q_fiber

    Ldot = directional(lambda x: system.blocks(x)[0], r, rdot) if d else np.zeros_like(L)
    rhs1 = (Q_fiber - Ldot @ Omega
            + np.einsum("b,bai,i->a", Pi, E, rdot)
            - np.einsum("b,bal,l->a", Pi, gam_fiber, Omega))
    Omega_dot = spd_solve(L, rhs1, "locked inertia L")
    if d == 0:
        return Omega_dot, np.zeros(0)

    def reduced_shape_inertia(x):
        return locked_mass_matrix(system, x)[m:, m:]

    Sbar = reduced_shape_inertia(r)
    Sbar_dot = directional(reduced_shape_inertia, r, rdot)
    dl = jacobian(lambda x: 0.5 * Omega @ system.blocks(x)[0] @ Omega
                  + 0.5 * rdot @ reduced_shape_inertia(x) @ rdot - system.potential(x), r)
    B = curvature(conn, r)
    rhs2 = (Q_shape - Sbar_dot @ rdot + dl
            - np.einsum("b,bij,j->i", Pi, B, rdot)
            - np.einsum("b,bai,a->i", Pi, E, Omega))
    return Omega_dot, spd_solve(Sbar, rhs2, "reduced shape inertia")


def lagrange_poincare_rhs(system, r, Omega, rdot, forces=None, t=0.0, g=None):
    """(Omega_dot, r_ddot) in locked coordinates Omega = xi + A(r) rdot.

    ``forces`` are dual to (xi, rdot) as for ``euler_poincare_rhs``.
    """
    def state():
        xi = np.asarray(Omega, float) - mechanical(system)(r) @ np.asarray(rdot, float)
        return BundleState(g or lie.identity(system.group), r, xi, rdot, t)

    Q = _forces(system, forces, t, state)
    return lp_accelerations(system, r, Omega, rdot, Q)


def constrained_shape_inertia(system, conn, r):
    """[-A; I]^T M [-A; I] = S - K^T A - A^T K + A^T L A."""
    A = conn(r)
    T = np.vstack([-A, np.eye(system.n_shape)])
    return T.T @ system.mass_matrix(r) @ T


def constrained_accelerations(system, conn, r, rdot, Q):
    r, rdot = np.asarray(r, float), np.asarray(rdot, float)
    m = system.n_fiber
    A = conn(r)
    xi = -A @ rdot
    if system.n_shape == 0:
        return np.zeros(0), xi
    z = np.concatenate([xi, rdot])
    Pi = system.mass_matrix(r)[:m] @ z

    def Sc(x):
        return constrained_shape_inertia(system, conn, x)

    Sc_dot = directional(Sc, r, rdot)
    dl = jacobian(lambda x: 0.5 * rdot @ Sc(x) @ rdot - system.potential(x), r)
    B = curvature(conn, r)
    rhs = (Q[m:] - A.T @ Q[:m] - Sc_dot @ rdot + dl
           - np.einsum("b,bij,j->i", Pi, B, rdot))
    return spd_solve(Sc(r), rhs, "constrained shape inertia"), xi


def constrained_rhs(system, connection, r, rdot, forces=None, t=0.0, g=None):
    """(r_ddot, xi) for motion restricted to xi = -A(r) rdot.

    ``connection=None`` selects the mechanical connection, i.e. zero total
    momentum.
    """
    conn = mechanical(system) if connection is None else connection

    def state():
        return BundleState(g or lie.identity(system.group), r, -conn(r) @ np.asarray(rdot, float), rdot, t)

    Q = _forces(system, forces, t, state)
    return constrained_accelerations(system, conn, r, rdot, Q)


# --------------------------------------------------------------------------
# plain coordinates

def euler_lagrange_rhs(mass, q, qdot, forces=None, potential=None):
    """qddot for L = 1/2 qdot^T M(q) qdot - V(q) by direct differentiation."""
    q, qdot = np.asarray(q, float), np.asarray(qdot, float)
    V = potential or (lambda x: 0.0)
    M = np.asarray(mass(q), float)
    Mdot = directional(mass, q, qdot)
    dLdq = jacobian(lambda x: 0.5 * qdot @ np.asarray(mass(x), float) @ qdot - V(x), q)
    Q = np.zeros_like(q) if forces is None else np.asarray(forces, float)
    return spd_solve(M, Q + dLdq - Mdot @ qdot)


class CoordinateModel:
    """Lagrangian 1/2 qdot^T M(q) qdot - V(q) on q = (s, r) with constraints
    sdot = -A(q) rdot; used to cross-check the constrained equations."""

    def __init__(self, mass, connection, n_dependent, potential=None):
        self.mass = mass
        self.connection = connection
        self.m = n_dependent
        self.potential = potential or (lambda q: 0.0)

    def velocity(self, q, rdot):
        return np.concatenate([-np.asarray(self.connection(q), float) @ rdot, rdot])

    def acceleration(self, q, rdot, rddot):
        qdot = self.velocity(q, rdot)
        Adot = directional(self.connection, q, qdot)
        A = np.asarray(self.connection(q), float)
        return np.concatenate([-A @ rddot - Adot @ rdot, rddot])

    def constrained_inertia(self, q):
        d = np.asarray(self.mass(q)).shape[0] - self.m
        T = np.vstack([-np.asarray(self.connection(q), float), np.eye(d)])
        return T.T @ np.asarray(self.mass(q), float) @ T


def voronets_residual(model, q, rdot, rddot, forces=None):
    """E_r - A^T E_s - (Q_r - A^T Q_s), E = Euler-Lagrange expression of the
    unconstrained Lagrangian along the constrained motion."""
    q, rdot, rddot = (np.asarray(a, float) for a in (q, rdot, rddot))
    m = model.m
    qdot = model.velocity(q, rdot)
    qddot = model.acceleration(q, rdot, rddot)
    M = np.asarray(model.mass(q), float)
    Mdot = directional(model.mass, q, qdot)
    dLdq = jacobian(lambda x: 0.5 * qdot @ np.asarray(model.mass(x), float) @ qdot - model.potential(x), q)
    E = M @ qddot + Mdot @ qdot - dLdq
    Q = np.zeros_like(q) if forces is None else np.asarray(forces, float)
    A = np.asarray(model.connection(q), float)
    return (E[m:] - A.T @ E[:m]) - (Q[m:] - A.T @ Q[:m])


def hamel_constrained_residual(model, q, rdot, rddot, forces=None):
    """Boltzmann-Hamel form of the constrained equations:

    d/dt dLc/drdot - dLc/dr + A^T dLc/ds + p_a gamma^a_IJ rdot^J - Q_I,

    with Lc the constrained Lagrangian, p = dL/dsdot and gamma taken from the
    block quasi-velocity map [[I, A(q)], [0, I]].
    """
    q, rdot, rddot = (np.asarray(a, float) for a in (q, rdot, rddot))
    m = model.m
    d = rdot.size
    qdot = model.velocity(q, rdot)
    Sc = model.constrained_inertia(q)
    Sc_dot = directional(model.constrained_inertia, q, qdot)
    dLc = jacobian(lambda x: 0.5 * rdot @ model.constrained_inertia(x) @ rdot - model.potential(x), q)
    A = np.asarray(model.connection(q), float)
    p = (np.asarray(model.mass(q), float) @ qdot)[:m]
    gamma = block_hamel_holonomic(chaplygin_map(model.connection, m, d), q).curvature_block
    Q = np.zeros_like(q) if forces is None else np.asarray(forces, float)
    return (Sc @ rddot + Sc_dot @ rdot - dLc[m:] + A.T @ dLc[:m]
            + np.einsum("a,aij,j->i", p, gamma, rdot) - (Q[m:] - A.T @ Q[:m]))
