"""Mass matrix as a Riemannian metric: Christoffel symbols, curvature,
covariant equations of motion and the linearized (Jacobi) equation.

Index conventions
-----------------
``christoffel(...)[a, b, c]`` = Gamma^a_bc.
``riemann_tensor(...)[a, b, c, d]`` = R^a_bcd with
R(d_c, d_d) d_b = R^a_bcd d_a and R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y],
so the 2-sphere has R_{theta phi theta phi} = sin^2(theta) > 0.

Forces are covectors (generalized forces) Q_a; they are raised with the
inverse metric where a vector is needed.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError
from .numdiff import jacobian
from .system import spd_factor, spd_solve

H_OUTER = 1e-5


@dataclass(frozen=True, eq=False)
class Metric:
    n: int
    g: Callable

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n,):
            raise InputError("coordinate dimension mismatch", f"expected {self.n}, got {q.shape}")
        G = np.asarray(self.g(q), dtype=float)
        if G.shape != (self.n, self.n):
            raise InputError("metric has wrong shape", str(G.shape))
        return G

    def inverse(self, q):
        G = self(q)
        spd_factor(G, "metric")
        return np.linalg.inv(G)


def _h(q):
    return H_OUTER * max(1.0, float(np.linalg.norm(q)))


def christoffel(metric, q, h=None):
    q = np.asarray(q, dtype=float)
    G = metric(q)
    spd_factor(G, "metric")
    dG = jacobian(metric, q, h or _h(q))          # dG[i, j, k] = d g_ij / dq^k
    # first kind: [bc, d] = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
    # first[d, b, c] = 1/2 (dG[d, c, b] + dG[d, b, c] - dG[b, c, d])
    first = 0.5 * (np.einsum("dcb->dbc", dG) + dG - np.einsum("bcd->dbc", dG))
    return np.linalg.solve(G, first.reshape(metric.n, -1)).reshape(metric.n, metric.n, metric.n)


def riemann_tensor(metric, q, h=None):
    q = np.asarray(q, dtype=float)
    h = h or _h(q)
    Gam = christoffel(metric, q)
    dGam = jacobian(lambda x: christoffel(metric, x), q, h)   # dGam[a, b, c, e] = d_e Gamma^a_bc
    # R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
    R = (np.einsum("adbc->abcd", dGam) - np.einsum("acbd->abcd", dGam)
         + np.einsum("ace,edb->abcd", Gam, Gam) - np.einsum("ade,ecb->abcd", Gam, Gam))
    return R


def lowered_riemann(metric, q):
    """R_abcd = g_ae R^e_bcd."""
    return np.einsum("ae,ebcd->abcd", metric(q), riemann_tensor(metric, q))


def covariant_eom_rhs(metric, q, qdot, Q=None):
    """qddot^a = g^ab Q_b - Gamma^a_bc qdot^b qdot^c."""
    q, qdot = np.asarray(q, float), np.asarray(qdot, float)
    Gam = christoffel(metric, q)
    acc = -np.einsum("abc,b,c->a", Gam, qdot, qdot)
    if Q is not None:
        acc = acc + spd_solve(metric(q), np.asarray(Q, float), "metric")
    return acc


def covariant_force_derivative(metric, Q_field, q):
    """nabla_b Q_a = dQ_a/dq^b - Gamma^c_ba Q_c, indexed [b, a]."""
    q = np.asarray(q, float)
    dQ = jacobian(lambda x: np.asarray(Q_field(x), float), q, _h(q))    # dQ[a, b] = d_b Q_a
    return dQ.T - np.einsum("cba,c->ba", christoffel(metric, q), np.asarray(Q_field(q), float))


def covariant_velocity(metric, q, qdot, x, xdot):
    """Dx/dt = xdot + Gamma^a_bc x^b qdot^c."""
    return np.asarray(xdot, float) + np.einsum("abc,b,c->a", christoffel(metric, q), x, qdot)


def linearized_perturbation_rhs(metric, q, qdot, x, Dx=None, Q_field=None, Phi=None):
    """D^2x/dt^2 = -R^a_bcd qdot^b x^c qdot^d + g^ab (nabla_c Q_b x^c + Phi_b).

    ``Q_field(q)`` is a position-dependent covector force; ``Phi`` the
    perturbing covector force.  ``Dx`` is unused by the equation and kept
    for symmetry with integrators that carry it.
    """
    q, qdot, x = (np.asarray(a, float) for a in (q, qdot, x))
    acc = -np.einsum("abcd,b,c,d->a", riemann_tensor(metric, q), qdot, x, qdot)
    f = np.zeros_like(q)
    if Q_field is not None:
        f = f + covariant_force_derivative(metric, Q_field, q).T @ x
    if Phi is not None:
        f = f + np.asarray(Phi, float)
    if np.any(f):
        acc = acc + spd_solve(metric(q), f, "metric")
    return acc
