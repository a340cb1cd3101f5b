"""Local connections in Chaplygin form, curvature, locked velocities.

A connection maps shape rates to algebra elements; constraints or momentum
conditions read xi + A(r) rdot = 0.  Curvature follows the Hamel convention

    B^a_IJ = dA^a_I/dr^J - dA^a_J/dr^I + s c^a_bc A^b_I A^c_J,

with s = +1 for left and -1 for right trivializations, so that B equals the
Hamel coefficients gamma^a_IJ of the block map [[dexp_s, A(r)], [0, I]].
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import cho_solve

from . import lie
from .errors import InputError, UnsupportedGroupError
from .numdiff import jacobian
from .quasi import QuasiVelocityMap, structure_constants
from .system import spd_factor, spd_solve

FLAT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LocalConnection:
    group: lie.Group
    trivialization: lie.Trivialization
    n_shape: int
    A: Callable
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "group", lie.as_group(self.group))
        object.__setattr__(self, "trivialization", lie.as_trivialization(self.trivialization))

    @classmethod
    def constant(cls, group, trivialization, matrix, name=""):
        M = np.array(matrix, dtype=float)
        M.setflags(write=False)
        return cls(group, trivialization, M.shape[1], lambda r: M, name)

    @classmethod
    def zero(cls, group, trivialization, n_shape):
        return cls.constant(group, trivialization, np.zeros((lie.algebra_dim(group), n_shape)), "zero")

    @property
    def n_fiber(self):
        return lie.algebra_dim(self.group)

    def __call__(self, r):
        r = np.asarray(r, dtype=float).reshape(-1)
        if r.size != self.n_shape:
            raise InputError("shape dimension mismatch", f"expected {self.n_shape}, got {r.size}")
        A = np.asarray(self.A(r), dtype=float)
        if A.shape != (self.n_fiber, self.n_shape):
            raise InputError("connection has wrong shape", f"expected {(self.n_fiber, self.n_shape)}, got {A.shape}")
        return A

    def derivative(self, r):
        """dA[a, I, J] = dA^a_I / dr^J."""
        return jacobian(self.__call__, np.asarray(r, float))

    def curvature(self, r):
        return curvature(self, r)


class CurvatureField:
    """r -> B^a_IJ for a fixed connection."""

    def __init__(self, connection):
        self.connection = connection

    def __call__(self, r):
        return curvature(self.connection, r)


def curvature(conn, r):
    r = np.asarray(r, dtype=float)
    A = conn(r)
    dA = conn.derivative(r)
    c = structure_constants(conn.group, conn.trivialization).gamma  # already signed
    return dA - dA.transpose(0, 2, 1) + np.einsum("abc,bi,cj->aij", c, A, A)


def bundle_map(conn):
    """Quasi-velocity map of q = (s, r): u^a = (dexp_s sdot)^a + A^a_I(r) rdot^I, u^I = rdot^I.

    Its Hamel coefficients gamma^a_IJ equal the curvature of ``conn``.
    """
    m, d = conn.n_fiber, conn.n_shape

    def A(q):
        top = np.hstack([lie.dexp(q[:m], conn.group, conn.trivialization), conn(q[m:])])
        return np.vstack([top, np.hstack([np.zeros((d, m)), np.eye(d)])])

    return QuasiVelocityMap(A=A, n=m + d, n_dependent=m)


def mechanical_connection(system, r):
    L, K, _ = system.blocks(r)
    fac = spd_factor(L, "locked inertia L")
    if K.size == 0:
        return np.zeros_like(K)
    return cho_solve(fac, K)


def mechanical(system):
    """The mechanical connection of ``system`` as a LocalConnection."""
    return LocalConnection(system.group, system.trivialization, system.n_shape,
                           lambda r: mechanical_connection(system, r),
                           name=f"mechanical({system.name})")


def locked_velocity(system, r, xi, rdot):
    return np.asarray(xi, float) + mechanical_connection(system, r) @ np.asarray(rdot, float)


def body_velocity(system, r, omega, rdot):
    """Inverse of ``locked_velocity``: xi = Omega - A(r) rdot."""
    return np.asarray(omega, float) - mechanical_connection(system, r) @ np.asarray(rdot, float)


class FlatnessReport(NamedTuple):
    flat: bool
    max_abs: float
    worst_r: np.ndarray


def is_flat(conn, lower, upper, samples=1000, tol=FLAT_TOL, seed=0):
    if samples < 1:
        raise InputError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    worst, worst_r = -1.0, None
    for _ in range(samples):
        r = lower + (upper - lower) * rng.random(conn.n_shape)
        b = float(np.abs(curvature(conn, r)).max(initial=0.0))
        if b > worst:
            worst, worst_r = b, r
    return FlatnessReport(worst < tol, worst, worst_r)


class Centroidal(NamedTuple):
    momentum: np.ndarray
    velocity: np.ndarray
    inertia: np.ndarray


def centroidal_transform(system, r, xi, rdot, g_bG):
    """Momentum, locked velocity and locked inertia expressed in frame G.

    ``g_bG`` is the pose of frame G relative to the body reference frame.
    """
    if system.group is not lie.Group.SE3:
        raise UnsupportedGroupError("centroidal transform needs SE3", system.group.value)
    L, _, _ = system.blocks(r)
    V = locked_velocity(system, r, xi, rdot)
    Ad = lie.adjoint(g_bG)
    return Centroidal(Ad.T @ (L @ V), np.linalg.solve(Ad, V), Ad.T @ L @ Ad)


def locked_mass_matrix(system, r):
    """[[L, 0], [0, S - A^T L A]] with A the mechanical connection."""
    L, K, S = system.blocks(r)
    A = spd_solve(L, K, "locked inertia L") if K.size else np.zeros_like(K)
    m, d = L.shape[0], S.shape[0]
    out = np.zeros((m + d, m + d))
    out[:m, :m] = L
    out[m:, m:] = S - A.T @ L @ A
    return out
