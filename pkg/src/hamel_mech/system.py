"""Mechanical systems on trivial principal bundles G x R^d and their states."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import lie
from .errors import InertiaError, InputError


def spd_factor(M, what="mass matrix"):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return None
    scale = max(1.0, float(np.abs(M).max()))
    if not np.all(np.isfinite(M)) or np.abs(M - M.T).max() > 1e-9 * scale:
        raise InertiaError(f"{what} is not symmetric")
    try:
        return cho_factor(M)
    except LinAlgError:
        raise InertiaError(f"{what} is not positive definite") from None


def spd_solve(M, b, what="mass matrix"):
    fac = spd_factor(M, what)
    b = np.asarray(b, dtype=float)
    if fac is None:
        return b.copy()
    return cho_solve(fac, b)


def _zero_potential(r):
    return 0.0


@dataclass(frozen=True, eq=False)
class MechanicalSystem:
    """Reduced Lagrangian l = 1/2 [xi; rdot]^T M(r) [xi; rdot] - V(r).

    ``L``, ``K``, ``S`` map shape coordinates r to the locked, coupling and
    shape inertia blocks.  ``Q(t, state)`` returns generalized forces dual to
    (xi, rdot); None means unforced.  ``spec`` holds the constructor inputs
    for presets so models can be written back to config.
    """

    group: lie.Group
    trivialization: lie.Trivialization
    n_shape: int
    L: Callable
    K: Optional[Callable] = None
    S: Optional[Callable] = None
    V: Callable = _zero_potential
    Q: Optional[Callable] = None
    name: str = ""
    spec: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "group", lie.as_group(self.group))
        object.__setattr__(self, "trivialization", lie.as_trivialization(self.trivialization))
        if int(self.n_shape) < 0:
            raise InputError("n_shape must be non-negative")
        object.__setattr__(self, "n_shape", int(self.n_shape))
        if self.n_shape > 0 and self.S is None:
            raise InputError("shape inertia S is required when n_shape > 0")

    @property
    def n_fiber(self):
        return lie.algebra_dim(self.group)

    @property
    def sign(self):
        return self.trivialization.sign

    def _r(self, r):
        r = np.asarray(r, dtype=float).reshape(-1)
        if r.size != self.n_shape:
            raise InputError("shape dimension mismatch", f"expected {self.n_shape}, got {r.size}")
        return r

    def blocks(self, r):
        r = self._r(r)
        m, d = self.n_fiber, self.n_shape
        L = np.asarray(self.L(r), dtype=float)
        K = np.zeros((m, d)) if self.K is None else np.asarray(self.K(r), dtype=float).reshape(m, d)
        S = np.zeros((0, 0)) if d == 0 else np.asarray(self.S(r), dtype=float).reshape(d, d)
        if L.shape != (m, m):
            raise InputError("locked inertia has wrong shape", f"expected {(m, m)}, got {L.shape}")
        return L, K, S

    def mass_matrix(self, r):
        L, K, S = self.blocks(r)
        return np.block([[L, K], [K.T, S]])

    def potential(self, r):
        return float(self.V(self._r(r)))


@dataclass(frozen=True, eq=False)
class BundleState:
    """Configuration g, shape r, body (or spatial) velocity xi, shape rate rdot, time t."""

    g: lie.GroupElement
    r: np.ndarray
    xi: np.ndarray
    rdot: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("r", "xi", "rdot"):
            a = np.array(getattr(self, name), dtype=float).reshape(-1)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.r.shape != self.rdot.shape:
            raise InputError("r and rdot must have the same length")
        if self.xi.size != lie.algebra_dim(self.g.group):
            raise InputError("xi dimension does not match group", self.g.group.value)

    def check(self, system):
        if self.g.group is not system.group:
            raise InputError("state group does not match system", f"{self.g.group.value} vs {system.group.value}")
        if self.r.size != system.n_shape:
            raise InputError("state shape dimension does not match system")
        return self


def kinetic_energy(system, r, xi, rdot):
    z = np.concatenate([xi, rdot])
    return 0.5 * float(z @ system.mass_matrix(r) @ z)


def energy(system, r, xi, rdot):
    return kinetic_energy(system, r, xi, rdot) + system.potential(r)


def momentum(system, r, xi, rdot):
    """Body (left) or spatial (right) momentum Pi = L xi + K rdot."""
    L, K, _ = system.blocks(r)
    return L @ np.asarray(xi, float) + K @ np.asarray(rdot, float)


def conserved_momentum(system, g, r, xi, rdot):
    """Momentum transported to a frame where it is constant for unforced motion.

    Left: Ad_g^-T Pi.  Right: Ad_g^T Pi.
    """
    Pi = momentum(system, r, xi, rdot)
    Ad = lie.adjoint(g)
    if system.trivialization is lie.Trivialization.LEFT:
        return np.linalg.solve(Ad.T, Pi)
    return Ad.T @ Pi
