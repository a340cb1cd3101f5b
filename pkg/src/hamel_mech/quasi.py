"""Quasi-velocity maps u = A(q) qdot and their Hamel coefficients.

With B = A^-1 the coefficients are

    gamma^c_ab = (dA^c_r/dq^s - dA^c_s/dq^r) B^r_a B^s_b,

stored densely as ``gamma[c, a, b]``.  For group velocity maps they reduce
to the structure constants c^c_ab = (ad_{e_a} e_b)^c for a left
trivialization and to their negatives for a right one.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import lie
from .errors import InputError, SingularMapError, StructureError
from .numdiff import jacobian

INVERSE_TOL = 1e-10
VANISH_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class QuasiVelocityMap:
    """A(q) and optionally B(q) = A(q)^-1 on R^n.

    The first ``n_dependent`` coordinates are the dependent ones (alpha
    indices), the remaining ones independent (I indices).
    """

    A: Callable
    n: int
    n_dependent: int = 0
    B: Optional[Callable] = None

    def __post_init__(self):
        if not 0 <= self.n_dependent <= self.n:
            raise InputError("partition sizes must sum to n")

    @property
    def partition(self):
        m = self.n_dependent
        return tuple(range(m)), tuple(range(m, self.n))

    def matrices(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n,):
            raise InputError("coordinate dimension mismatch", f"expected {self.n}, got {q.shape}")
        A = np.asarray(self.A(q), dtype=float)
        if A.shape != (self.n, self.n):
            raise InputError("A(q) has wrong shape", str(A.shape))
        if self.B is not None:
            B = np.asarray(self.B(q), dtype=float)
        else:
            try:
                B = np.linalg.inv(A)
            except np.linalg.LinAlgError:
                raise SingularMapError("A(q) is singular") from None
        if not np.all(np.isfinite(B)) or np.abs(A @ B - np.eye(self.n)).max() > INVERSE_TOL * max(1.0, np.abs(A).max() * np.abs(B).max()):
            raise SingularMapError("A(q) B(q) != I", f"at q={q.tolist()}")
        return A, B


@dataclass(frozen=True, eq=False)
class HamelCoefficients:
    gamma: np.ndarray
    n_dependent: int = 0

    def antisymmetry_error(self):
        return float(np.abs(self.gamma + self.gamma.transpose(0, 2, 1)).max(initial=0.0))

    @property
    def curvature_block(self):
        """gamma^alpha_IJ."""
        m = self.n_dependent
        return self.gamma[:m, m:, m:]

    @property
    def mixed_block(self):
        """gamma^alpha_beta J."""
        m = self.n_dependent
        return self.gamma[:m, :m, m:]

    @property
    def fiber_block(self):
        """gamma^alpha_beta lambda."""
        m = self.n_dependent
        return self.gamma[:m, :m, :m]

    @property
    def independent_rows(self):
        """gamma^K_ab; identically zero for the block-triangular maps."""
        return self.gamma[self.n_dependent:]


def hamel_numeric(qmap, q, h=None):
    q = np.asarray(q, dtype=float)
    _, B = qmap.matrices(q)
    dA = jacobian(lambda x: np.asarray(qmap.A(x), float), q, h)  # dA[c, r, s] = dA^c_r / dq^s
    curl = dA - dA.transpose(0, 2, 1)
    gamma = np.einsum("crs,ra,sb->cab", curl, B, B)
    return HamelCoefficients(gamma, qmap.n_dependent)


def structure_constants(group, trivialization="left"):
    group = lie.as_group(group)
    n = lie.algebra_dim(group)
    c = np.zeros((n, n, n))
    E = np.eye(n)
    for a in range(n):
        adm = lie.ad(E[a], group)
        for b in range(n):
            c[:, a, b] = adm @ E[b]
    return HamelCoefficients(lie.as_trivialization(trivialization).sign * c)


def group_velocity_map(group, trivialization="left"):
    """Velocity map of exponential coordinates: A(q) = dexp_q, xi = A(q) qdot."""
    group = lie.as_group(group)
    triv = lie.as_trivialization(trivialization)
    return QuasiVelocityMap(
        A=lambda q: lie.dexp(q, group, triv),
        B=lambda q: lie.dexpinv(q, group, triv),
        n=lie.algebra_dim(group),
        n_dependent=lie.algebra_dim(group),
    )


def chaplygin_map(connection_fn, n_dependent, n_independent, A1=None):
    """Block map [[A1(q), A(q)], [0, I]] on q = (s, r).

    ``connection_fn(q)`` returns the m x d upper-right block; ``A1(q)`` the
    m x m upper-left block (identity when omitted).
    """
    m, d = n_dependent, n_independent

    def A(q):
        top_left = np.eye(m) if A1 is None else np.asarray(A1(q), float)
        return np.block([[top_left, np.asarray(connection_fn(q), float).reshape(m, d)],
                         [np.zeros((d, m)), np.eye(d)]])

    return QuasiVelocityMap(A=A, n=m + d, n_dependent=m)


def block_hamel_holonomic(qmap, q, h=None, tol=1e-12):
    """Hamel coefficients of a map with block form [[A1, A2], [0, I]].

    Returns the full coefficient set; the alpha slices are exposed as
    ``curvature_block``, ``mixed_block`` and ``fiber_block``.
    """
    q = np.asarray(q, dtype=float)
    m = qmap.n_dependent
    A, _ = qmap.matrices(q)
    if np.abs(A[m:, :m]).max(initial=0.0) > tol or np.abs(A[m:, m:] - np.eye(qmap.n - m)).max(initial=0.0) > tol:
        raise StructureError("map is not of block form [[A1, A2], [0, I]]")
    coeffs = hamel_numeric(qmap, q, h)
    if np.abs(coeffs.independent_rows).max(initial=0.0) > VANISH_TOL:
        raise StructureError("lower block of A varies with q")
    return coeffs


def vanishes_identically(qmap, lower, upper, samples=10, tol=VANISH_TOL, seed=0):
    """Sample the chart box and report (all |gamma| < tol, max |gamma|)."""
    rng = np.random.default_rng(seed)
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    worst = 0.0
    for _ in range(samples):
        q = lower + (upper - lower) * rng.random(qmap.n)
        worst = max(worst, float(np.abs(hamel_numeric(qmap, q).gamma).max(initial=0.0)))
    return worst < tol, worst
