"""Group and algebra operations for SO(3), SE(3) and the direct product SO(3)xR3.

Algebra vectors are plain numpy arrays of length 3 (SO3) or 6 (SE3, SO3xR3);
6-vectors are ordered (omega, v).  The group tag is passed alongside.

Conventions
-----------
* SE3 composes as (R1, p1)(R2, p2) = (R1 R2, p1 + R1 p2); SO3xR3 as
  (R1 R2, p1 + p2).
* ``dexp(eta, group, "right")`` is the right-trivialized differential:
  d/dt exp(eta) . exp(eta)^-1 = hat(dexp_eta eta_dot).  The left version
  satisfies exp(eta)^-1 d/dt exp(eta) = hat(dexp^left_eta eta_dot) and equals
  the right version evaluated at -eta.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import BranchError, InputError

SMALL_ANGLE = 1e-4
BRANCH_TOL = 1e-8
RENORM_EVERY = 1000


class Group(str, Enum):
    SO3 = "SO3"
    SE3 = "SE3"
    SO3xR3 = "SO3xR3"


class Trivialization(str, Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def sign(self):
        """+1 for left, -1 for right; multiplies structure constants."""
        return 1.0 if self is Trivialization.LEFT else -1.0


def as_group(tag):
    if isinstance(tag, Group):
        return tag
    for g in Group:
        if str(tag).lower() == g.value.lower():
            return g
    raise InputError("unknown group tag", repr(tag))


def as_trivialization(tag):
    if isinstance(tag, Trivialization):
        return tag
    try:
        return Trivialization(str(tag).lower())
    except ValueError:
        raise InputError("unknown trivialization", repr(tag)) from None


def algebra_dim(group):
    return 3 if as_group(group) is Group.SO3 else 6


def _vec(v, group):
    v = np.asarray(v, dtype=float)
    if v.shape != (algebra_dim(group),):
        raise InputError("dimension mismatch",
                         f"{as_group(group).value} needs length {algebra_dim(group)}, got shape {v.shape}")
    return v


# --------------------------------------------------------------------------
# so(3) helpers

def skew(x):
    x1, x2, x3 = x
    return np.array([[0.0, -x3, x2], [x3, 0.0, -x1], [-x2, x1, 0.0]])


def unskew(m):
    return np.array([m[2, 1], m[0, 2], m[1, 0]], dtype=float)


def _series(t2, coeffs):
    out = 0.0
    for c in reversed(coeffs):
        out = out * t2 + c
    return out


def _sinc(t):
    if t < SMALL_ANGLE:
        return _series(t * t, [1.0, -1 / 6, 1 / 120, -1 / 5040, 1 / 362880])
    return np.sin(t) / t


def _a(t):
    # (1 - cos t) / t^2
    if t < SMALL_ANGLE:
        return _series(t * t, [1 / 2, -1 / 24, 1 / 720, -1 / 40320, 1 / 3628800])
    return (1.0 - np.cos(t)) / (t * t)


def _b(t):
    # (t - sin t) / t^3
    if t < SMALL_ANGLE:
        return _series(t * t, [1 / 6, -1 / 120, 1 / 5040, -1 / 362880, 1 / 39916800])
    return (t - np.sin(t)) / t**3


def _c(t):
    # (1 - (t/2) cot(t/2)) / t^2
    if t < SMALL_ANGLE:
        return _series(t * t, [1 / 12, 1 / 720, 1 / 30240, 1 / 1209600, 1 / 47900160])
    return (1.0 - t * np.sin(t) / (2.0 * (1.0 - np.cos(t)))) / (t * t)


def _da(t):
    # a'(t) / t
    if t < SMALL_ANGLE:
        return _series(t * t, [-1 / 12, 1 / 180, -1 / 6720, 1 / 453600, -1 / 47900160])
    return (_sinc(t) - 2.0 * _a(t)) / (t * t)


def _db(t):
    # b'(t) / t
    if t < SMALL_ANGLE:
        return _series(t * t, [-1 / 60, 1 / 1260, -1 / 60480, 1 / 4989600, -1 / 622702080])
    return (_a(t) - 3.0 * _b(t)) / (t * t)


def _inv_sinc(t):
    if t < SMALL_ANGLE:
        return _series(t * t, [1.0, 1 / 6, 7 / 360, 31 / 15120, 127 / 604800])
    return t / np.sin(t)


def _exp_so3(x):
    t = float(np.linalg.norm(x))
    X = skew(x)
    return np.eye(3) + _sinc(t) * X + _a(t) * (X @ X)


def _log_so3(R):
    c = float(np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0))
    w = 0.5 * unskew(R - R.T)
    s = float(np.linalg.norm(w))
    t = float(np.arctan2(s, c))
    if np.pi - t < BRANCH_TOL:
        raise BranchError("rotation angle at pi, log branch ambiguous")
    if t < 2.0:
        return _inv_sinc(t) * w
    # Near pi the antisymmetric part is tiny; read the axis off the symmetric part.
    B = 0.5 * (R + R.T) - c * np.eye(3)
    k = int(np.argmax(np.diag(B)))
    axis = B[:, k] / np.sqrt(B[k, k] * (1.0 - c))
    if axis @ w < 0:
        axis = -axis
    return t * axis


def _dexp_so3(x):
    t = float(np.linalg.norm(x))
    X = skew(x)
    return np.eye(3) + _a(t) * X + _b(t) * (X @ X)


def _dexpinv_so3(x):
    t = float(np.linalg.norm(x))
    X = skew(x)
    return np.eye(3) - 0.5 * X + _c(t) * (X @ X)


def _dexp_so3_derivative(x, y):
    """Directional derivative of the SO3 right dexp at x along y."""
    t = float(np.linalg.norm(x))
    X, Y = skew(x), skew(y)
    return (_a(t) * Y + _b(t) * (X @ Y + Y @ X)
            + float(x @ y) * (_da(t) * X + _db(t) * (X @ X)))


def project_rotation(R):
    """Nearest rotation matrix in Frobenius norm (polar projection)."""
    U, _, Vt = np.linalg.svd(R)
    D = np.diag([1.0, 1.0, np.linalg.det(U @ Vt)])
    return U @ D @ Vt


# --------------------------------------------------------------------------
# group elements

def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Immutable element of SO3, SE3 or SO3xR3.

    ``translation`` is empty for SO3.  ``compositions`` counts products since
    the last re-orthonormalization; it is bookkeeping, not part of the value.
    """

    group: Group
    rotation: np.ndarray
    translation: np.ndarray = None
    compositions: int = field(default=0, repr=False)

    def __post_init__(self):
        group = as_group(self.group)
        R = np.asarray(self.rotation, dtype=float)
        if R.shape != (3, 3):
            raise InputError("rotation must be 3x3", f"got shape {R.shape}")
        if group is Group.SO3:
            p = np.zeros(0)
        else:
            p = np.zeros(3) if self.translation is None else np.asarray(self.translation, dtype=float)
            if p.shape != (3,):
                raise InputError("translation must have length 3", f"got shape {p.shape}")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(p))):
            raise InputError("non-finite group element")
        if np.linalg.norm(R.T @ R - np.eye(3)) > 1e-6 or np.linalg.det(R) < 0:
            raise InputError("rotation is not in SO(3)")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "rotation", _frozen(R))
        object.__setattr__(self, "translation", _frozen(p))

    @classmethod
    def identity(cls, group):
        return cls(as_group(group), np.eye(3))

    def __matmul__(self, other):
        return self.compose(other)

    def compose(self, other):
        if other.group is not self.group:
            raise InputError("cannot compose different groups",
                             f"{self.group.value} and {other.group.value}")
        R = self.rotation @ other.rotation
        if self.group is Group.SE3:
            p = self.translation + self.rotation @ other.translation
        elif self.group is Group.SO3xR3:
            p = self.translation + other.translation
        else:
            p = None
        n = max(self.compositions, other.compositions) + 1
        if n >= RENORM_EVERY:
            R, n = project_rotation(R), 0
        return GroupElement(self.group, R, p, n)

    def inverse(self):
        Rt = self.rotation.T
        if self.group is Group.SE3:
            p = -Rt @ self.translation
        elif self.group is Group.SO3xR3:
            p = -self.translation
        else:
            p = None
        return GroupElement(self.group, Rt, p, self.compositions)

    def renormalized(self):
        return GroupElement(self.group, project_rotation(self.rotation), self.translation)

    def matrix(self):
        """Faithful matrix representation: 3x3 (SO3), 4x4 homogeneous (SE3),
        7x7 block diag(R, homogeneous translation) (SO3xR3)."""
        if self.group is Group.SO3:
            return np.array(self.rotation)
        T = np.eye(4)
        if self.group is Group.SE3:
            T[:3, :3] = self.rotation
            T[:3, 3] = self.translation
            return T
        T[:3, 3] = self.translation
        M = np.zeros((7, 7))
        M[:3, :3] = self.rotation
        M[3:, 3:] = T
        return M

    def flat(self):
        """Twelve floats: rotation row-major, then translation (zeros for SO3)."""
        p = self.translation if self.group is not Group.SO3 else np.zeros(3)
        return np.concatenate([self.rotation.ravel(), p])

    def orthonormality_error(self):
        return float(np.linalg.norm(self.rotation.T @ self.rotation - np.eye(3)))


def identity(group):
    return GroupElement.identity(group)


def distance(g1, g2):
    """Frobenius distance between matrix representations."""
    return float(np.linalg.norm(g1.matrix() - g2.matrix()))


# --------------------------------------------------------------------------
# algebra maps

def hat(v, group):
    """3x3 skew matrix (SO3) or 4x4 homogeneous algebra matrix (6-dim groups)."""
    v = _vec(v, group)
    if v.size == 3:
        return skew(v)
    M = np.zeros((4, 4))
    M[:3, :3] = skew(v[:3])
    M[:3, 3] = v[3:]
    return M


def vee(M, group):
    M = np.asarray(M, dtype=float)
    if algebra_dim(group) == 3:
        if M.shape != (3, 3):
            raise InputError("dimension mismatch", f"expected 3x3, got {M.shape}")
        return unskew(M)
    if M.shape != (4, 4):
        raise InputError("dimension mismatch", f"expected 4x4, got {M.shape}")
    return np.concatenate([unskew(M[:3, :3]), M[:3, 3]])


def exp(v, group):
    group = as_group(group)
    v = _vec(v, group)
    if group is Group.SO3:
        return GroupElement(group, _exp_so3(v))
    w, u = v[:3], v[3:]
    if group is Group.SE3:
        return GroupElement(group, _exp_so3(w), _dexp_so3(w) @ u)
    return GroupElement(group, _exp_so3(w), u)


def log(g):
    w = _log_so3(g.rotation)
    if g.group is Group.SO3:
        return w
    if g.group is Group.SE3:
        return np.concatenate([w, _dexpinv_so3(w) @ g.translation])
    return np.concatenate([w, g.translation])


def ad(v, group):
    group = as_group(group)
    v = _vec(v, group)
    if group is Group.SO3:
        return skew(v)
    W = skew(v[:3])
    M = np.zeros((6, 6))
    M[:3, :3] = W
    if group is Group.SE3:
        M[3:, :3] = skew(v[3:])
        M[3:, 3:] = W
    return M


def bracket(x, y, group):
    return ad(x, group) @ _vec(y, group)


def adjoint(g):
    R = np.asarray(g.rotation)
    if g.group is Group.SO3:
        return R.copy()
    M = np.eye(6)
    M[:3, :3] = R
    if g.group is Group.SE3:
        M[3:, 3:] = R
        M[3:, :3] = skew(g.translation) @ R
    return M


def dexp(v, group, trivialization="right"):
    group = as_group(group)
    v = _vec(v, group)
    if as_trivialization(trivialization) is Trivialization.LEFT:
        v = -v
    if group is Group.SO3:
        return _dexp_so3(v)
    x, y = v[:3], v[3:]
    D = _dexp_so3(x)
    M = np.zeros((6, 6))
    M[:3, :3] = D
    if group is Group.SE3:
        M[3:, :3] = _dexp_so3_derivative(x, y)
        M[3:, 3:] = D
    else:
        M[3:, 3:] = np.eye(3)
    return M


def dexpinv(v, group, trivialization="right"):
    group = as_group(group)
    v = _vec(v, group)
    if as_trivialization(trivialization) is Trivialization.LEFT:
        v = -v
    if group is Group.SO3:
        return _dexpinv_so3(v)
    x, y = v[:3], v[3:]
    Di = _dexpinv_so3(x)
    M = np.zeros((6, 6))
    M[:3, :3] = Di
    if group is Group.SE3:
        M[3:, :3] = -Di @ _dexp_so3_derivative(x, y) @ Di
        M[3:, 3:] = Di
    else:
        M[3:, 3:] = np.eye(3)
    return M


def rotation_part(v):
    """Rotational components of an algebra vector (all of it for SO3)."""
    return np.asarray(v)[:3]
