"""Concrete systems: rolling ball, reaction-wheel satellite, rigid body,
and a generic polynomial-block builder driven by config documents.

Default numbers are desk-scale test fixtures, not measured data.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import lie
from .connection import LocalConnection
from .errors import ConfigError, InertiaError, InputError
from .system import MechanicalSystem, spd_factor

DEFAULT_BODY_INERTIA = ((1.0, 0.0, 0.0), (0.0, 1.2, 0.0), (0.0, 0.0, 1.4))


def _spd(M, what):
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise InputError(f"{what} must be 3x3")
    spd_factor(M, what)
    return M


def _parallel_axis(x):
    """|x|^2 I - x x^T."""
    x = np.asarray(x, float)
    return float(x @ x) * np.eye(3) - np.outer(x, x)


# --------------------------------------------------------------------------
# rolling ball

@dataclass(frozen=True)
class BallParams:
    """Ball rolling without slipping or spinning about the vertical.

    ``inertia`` is the spatial-frame inertia about the center (kg m^2);
    None selects the homogeneous ball (2/5) m R^2 I.
    """

    mass: float = 1.0
    radius: float = 0.1
    inertia: tuple = None

    def __post_init__(self):
        if not self.mass > 0:
            raise InputError("ball mass must be positive")
        if not self.radius > 0:
            raise InputError("ball radius must be positive")
        if self.inertia is not None:
            _spd(self.inertia, "ball inertia")

    @property
    def theta(self):
        if self.inertia is None:
            return 0.4 * self.mass * self.radius**2 * np.eye(3)
        return np.asarray(self.inertia, dtype=float)


def ball_connection_matrix(radius):
    """A^a_I = (1/R) eps_{a 3 I} for a = 1, 2; zero for a = 3."""
    A = np.zeros((3, 2))
    A[1, 0] = 1.0 / radius
    A[0, 1] = -1.0 / radius
    return A


def rolling_ball(params=None):
    """(system, connection) on the right-trivialized SO3 bundle over the plane.

    Shape coordinates are the contact-point position (p1, p2); the fiber
    velocity is the spatial angular velocity.
    """
    params = params or BallParams()
    theta = params.theta
    m = params.mass
    system = MechanicalSystem(
        lie.Group.SO3, lie.Trivialization.RIGHT, 2,
        L=lambda r: theta, K=lambda r: np.zeros((3, 2)), S=lambda r: m * np.eye(2),
        name="rolling_ball",
        spec={"preset": "rolling_ball", "params": _ball_dict(params)},
    )
    conn = LocalConnection.constant(lie.Group.SO3, lie.Trivialization.RIGHT,
                                    ball_connection_matrix(params.radius), "rolling_ball")
    return system, conn


def rolling_ball_accel(params, rdot):
    """Closed-form shape acceleration of the rolling ball.

    (m I + A^T Theta A) rddot = (1/R) (Theta A rdot)_3 A rdot, where the
    last factor is read with fiber index a = I (rows 1, 2 of A).
    """
    theta = params.theta
    A = ball_connection_matrix(params.radius)
    rdot = np.asarray(rdot, float)
    w = A @ rdot
    force = (theta[2] @ w) / params.radius * w[:2]
    return np.linalg.solve(params.mass * np.eye(2) + A.T @ theta @ A, force)


def _ball_dict(p):
    d = {"mass": p.mass, "radius": p.radius}
    if p.inertia is not None:
        d["inertia"] = np.asarray(p.inertia, float).tolist()
    return d


# --------------------------------------------------------------------------
# satellite with three reaction wheels

@dataclass(frozen=True)
class SatelliteParams:
    """Main body plus three symmetric rotors.

    Inertias are about each body's own center of mass in body axes (kg m^2);
    offsets are centers of mass relative to the reference frame (m).  Rotor
    i is symmetric and spins about ``rotor_axes[i]`` (default e_i) through
    its own center; its inertia is ``transverse`` I + (axial - transverse) a a^T.
    """

    body_mass: float = 10.0
    body_inertia: tuple = DEFAULT_BODY_INERTIA
    body_com: tuple = (0.0, 0.0, 0.0)
    rotor_masses: tuple = (1.0, 1.0, 1.0)
    rotor_axial: tuple = (0.02, 0.02, 0.02)
    rotor_transverse: tuple = (0.01, 0.01, 0.01)
    rotor_coms: tuple = ((0.1, 0.0, 0.0), (0.0, 0.1, 0.0), (0.0, 0.0, 0.1))
    rotor_axes: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    group: str = "SE3"

    def __post_init__(self):
        if not self.body_mass > 0:
            raise InputError("body mass must be positive")
        _spd(self.body_inertia, "body inertia")
        if np.shape(self.body_com) != (3,):
            raise InputError("body_com must have 3 entries")
        for name in ("rotor_masses", "rotor_axial", "rotor_transverse"):
            v = np.asarray(getattr(self, name), float)
            if v.shape != (3,) or not np.all(v > 0):
                raise InputError(f"{name} must be 3 positive numbers")
        for name in ("rotor_coms", "rotor_axes"):
            if np.shape(getattr(self, name)) != (3, 3):
                raise InputError(f"{name} must be 3 vectors of length 3")
        if np.any(np.linalg.norm(np.asarray(self.rotor_axes, float), axis=1) < 1e-12):
            raise InputError("rotor axes must be non-zero")
        g = lie.as_group(self.group)
        if g is lie.Group.SO3:
            raise InputError("satellite group must be SE3 or SO3xR3")
        object.__setattr__(self, "group", g.value)

    def with_group(self, group):
        d = asdict(self)
        d["group"] = lie.as_group(group).value
        return SatelliteParams(**d)

    @property
    def axes(self):
        a = np.asarray(self.rotor_axes, float)
        return a / np.linalg.norm(a, axis=1, keepdims=True)

    @property
    def total_mass(self):
        return self.body_mass + float(np.sum(self.rotor_masses))

    @property
    def com(self):
        """Total center of mass d in the reference frame."""
        s = self.body_mass * np.asarray(self.body_com, float)
        s = s + np.einsum("i,ij->j", np.asarray(self.rotor_masses, float), np.asarray(self.rotor_coms, float))
        return s / self.total_mass

    def rotor_inertia(self, i):
        a = self.axes[i]
        return self.rotor_transverse[i] * np.eye(3) + (self.rotor_axial[i] - self.rotor_transverse[i]) * np.outer(a, a)

    def about(self, point):
        """Inertias of body and rotors about ``point`` (parallel-axis shifted)."""
        point = np.asarray(point, float)
        Tb = np.asarray(self.body_inertia, float) + self.body_mass * _parallel_axis(np.asarray(self.body_com, float) - point)
        Tr = [self.rotor_inertia(i) + self.rotor_masses[i] * _parallel_axis(np.asarray(self.rotor_coms[i], float) - point)
              for i in range(3)]
        return Tb, Tr


def satellite_blocks(params):
    """Constant (L, K, S) of the satellite in the chosen formulation."""
    g = lie.as_group(params.group)
    axes = params.axes
    mbar = params.total_mass
    if g is lie.Group.SO3xR3:
        Tb, Tr = params.about(params.com)
        L = np.zeros((6, 6))
        L[:3, :3] = Tb + sum(Tr)
        L[3:, 3:] = mbar * np.eye(3)
    else:
        Tb, Tr = params.about(np.zeros(3))
        D = lie.skew(params.com)
        L = np.block([[Tb + sum(Tr), mbar * D], [-mbar * D, mbar * np.eye(3)]])
    # spin moves no center of mass, so only the rotor's own inertia couples
    own = [params.rotor_inertia(i) for i in range(3)]
    K = np.zeros((6, 3))
    for i in range(3):
        K[:3, i] = own[i] @ axes[i]
    S = np.diag([axes[i] @ own[i] @ axes[i] for i in range(3)])
    return L, K, S


def _constant_system(group, L, K, S, name, spec):
    for M in (L, S, np.block([[L, K], [K.T, S]])):
        spd_factor(M, f"{name} mass matrix")
    L.setflags(write=False)
    K.setflags(write=False)
    S.setflags(write=False)
    return MechanicalSystem(group, lie.Trivialization.LEFT, S.shape[0],
                            L=lambda r: L, K=lambda r: K, S=lambda r: S, name=name, spec=spec)


def satellite(params=None):
    params = params or SatelliteParams()
    L, K, S = satellite_blocks(params)
    name = "satellite_" + params.group.lower()
    return _constant_system(lie.as_group(params.group), L, K, S, name,
                            {"preset": "satellite", "params": _satellite_dict(params)})


def satellite_so3r3(params=None):
    return satellite((params or SatelliteParams()).with_group("SO3xR3"))


def satellite_se3(params=None):
    return satellite((params or SatelliteParams()).with_group("SE3"))


def se3_locked_inverse(theta_bar, mass, d):
    """Closed-form inverse of [[Theta, m d~], [-m d~, m I]]."""
    D = lie.skew(d)
    U = np.linalg.inv(np.asarray(theta_bar, float) + mass * D @ D)
    return np.block([[U, -U @ D], [D @ U, np.eye(3) / mass - D @ U @ D]])


def _satellite_dict(p):
    d = asdict(p)
    return {k: (np.asarray(v, float).tolist() if isinstance(v, tuple) else v) for k, v in d.items()}


# --------------------------------------------------------------------------
# rigid body

def rigid_body(inertia=DEFAULT_BODY_INERTIA, group="SO3", mass=None, trivialization="left"):
    """Free rigid body with no shape; SE3/SO3xR3 need ``mass``."""
    g = lie.as_group(group)
    J = _spd(inertia, "rigid body inertia")
    if g is lie.Group.SO3:
        L = J.copy()
    else:
        if mass is None or not mass > 0:
            raise InputError("rigid body mass must be positive")
        L = np.zeros((6, 6))
        L[:3, :3] = J
        L[3:, 3:] = mass * np.eye(3)
    L.setflags(write=False)
    spec = {"preset": "rigid_body", "params": {"inertia": J.tolist(), "group": g.value,
                                               "trivialization": lie.as_trivialization(trivialization).value}}
    if mass is not None:
        spec["params"]["mass"] = float(mass)
    return MechanicalSystem(g, trivialization, 0, L=lambda r: L, name="rigid_body", spec=spec)


# --------------------------------------------------------------------------
# generic polynomial blocks

@dataclass(frozen=True, eq=False)
class PolynomialMatrix:
    """constant + sum_k coeff_k prod_i r_i^power_k[i]."""

    constant: np.ndarray
    terms: tuple = field(default=())

    def __call__(self, r):
        out = np.array(self.constant, dtype=float)
        for power, coeff in self.terms:
            out = out + coeff * float(np.prod(np.asarray(r, float) ** power))
        return out

    def to_dict(self):
        d = {"constant": np.asarray(self.constant).tolist()}
        if self.terms:
            d["terms"] = [{"power": p.tolist(), "coeff": c.tolist()} for p, c in self.terms]
        return d


def _num_array(value, path, shape=None):
    try:
        a = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected numeric array") from None
    if shape is not None and a.shape != shape:
        raise ConfigError(f"{path}: expected shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConfigError(f"{path}: non-finite entries")
    return a


def _poly(doc, path, shape, n_shape):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a table")
    if "constant" not in doc:
        raise ConfigError(f"{path}.constant: missing required field")
    const = _num_array(doc["constant"], f"{path}.constant", shape)
    terms = []
    for k, t in enumerate(doc.get("terms", [])):
        for key in ("power", "coeff"):
            if key not in t:
                raise ConfigError(f"{path}.terms[{k}].{key}: missing required field")
        p = _num_array(t["power"], f"{path}.terms[{k}].power", (n_shape,))
        if np.any(p < 0) or np.any(p != np.round(p)):
            raise ConfigError(f"{path}.terms[{k}].power: exponents must be non-negative integers")
        terms.append((p.astype(int), _num_array(t["coeff"], f"{path}.terms[{k}].coeff", shape)))
    return PolynomialMatrix(const, tuple(terms))


def generic_system(doc, path="model"):
    """System and optional connection from polynomial block tables."""
    for key in ("group", "n_shape", "L"):
        if key not in doc:
            raise ConfigError(f"{path}.{key}: missing required field")
    try:
        g = lie.as_group(doc["group"])
        triv = lie.as_trivialization(doc.get("trivialization", "left"))
    except InputError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    d = doc["n_shape"]
    if not isinstance(d, int) or d < 0:
        raise ConfigError(f"{path}.n_shape: expected non-negative integer")
    m = lie.algebra_dim(g)
    L = _poly(doc["L"], f"{path}.L", (m, m), d)
    K = _poly(doc["K"], f"{path}.K", (m, d), d) if "K" in doc else None
    if d > 0 and "S" not in doc:
        raise ConfigError(f"{path}.S: missing required field")
    S = _poly(doc["S"], f"{path}.S", (d, d), d) if d > 0 else None
    V = _poly(doc["V"], f"{path}.V", (), d) if "V" in doc else None
    spec = {"kind": "generic", "group": g.value, "trivialization": triv.value, "n_shape": d, "L": L.to_dict()}
    for key, val in (("K", K), ("S", S), ("V", V)):
        if val is not None:
            spec[key] = val.to_dict()
    system = MechanicalSystem(g, triv, d, L=L, K=K, S=S,
                              V=(lambda r: float(V(r))) if V is not None else (lambda r: 0.0),
                              name=doc.get("name", "generic"), spec=spec)
    conn = None
    if "connection" in doc:
        A = _poly(doc["connection"], f"{path}.connection", (m, d), d)
        conn = LocalConnection(g, triv, d, A, "generic")
        spec["connection"] = A.to_dict()
    return system, conn


# --------------------------------------------------------------------------
# config entry points

def _params(doc, path, allowed, required=()):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a table")
    for key in required:
        if key not in doc:
            raise ConfigError(f"{path}.{key}: missing required field")
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown field")
    return doc


def _as_tuple(v):
    if isinstance(v, (list, tuple)):
        return tuple(_as_tuple(x) for x in v)
    return v


PRESETS = ("rolling_ball", "satellite", "rigid_body")


def load_model(doc):
    """(system, connection or None) from the ``model`` table of a config.

    ``doc`` is either ``{"preset": name, "params": {...}}`` or a generic
    block description with ``kind = "generic"``.
    """
    if not isinstance(doc, dict):
        raise ConfigError("model: expected a table")
    try:
        if doc.get("kind") == "generic" or "preset" not in doc:
            if "kind" not in doc and "preset" not in doc:
                raise ConfigError("model.preset: missing required field")
            return generic_system(doc)
        preset = doc["preset"]
        params = doc.get("params", {})
        if preset == "rolling_ball":
            p = _params(params, "model.params", ("mass", "radius", "inertia"), ("mass", "radius"))
            return rolling_ball(BallParams(float(p["mass"]), float(p["radius"]),
                                           _as_tuple(p["inertia"]) if "inertia" in p else None))
        if preset == "satellite":
            fields = SatelliteParams.__dataclass_fields__
            p = _params(params, "model.params", tuple(fields), ("body_mass",))
            kwargs = {k: _as_tuple(v) if isinstance(v, list) else v for k, v in p.items()}
            return satellite(SatelliteParams(**kwargs)), None
        if preset == "rigid_body":
            p = _params(params, "model.params", ("inertia", "group", "mass", "trivialization"))
            return rigid_body(p.get("inertia", DEFAULT_BODY_INERTIA), p.get("group", "SO3"),
                              p.get("mass"), p.get("trivialization", "left")), None
        raise ConfigError(f"model.preset: unknown preset {preset!r}")
    except InertiaError as exc:
        # a non-SPD block straight from the document is a schema problem
        raise ConfigError(f"model.params: {exc}") from None
    except ConfigError:
        raise
    except InputError as exc:
        raise ConfigError(f"model.params: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model.params: {exc}") from None


def dump_model(system, connection=None):
    """Config table that rebuilds ``system`` (and ``connection`` for generic models)."""
    if not system.spec:
        raise InputError("system has no serializable description")
    return _plain(system.spec)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
