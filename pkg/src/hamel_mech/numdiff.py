"""Central finite differences used by every module that differentiates a model."""

import numpy as np


def step_size(x, rel=1e-6):
    return rel * max(1.0, float(np.linalg.norm(x)))


def jacobian(f, x, h=None):
    """Central-difference derivative of an array-valued ``f`` at ``x``.

    The result has the shape of ``f(x)`` with one trailing axis appended,
    indexing the differentiation variable.
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        h = step_size(x)
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((np.asarray(f(x + e), float) - np.asarray(f(x - e), float)) / (2 * h))
    if not cols:
        return np.zeros(np.shape(f(x)) + (0,))
    return np.stack(cols, axis=-1)


def directional(f, x, v, h=None):
    """Central-difference derivative of ``f`` at ``x`` along ``v`` (not normalized)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    nv = float(np.linalg.norm(v))
    f0 = np.asarray(f(x), float)
    if nv == 0.0:
        return np.zeros_like(f0)
    if h is None:
        h = step_size(x)
    u = v / nv
    return nv * (np.asarray(f(x + h * u), float) - np.asarray(f(x - h * u), float)) / (2 * h)
