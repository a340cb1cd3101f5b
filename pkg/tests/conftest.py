import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, n, scale=1.0):
    W = rng.normal(size=(n, n))
    return scale * (W @ W.T / n + np.eye(n))


def random_system(rng, group="SE3", trivialization="left", d=2, coupling=0.3, with_potential=False):
    """MechanicalSystem with smooth r-dependent blocks, SPD for |r| of order 1."""
    from hamel_mech import lie
    from hamel_mech.system import MechanicalSystem

    m = lie.algebra_dim(group)
    n = m + d
    M0 = random_spd(rng, n)
    C = rng.normal(size=(n, n, d)) * coupling
    C = 0.5 * (C + C.transpose(1, 0, 2))
    D = rng.normal(size=(n, n, d)) * coupling * 0.5
    D = 0.5 * (D + D.transpose(1, 0, 2))
    v = rng.normal(size=d)

    def M(r):
        return M0 + np.einsum("ijk,k->ij", C, np.sin(r)) + np.einsum("ijk,k->ij", D, r ** 2)

    V = (lambda r: float(v @ np.cos(r))) if with_potential else (lambda r: 0.0)
    return MechanicalSystem(group, trivialization, d,
                            L=lambda r: M(r)[:m, :m], K=lambda r: M(r)[:m, m:], S=lambda r: M(r)[m:, m:],
                            V=V, name="random")
