import numpy as np
import pytest

from hamel_mech import riemann as rm
from hamel_mech.errors import InertiaError, InputError


def poly_metric(rng, n, scale=0.2):
    """g(q) = P P^T + I with P = W + sum_k C_k q_k, plus its exact derivative."""
    W = rng.normal(size=(n, n))
    C = rng.normal(size=(n, n, n)) * scale

    def P(q):
        return W + np.einsum("ijk,k->ij", C, q)

    def g(q):
        return P(q) @ P(q).T + np.eye(n)

    def dg(q):
        # dg[i, j, k] = d g_ij / d q^k
        p = P(q)
        return np.einsum("ilk,jl->ijk", C, p) + np.einsum("il,jlk->ijk", p, C)

    return rm.Metric(n, g), g, dg


def lagrange_accel(g, dg, q, qd, Q):
    """g qdd = Q - (dg . qd) qd + 1/2 d_q (qd^T g qd)."""
    D = dg(q)
    rhs = Q - np.einsum("ijk,k,j->i", D, qd, qd) + 0.5 * np.einsum("ijk,i,j->k", D, qd, qd)
    return np.linalg.solve(g(q), rhs)


def rk4(f, y, T, n):
    h = T / n
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + h / 2 * k1)
        k3 = f(y + h / 2 * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


sphere = rm.Metric(2, lambda q: np.diag([1.0, np.sin(q[0]) ** 2]))
polar = rm.Metric(2, lambda q: np.diag([1.0, q[0] ** 2]))


class TestChristoffel:
    def test_constant_metric(self, rng):
        A = rng.normal(size=(3, 3))
        met = rm.Metric(3, lambda q: A @ A.T + np.eye(3))
        assert np.abs(rm.christoffel(met, rng.normal(size=3))).max() < 1e-9

    def test_sphere(self):
        th = 0.7
        G = rm.christoffel(sphere, np.array([th, 0.3]))
        assert G[0, 1, 1] == pytest.approx(-np.sin(th) * np.cos(th), abs=1e-8)
        assert G[1, 0, 1] == pytest.approx(np.cos(th) / np.sin(th), abs=1e-8)
        assert G[1, 1, 0] == pytest.approx(np.cos(th) / np.sin(th), abs=1e-8)
        mask = np.ones_like(G, dtype=bool)
        mask[0, 1, 1] = mask[1, 0, 1] = mask[1, 1, 0] = False
        assert np.abs(G[mask]).max() < 1e-8

    def test_metric_compatibility(self, rng):
        met, g, dg = poly_metric(rng, 3)
        q = rng.normal(size=3) * 0.5
        G = g(q)
        Gam = rm.christoffel(met, q)
        # d_k g_ij = Gamma^l_ki g_lj + Gamma^l_kj g_il
        rhs = np.einsum("lki,lj->ijk", Gam, G) + np.einsum("lkj,il->ijk", Gam, G)
        assert np.abs(dg(q) - rhs).max() < 1e-7
        assert np.abs(Gam - Gam.transpose(0, 2, 1)).max() < 1e-12

    def test_bad_metric(self):
        with pytest.raises(InertiaError):
            rm.christoffel(rm.Metric(2, lambda q: np.diag([1.0, -1.0])), np.zeros(2))
        with pytest.raises(InputError):
            rm.christoffel(rm.Metric(2, lambda q: np.eye(2)), np.zeros(3))


class TestCurvature:
    def test_sphere(self):
        for th in (0.4, 1.1, 2.0):
            R = rm.lowered_riemann(sphere, np.array([th, 0.2]))
            assert R[0, 1, 0, 1] == pytest.approx(np.sin(th) ** 2, abs=1e-5)
            assert R[0, 1, 1, 0] == pytest.approx(-np.sin(th) ** 2, abs=1e-5)

    def test_polar_is_flat(self):
        for q in ([1.3, 0.4], [0.5, 2.0], [3.0, -1.0]):
            assert np.abs(rm.riemann_tensor(polar, np.array(q))).max() < 1e-5

    def test_symmetries_and_bianchi(self, rng):
        met, _, _ = poly_metric(rng, 3)
        R = rm.lowered_riemann(met, rng.normal(size=3) * 0.5)
        scale = np.abs(R).max()
        assert np.abs(R + R.transpose(1, 0, 2, 3)).max() < 1e-4 * scale
        assert np.abs(R + R.transpose(0, 1, 3, 2)).max() < 1e-4 * scale
        assert np.abs(R - R.transpose(2, 3, 0, 1)).max() < 1e-4 * scale
        cyc = R + np.einsum("abcd->acdb", R) + np.einsum("abcd->adbc", R)
        assert np.abs(cyc).max() < 1e-4 * scale


class TestEquationsOfMotion:
    def test_flat_metric_is_free_motion(self, rng):
        met = rm.Metric(3, lambda q: np.diag([1.0, 2.0, 3.0]))
        assert np.abs(rm.covariant_eom_rhs(met, rng.normal(size=3), rng.normal(size=3))).max() < 1e-9

    def test_matches_lagrangian(self, rng):
        for n in (2, 3, 4):
            met, g, dg = poly_metric(rng, n)
            for _ in range(5):
                q, qd, Q = rng.normal(size=n) * 0.5, rng.normal(size=n), rng.normal(size=n)
                got = rm.covariant_eom_rhs(met, q, qd, Q)
                assert np.abs(got - lagrange_accel(g, dg, q, qd, Q)).max() < 1e-6

    def test_geodesic_energy(self, rng):
        met, g, _ = poly_metric(rng, 3)
        q0, qd0 = rng.normal(size=3) * 0.3, rng.normal(size=3)
        f = lambda y: np.concatenate([y[3:], rm.covariant_eom_rhs(met, y[:3], y[3:])])
        y = rk4(f, np.concatenate([q0, qd0]), 1.0, 400)
        e0 = qd0 @ g(q0) @ qd0
        assert abs(y[3:] @ g(y[:3]) @ y[3:] - e0) < 1e-7 * e0


class TestLinearized:
    def test_flat_metric_gives_raised_force(self, rng):
        G = np.diag([2.0, 4.0])
        met = rm.Metric(2, lambda q: G)
        Phi = rng.normal(size=2)
        got = rm.linearized_perturbation_rhs(met, rng.normal(size=2), rng.normal(size=2), rng.normal(size=2),
                                             Phi=Phi)
        assert np.allclose(got, np.linalg.solve(G, Phi), atol=1e-8)

    def test_two_trajectory_second_order(self, rng):
        met, _, _ = poly_metric(rng, 3)
        Qf = lambda q: -np.array([np.sin(q[0]), q[1] ** 3, q[2]])
        Phi = np.array([0.3, -0.1, 0.2])
        q0, qd0 = rng.normal(size=3) * 0.3, rng.normal(size=3)
        x0, xd0 = rng.normal(size=3), rng.normal(size=3)

        def nonlin(eps):
            f = lambda y: np.concatenate([y[3:], rm.covariant_eom_rhs(met, y[:3], y[3:], Qf(y[:3]) + eps * Phi)])
            return rk4(f, np.concatenate([q0 + eps * x0, qd0 + eps * xd0]), 1.0, 200)[:3]

        def f_lin(y):
            q, qd, x, Dx = y[:3], y[3:6], y[6:9], y[9:]
            Gam = rm.christoffel(met, q)
            D2x = rm.linearized_perturbation_rhs(met, q, qd, x, Dx, Qf, Phi)
            return np.concatenate([qd, rm.covariant_eom_rhs(met, q, qd, Qf(q)),
                                   Dx - np.einsum("abc,b,c->a", Gam, x, qd),
                                   D2x - np.einsum("abc,b,c->a", Gam, Dx, qd)])

        Dx0 = rm.covariant_velocity(met, q0, qd0, x0, xd0)
        x1 = rk4(f_lin, np.concatenate([q0, qd0, x0, Dx0]), 1.0, 200)[6:9]
        base = nonlin(0.0)
        errs = [np.abs(nonlin(eps) - base - eps * x1).max() for eps in (1e-3, 5e-4)]
        # remainder is O(eps^2): halving eps quarters it
        assert 3.0 < errs[0] / errs[1] < 5.0
        assert errs[0] < 1e-3 * 1e-3 * 10
