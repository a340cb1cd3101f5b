import numpy as np
import pytest

from conftest import random_system
from hamel_mech import lie, models, quasi
from hamel_mech.connection import (LocalConnection, bundle_map, centroidal_transform, curvature, is_flat,
                                   locked_mass_matrix, locked_velocity, mechanical, mechanical_connection)
from hamel_mech.errors import InertiaError, UnsupportedGroupError
from hamel_mech.reconstruction import geometric_phase, square_loop
from hamel_mech.system import MechanicalSystem, momentum


def common_axis_params(group="SE3"):
    return models.SatelliteParams(
        rotor_axes=((0.0, 0.0, 1.0),) * 3,
        rotor_coms=((0.0, 0.0, 0.1), (0.0, 0.0, 0.2), (0.0, 0.0, -0.3)),
        group=group)


class TestCurvature:
    def test_constant_abelian_is_zero(self, rng):
        # SO3xR3 with connection values only in the translation rows: bracket vanishes
        A = np.zeros((6, 3))
        A[3:] = rng.normal(size=(3, 3))
        conn = LocalConnection.constant("SO3xR3", "left", A)
        assert np.abs(curvature(conn, rng.normal(size=3))).max() == 0

    def test_rolling_ball(self):
        R = 0.1
        _, conn = models.rolling_ball(models.BallParams(1.0, R))
        B = curvature(conn, np.array([0.3, -0.7]))
        assert B[2, 1, 0] == pytest.approx(1 / R ** 2, abs=1e-10)
        assert B[2, 0, 1] == pytest.approx(-1 / R ** 2, abs=1e-10)
        mask = np.ones_like(B, dtype=bool)
        mask[2, 1, 0] = mask[2, 0, 1] = False
        assert np.abs(B[mask]).max() < 1e-10

    def test_satellite_direct_product_brackets(self):
        sysm = models.satellite_so3r3()
        A = mechanical_connection(sysm, np.zeros(3))
        B = curvature(mechanical(sysm), np.zeros(3))
        th = A[:3]
        for i in range(3):
            for j in range(3):
                assert np.allclose(B[:3, i, j], np.cross(th[:, i], th[:, j]), atol=1e-14)
                assert np.abs(B[3:, i, j]).max() == 0

    @pytest.mark.parametrize("group", ["SO3", "SE3", "SO3xR3"])
    @pytest.mark.parametrize("triv", ["left", "right"])
    def test_equals_hamel_coefficients_of_bundle_map(self, rng, group, triv):
        sysm = random_system(rng, group, triv, d=3)
        conn = mechanical(sysm)
        m = conn.n_fiber
        for _ in range(3):
            s = rng.uniform(-0.8, 0.8, m)
            r = rng.uniform(-0.5, 0.5, 3)
            gam = quasi.hamel_numeric(bundle_map(conn), np.concatenate([s, r]))
            B = curvature(conn, r)
            assert np.abs(gam.curvature_block - B).max() < 1e-6
            assert np.abs(B + B.transpose(0, 2, 1)).max() < 1e-12

    def test_field_wrapper(self, rng):
        sysm = random_system(rng, "SE3", "left", d=2)
        conn = mechanical(sysm)
        r = rng.normal(size=2) * 0.3
        assert np.array_equal(conn.curvature(r), curvature(conn, r))


class TestMechanicalConnection:
    def test_decoupled(self, rng):
        sysm = MechanicalSystem("SO3", "left", 2, L=lambda r: np.eye(3), S=lambda r: np.eye(2))
        r, xi, rd = rng.normal(size=2), rng.normal(size=3), rng.normal(size=2)
        assert np.array_equal(mechanical_connection(sysm, r), np.zeros((3, 2)))
        assert np.array_equal(locked_velocity(sysm, r, xi, rd), xi)

    def test_satellite_direct_product(self):
        sysm = models.satellite_so3r3()
        L, K, _ = sysm.blocks(np.zeros(3))
        A = mechanical_connection(sysm, np.zeros(3))
        assert np.allclose(A[:3], np.linalg.solve(L[:3, :3], K[:3]), atol=1e-15)
        assert np.array_equal(A[3:], np.zeros((3, 3)))

    def test_defining_identity(self, rng):
        sysm = random_system(rng, "SE3", "left", d=3)
        for _ in range(20):
            r = rng.uniform(-0.5, 0.5, 3)
            L, K, _ = sysm.blocks(r)
            assert np.abs(L @ mechanical_connection(sysm, r) - K).max() < 1e-12

    def test_bad_inertia(self):
        sysm = MechanicalSystem("SO3", "left", 1, L=lambda r: -np.eye(3), K=lambda r: np.ones((3, 1)),
                                S=lambda r: np.eye(1))
        with pytest.raises(InertiaError):
            mechanical_connection(sysm, np.zeros(1))


class TestLockedVelocity:
    def test_frozen_shape(self, rng):
        sysm = random_system(rng, "SE3", "left", d=2)
        xi = rng.normal(size=6)
        assert np.allclose(locked_velocity(sysm, np.zeros(2), xi, np.zeros(2)), xi, atol=0)

    def test_zero_momentum(self, rng):
        sysm = random_system(rng, "SE3", "left", d=2)
        r, rd = rng.normal(size=2) * 0.3, rng.normal(size=2)
        xi = -mechanical_connection(sysm, r) @ rd
        assert np.abs(locked_velocity(sysm, r, xi, rd)).max() < 1e-14

    def test_momentum_identity(self, rng):
        sysm = random_system(rng, "SE3", "left", d=3)
        for _ in range(20):
            r, xi, rd = rng.uniform(-0.5, 0.5, 3), rng.normal(size=6), rng.normal(size=3)
            L, _, _ = sysm.blocks(r)
            assert np.allclose(L @ locked_velocity(sysm, r, xi, rd), momentum(sysm, r, xi, rd), atol=1e-12)


class TestFlatness:
    def test_zero_connection(self):
        rep = is_flat(LocalConnection.zero("SE3", "left", 2), [-1, -1], [1, 1], samples=20)
        assert rep.flat and rep.max_abs == 0

    def test_rolling_ball_not_flat(self):
        _, conn = models.rolling_ball(models.BallParams(1.0, 0.1))
        rep = is_flat(conn, [-1, -1], [1, 1], samples=10)
        assert not rep.flat
        assert rep.max_abs == pytest.approx(100.0, abs=1e-8)

    @pytest.mark.parametrize("group", ["SE3", "SO3xR3"])
    def test_common_axis_satellite_is_flat(self, group):
        rep = is_flat(mechanical(models.satellite(common_axis_params(group))), [-3] * 3, [3] * 3, samples=50)
        assert rep.flat

    def test_default_satellite_is_not_flat(self):
        assert not is_flat(mechanical(models.satellite_se3()), [-3] * 3, [3] * 3, samples=5).flat

    @pytest.mark.parametrize("plane", [(0, 1), (1, 2), (0, 2)])
    def test_flat_means_trivial_rectangle_phase(self, rng, plane):
        conn = mechanical(models.satellite(common_axis_params("SE3")))
        loop = square_loop(rng.uniform(-1, 1, 3), 1e-2, 1.0, plane)
        ph = geometric_phase(conn, loop, dt=1e-2)
        assert lie.distance(ph.phase, lie.identity("SE3")) < 1e-6


class TestCentroidal:
    def test_identity_frame(self, rng):
        sysm = models.satellite_se3()
        r, xi, rd = rng.normal(size=3), rng.normal(size=6), rng.normal(size=3)
        c = centroidal_transform(sysm, r, xi, rd, lie.identity("SE3"))
        assert np.allclose(c.momentum, momentum(sysm, r, xi, rd), atol=1e-14)
        assert np.allclose(c.velocity, locked_velocity(sysm, r, xi, rd), atol=1e-14)

    def test_momentum_inertia_identity(self, rng):
        sysm = random_system(rng, "SE3", "left", d=2)
        for _ in range(20):
            r, xi, rd = rng.uniform(-0.5, 0.5, 2), rng.normal(size=6), rng.normal(size=2)
            gbG = lie.exp(rng.normal(size=6), "SE3")
            c = centroidal_transform(sysm, r, xi, rd, gbG)
            assert np.allclose(c.momentum, c.inertia @ c.velocity, atol=1e-11)

    def test_block_diagonal_at_total_com(self, rng):
        params = models.SatelliteParams(body_com=(0.02, -0.05, 0.03))
        sysm = models.satellite_se3(params)
        gbG = lie.GroupElement("SE3", np.eye(3), params.com)
        c = centroidal_transform(sysm, rng.normal(size=3), rng.normal(size=6), rng.normal(size=3), gbG)
        M = c.inertia
        assert np.abs(M[:3, 3:]).max() < 1e-14
        assert np.abs(M[3:, :3]).max() < 1e-14
        assert np.allclose(M[3:, 3:], params.total_mass * np.eye(3), atol=1e-14)

    def test_wrong_group(self):
        with pytest.raises(UnsupportedGroupError):
            centroidal_transform(models.satellite_so3r3(), np.zeros(3), np.zeros(6), np.zeros(3),
                                 lie.identity("SO3xR3"))


class TestLockedMass:
    def test_decoupled_blocks(self, rng):
        sysm = MechanicalSystem("SO3", "left", 2, L=lambda r: 2 * np.eye(3), S=lambda r: np.diag([1.0, 3.0]))
        Ml = locked_mass_matrix(sysm, rng.normal(size=2))
        assert np.array_equal(Ml, sysm.mass_matrix(np.zeros(2)))

    def test_congruence(self, rng):
        sysm = random_system(rng, "SE3", "right", d=3)
        for _ in range(5):
            r = rng.uniform(-0.5, 0.5, 3)
            A = mechanical_connection(sysm, r)
            T = np.block([[np.eye(6), -A], [np.zeros((3, 6)), np.eye(3)]])
            Ml = locked_mass_matrix(sysm, r)
            assert np.abs(Ml - T.T @ sysm.mass_matrix(r) @ T).max() < 1e-12
            assert np.all(Ml[:6, 6:] == 0) and np.all(Ml[6:, :6] == 0)
            np.linalg.cholesky(Ml)
