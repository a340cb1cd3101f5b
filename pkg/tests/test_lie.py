import numpy as np
import pytest
from scipy.linalg import expm

from hamel_mech import lie
from hamel_mech.errors import BranchError, InputError, UnsupportedGroupError

GROUPS = ["SO3", "SE3", "SO3xR3"]


def random_vec(rng, group, scale=1.0):
    return rng.uniform(-scale, scale, lie.algebra_dim(group))


def random_element(rng, group):
    return lie.exp(random_vec(rng, group, 1.5), group)


def series_exp(v, group):
    """Truncated exponential series in the matrix representation."""
    if group == "SO3xR3":
        R = series_exp(v[:3], "SO3").matrix()
        return lie.GroupElement(group, R, v[3:])
    X = lie.hat(v, group)
    out = np.eye(X.shape[0])
    term = np.eye(X.shape[0])
    for k in range(1, 21):
        term = term @ X / k
        out = out + term
    if group == "SO3":
        return lie.GroupElement(group, out)
    return lie.GroupElement(group, out[:3, :3], out[:3, 3])


class TestHatVee:
    def test_zero(self):
        assert np.array_equal(lie.hat(np.zeros(3), "SO3"), np.zeros((3, 3)))

    def test_cross_product(self):
        assert np.allclose(lie.hat([1.0, 0, 0], "SO3") @ [0, 1.0, 0], [0, 0, 1.0])

    def test_cross_random(self, rng):
        for _ in range(20):
            x, y = rng.normal(size=3), rng.normal(size=3)
            assert np.allclose(lie.hat(x, "SO3") @ y, np.cross(x, y), atol=1e-14)

    @pytest.mark.parametrize("group", ["SO3", "SE3"])
    def test_roundtrip(self, rng, group):
        for _ in range(100):
            v = rng.normal(size=lie.algebra_dim(group))
            assert np.allclose(lie.vee(lie.hat(v, group), group), v, atol=0)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            lie.hat(np.zeros(4), "SO3")

    def test_unknown_group(self):
        with pytest.raises((InputError, UnsupportedGroupError)):
            lie.hat(np.zeros(3), "SU2")


class TestExpLog:
    @pytest.mark.parametrize("group", GROUPS)
    def test_exp_zero_is_identity(self, group):
        assert lie.distance(lie.exp(np.zeros(lie.algebra_dim(group)), group), lie.identity(group)) == 0

    def test_quarter_turn_about_x(self):
        R = lie.exp([np.pi / 2, 0, 0], "SO3").rotation
        assert np.allclose(R @ [0, 1.0, 0], [0, 0, 1.0], atol=1e-15)

    @pytest.mark.parametrize("group", GROUPS)
    def test_matches_series(self, rng, group):
        for _ in range(100):
            v = random_vec(rng, group)
            v *= rng.uniform(0, 1) / max(1.0, np.linalg.norm(v))
            assert lie.distance(lie.exp(v, group), series_exp(v, group)) < 1e-12

    @pytest.mark.parametrize("group", ["SO3", "SE3"])
    def test_matches_expm(self, rng, group):
        for _ in range(20):
            v = random_vec(rng, group, 2.0)
            assert np.allclose(lie.exp(v, group).matrix(), expm(lie.hat(v, group)), atol=1e-12)

    def test_direct_product_translation_is_raw(self, rng):
        v = random_vec(rng, "SO3xR3", 2.0)
        assert np.array_equal(lie.exp(v, "SO3xR3").translation, v[3:])

    @pytest.mark.parametrize("group", GROUPS)
    def test_log_identity(self, group):
        assert np.array_equal(lie.log(lie.identity(group)), np.zeros(lie.algebra_dim(group)))

    @pytest.mark.parametrize("group", GROUPS)
    def test_log_exp_roundtrip(self, rng, group):
        for _ in range(100):
            v = random_vec(rng, group, 3.0)
            w = v[:3]
            if np.linalg.norm(w) > np.pi - 0.1:
                v[:3] = w / np.linalg.norm(w) * rng.uniform(0, np.pi - 0.1)
            assert np.allclose(lie.log(lie.exp(v, group)), v, atol=1e-10)

    @pytest.mark.parametrize("group", GROUPS)
    def test_exp_log_roundtrip(self, rng, group):
        for _ in range(50):
            g = random_element(rng, group)
            assert lie.distance(lie.exp(lie.log(g), group), g) < 1e-10

    def test_near_half_turn(self):
        axis = np.array([1.0, 2.0, -0.5]) / np.linalg.norm([1.0, 2.0, -0.5])
        for eps in (1e-3, 1e-5, 1e-7):
            v = lie.log(lie.exp((np.pi - eps) * axis, "SO3"))
            assert np.all(np.isfinite(v))
            assert np.linalg.norm(v) == pytest.approx(np.pi - eps, abs=1e-8)
            assert np.allclose(v / np.linalg.norm(v), axis, atol=1e-6)

    def test_half_turn_is_branch_error(self):
        with pytest.raises(BranchError):
            lie.log(lie.exp([np.pi, 0, 0], "SO3"))
        with pytest.raises(BranchError):
            lie.log(lie.exp([0, 0, np.pi - 1e-10, 1.0, 0, 0], "SE3"))

    @pytest.mark.parametrize("group", GROUPS)
    def test_small_angles(self, group):
        v = np.full(lie.algebra_dim(group), 1e-7)
        assert np.allclose(lie.log(lie.exp(v, group)), v, rtol=1e-10, atol=1e-20)


class TestGroupAxioms:
    @pytest.mark.parametrize("group", GROUPS)
    def test_inverse(self, rng, group):
        for _ in range(20):
            g = random_element(rng, group)
            assert lie.distance(g @ g.inverse(), lie.identity(group)) < 1e-12
            assert lie.distance(g.inverse() @ g, lie.identity(group)) < 1e-12

    @pytest.mark.parametrize("group", GROUPS)
    def test_associative(self, rng, group):
        for _ in range(20):
            a, b, c = (random_element(rng, group) for _ in range(3))
            assert lie.distance((a @ b) @ c, a @ (b @ c)) < 1e-12

    def test_composition_rules(self, rng):
        a, b = random_element(rng, "SE3"), random_element(rng, "SE3")
        assert np.allclose((a @ b).matrix(), a.matrix() @ b.matrix(), atol=1e-14)
        c, d = random_element(rng, "SO3xR3"), random_element(rng, "SO3xR3")
        assert np.allclose((c @ d).translation, c.translation + d.translation)

    def test_long_chain_stays_orthonormal(self, rng):
        step = lie.exp(rng.normal(size=3) * 0.3, "SO3")
        g = lie.identity("SO3")
        for _ in range(5000):
            g = g @ step
        assert g.orthonormality_error() <= 1e-10

    def test_rejects_non_rotation(self):
        with pytest.raises(InputError):
            lie.GroupElement("SO3", np.diag([1.0, 1.0, -1.0]))


class TestAdjoint:
    @pytest.mark.parametrize("group", GROUPS)
    def test_identity(self, group):
        n = lie.algebra_dim(group)
        assert np.array_equal(lie.adjoint(lie.identity(group)), np.eye(n))

    @pytest.mark.parametrize("group", GROUPS)
    def test_homomorphism(self, rng, group):
        for _ in range(20):
            a, b = random_element(rng, group), random_element(rng, group)
            assert np.allclose(lie.adjoint(a @ b), lie.adjoint(a) @ lie.adjoint(b), atol=1e-12)

    @pytest.mark.parametrize("group", ["SO3", "SE3"])
    def test_conjugation(self, rng, group):
        for _ in range(100):
            g = random_element(rng, group)
            x = random_vec(rng, group, 2.0)
            G = g.matrix()
            conj = lie.vee(G @ lie.hat(x, group) @ np.linalg.inv(G), group)
            assert np.allclose(lie.adjoint(g) @ x, conj, atol=1e-12)

    def test_direct_product_conjugation(self, rng):
        for _ in range(20):
            g = random_element(rng, "SO3xR3")
            x = random_vec(rng, "SO3xR3")
            expected = np.concatenate([g.rotation @ x[:3], x[3:]])
            assert np.allclose(lie.adjoint(g) @ x, expected, atol=1e-14)

    def test_se3_offset_example(self):
        # lower block p~ R w = (1,0,0) x (0,0,1) = (0,-1,0)
        g = lie.GroupElement("SE3", np.eye(3), [1.0, 0, 0])
        out = lie.adjoint(g) @ np.array([0, 0, 1.0, 0, 0, 0])
        assert np.allclose(out, [0, 0, 1.0, 0, -1.0, 0])
        G = g.matrix()
        conj = lie.vee(G @ lie.hat([0, 0, 1.0, 0, 0, 0], "SE3") @ np.linalg.inv(G), "SE3")
        assert np.allclose(out, conj)

    def test_translation_free_agreement(self, rng):
        R = lie.exp(rng.normal(size=3), "SO3").rotation
        a = lie.GroupElement("SE3", R, np.zeros(3))
        b = lie.GroupElement("SO3xR3", R, np.zeros(3))
        assert np.array_equal(lie.adjoint(a)[:3, :3], lie.adjoint(b)[:3, :3])
        v = np.concatenate([rng.normal(size=3), np.zeros(3)])
        assert np.allclose(lie.exp(v, "SE3").rotation, lie.exp(v, "SO3xR3").rotation, atol=0)
        assert np.allclose(lie.log(a)[:3], lie.log(b)[:3], atol=0)


class TestAd:
    @pytest.mark.parametrize("group", GROUPS)
    def test_zero(self, group):
        n = lie.algebra_dim(group)
        assert np.array_equal(lie.ad(np.zeros(n), group), np.zeros((n, n)))

    def test_se3_blocks(self, rng):
        w, v = rng.normal(size=3), rng.normal(size=3)
        A = lie.ad(np.concatenate([w, v]), "SE3")
        assert np.array_equal(A[3:, :3], lie.skew(v))
        assert np.array_equal(A[:3, :3], lie.skew(w))
        assert np.array_equal(A[3:, 3:], lie.skew(w))
        assert np.array_equal(A[:3, 3:], np.zeros((3, 3)))

    def test_direct_product_blocks(self, rng):
        x = rng.normal(size=6)
        A = lie.ad(x, "SO3xR3")
        assert np.array_equal(A[:3, :3], lie.skew(x[:3]))
        assert np.array_equal(A[3:], np.zeros((3, 6)))
        assert np.array_equal(A[:, 3:], np.zeros((6, 3)))

    def test_matches_matrix_commutator(self, rng):
        for _ in range(20):
            x, y = rng.normal(size=6), rng.normal(size=6)
            X, Y = lie.hat(x, "SE3"), lie.hat(y, "SE3")
            assert np.allclose(lie.bracket(x, y, "SE3"), lie.vee(X @ Y - Y @ X, "SE3"), atol=1e-13)

    @pytest.mark.parametrize("group", GROUPS)
    def test_antisymmetry_and_jacobi(self, rng, group):
        for _ in range(50):
            x, y, z = (random_vec(rng, group, 2.0) for _ in range(3))
            br = lambda a, b: lie.bracket(a, b, group)
            assert np.allclose(br(x, y), -br(y, x), atol=1e-15)
            jac = br(x, br(y, z)) + br(y, br(z, x)) + br(z, br(x, y))
            assert np.linalg.norm(jac) <= 1e-12


class TestDexp:
    @pytest.mark.parametrize("group", GROUPS)
    @pytest.mark.parametrize("triv", ["left", "right"])
    def test_at_zero(self, group, triv):
        n = lie.algebra_dim(group)
        assert np.allclose(lie.dexp(np.zeros(n), group, triv), np.eye(n), atol=0)
        assert np.allclose(lie.dexpinv(np.zeros(n), group, triv), np.eye(n), atol=0)

    @pytest.mark.parametrize("group", GROUPS)
    @pytest.mark.parametrize("triv", ["left", "right"])
    def test_inverse(self, rng, group, triv):
        for _ in range(100):
            v = random_vec(rng, group, 3.0)
            v[:3] *= min(1.0, 3.0 / np.linalg.norm(v[:3]))
            P = lie.dexp(v, group, triv) @ lie.dexpinv(v, group, triv)
            assert np.abs(P - np.eye(P.shape[0])).max() < 1e-10

    @pytest.mark.parametrize("group", GROUPS)
    def test_ad_series(self, rng, group):
        """Right dexp = sum_k ad^k / (k+1)!."""
        for _ in range(20):
            v = random_vec(rng, group, 1.5)
            A = lie.ad(v, group)
            term = np.eye(A.shape[0])
            total = term.copy()
            for k in range(1, 30):
                term = term @ A / (k + 1)
                total = total + term
            assert np.allclose(lie.dexp(v, group, "right"), total, atol=1e-13)

    @pytest.mark.parametrize("group", GROUPS)
    def test_finite_difference(self, rng, group):
        h = 1e-6
        for _ in range(10):
            v, vdot = random_vec(rng, group, 2.0), random_vec(rng, group)
            g = lie.exp(v, group)
            gp, gm = lie.exp(v + h * vdot, group), lie.exp(v - h * vdot, group)
            dR = (gp.rotation - gm.rotation) / (2 * h)
            dp = (gp.translation - gm.translation) / (2 * h)
            R, p = g.rotation, g.translation
            if group == "SO3":
                body, spatial = lie.unskew(R.T @ dR), lie.unskew(dR @ R.T)
            elif group == "SE3":
                body = np.concatenate([lie.unskew(R.T @ dR), R.T @ dp])
                spatial = np.concatenate([lie.unskew(dR @ R.T), dp - np.cross(lie.unskew(dR @ R.T), p)])
            else:
                body = np.concatenate([lie.unskew(R.T @ dR), dp])
                spatial = np.concatenate([lie.unskew(dR @ R.T), dp])
            assert np.allclose(lie.dexp(v, group, "left") @ vdot, body, atol=1e-6)
            assert np.allclose(lie.dexp(v, group, "right") @ vdot, spatial, atol=1e-6)

    @pytest.mark.parametrize("group", GROUPS)
    def test_left_right_relation(self, rng, group):
        for _ in range(20):
            v = random_vec(rng, group, 2.5)
            lhs = lie.dexp(v, group, "right")
            rhs = lie.adjoint(lie.exp(v, group)) @ lie.dexp(v, group, "left")
            assert np.abs(lhs - rhs).max() < 1e-10

    @pytest.mark.parametrize("group", ["SO3", "SE3"])
    def test_continuous_across_small_angle_switch(self, rng, group):
        d = rng.normal(size=lie.algebra_dim(group))
        d[:3] /= np.linalg.norm(d[:3])
        a = lie.dexpinv(d * 0.99999e-4, group)
        b = lie.dexpinv(d * 1.00001e-4, group)
        assert np.abs(a - b).max() < 1e-8
