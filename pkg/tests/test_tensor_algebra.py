import numpy as np
import pytest

from radau_plasticity import tensor_algebra as ta


def _sym(rng):
    m = rng.normal(size=(3, 3))
    return m + m.T


class TestStorage:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        m = _sym(rng)
        assert np.allclose(ta.to_matrix(ta.from_matrix(m)), m, atol=1e-15)

    def test_ordering_and_no_shear_doubling(self):
        m = np.array([[1.0, 4.0, 6.0], [4.0, 2.0, 5.0], [6.0, 5.0, 3.0]])
        assert np.array_equal(ta.from_matrix(m), [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])

    def test_batched_shapes(self):
        t = np.zeros((4, 2, 6))
        assert ta.to_matrix(t).shape == (4, 2, 3, 3)
        assert ta.norm(t).shape == (4, 2)


class TestContractions:
    def test_contract_matches_matrix_double_dot(self):
        rng = np.random.default_rng(1)
        a, b = _sym(rng), _sym(rng)
        assert ta.contract(ta.from_matrix(a), ta.from_matrix(b)) == pytest.approx(np.sum(a * b), rel=1e-14)

    def test_norm_is_frobenius(self):
        rng = np.random.default_rng(2)
        a = _sym(rng)
        assert ta.norm(ta.from_matrix(a)) == pytest.approx(np.linalg.norm(a), rel=1e-14)

    def test_deviator_traceless_and_idempotent(self):
        rng = np.random.default_rng(3)
        t = rng.normal(size=(10, 6))
        d = ta.deviator(t)
        assert np.max(np.abs(ta.trace(d))) < 1e-14
        assert np.allclose(ta.deviator(d), d, atol=1e-15)

    def test_dev_projector_applies_deviator(self):
        rng = np.random.default_rng(4)
        t = rng.normal(size=6)
        assert np.allclose(ta.apply(ta.DEV_PROJECTOR, t), ta.deviator(t), atol=1e-14)

    def test_identity4(self):
        t = np.arange(1.0, 7.0)
        assert np.allclose(ta.apply(ta.IDENTITY4, t), t)

    def test_compose_with_identity(self):
        rng = np.random.default_rng(5)
        c = rng.normal(size=(6, 6))
        assert np.allclose(ta.compose(c, ta.IDENTITY4), c)
        assert np.allclose(ta.compose(ta.IDENTITY4, c), c)

    def test_dyad_applies_as_projection(self):
        rng = np.random.default_rng(6)
        a, b, t = rng.normal(size=(3, 6))
        assert np.allclose(ta.apply(ta.dyad(a, b), t), a * ta.contract(b, t))


class TestMandel:
    def test_dot_product_is_contraction(self):
        rng = np.random.default_rng(7)
        a, b = rng.normal(size=(2, 6))
        assert ta.to_mandel(a) @ ta.to_mandel(b) == pytest.approx(ta.contract(a, b), rel=1e-14)

    def test_tangent_action_commutes(self):
        rng = np.random.default_rng(8)
        c = rng.normal(size=(6, 6))
        t = rng.normal(size=6)
        lhs = ta.to_mandel(ta.apply(c, t))
        rhs = ta.tangent_to_mandel(c) @ ta.to_mandel(t)
        assert np.allclose(lhs, rhs, atol=1e-13)
        assert np.allclose(ta.tangent_from_mandel(ta.tangent_to_mandel(c)), c)


class TestElasticity:
    def test_matches_engineering_voigt_matrix(self):
        E, nu = 210000.0, 0.3
        lam = E * nu / ((1 + nu) * (1 - 2 * nu))
        mu = E / (2 * (1 + nu))
        kappa = lam + 2 * mu / 3
        voigt = np.zeros((6, 6))
        voigt[:3, :3] = lam
        voigt[np.arange(3), np.arange(3)] += 2 * mu
        voigt[np.arange(3, 6), np.arange(3, 6)] = mu
        assert np.allclose(ta.isotropic_elasticity(kappa, mu), voigt, rtol=1e-13)

    def test_engineering_shear_gives_tensor_shear_stress(self):
        C = ta.isotropic_elasticity(1.0, 5.0)
        eps = np.array([0, 0, 0, 0.01, 0, 0])  # tensor component, gamma = 0.02
        assert ta.apply(C, eps)[3] == pytest.approx(2 * 5.0 * 0.01)
