import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speccoarse.attention import (
    AttentionParams,
    FeatureMap,
    deepsets_layer,
    full_attention,
    gn_update,
    linear_attention,
    mpnn_vn_attention,
    mpnn_vn_deepsets,
    vn_aggregate,
)
from speccoarse.errors import ShapeMismatch, ValidationError


class TestFeatureMaps:
    def test_performer_formula(self):
        phi = FeatureMap.performer(3, 2, rng=0)
        x = np.array([0.3, -0.7])
        ref = np.array([np.exp(w @ x - x @ x / 2) for w in phi.w]) / np.sqrt(3)
        np.testing.assert_allclose(phi(x), ref, rtol=1e-14)

    def test_elu_plus_one(self):
        phi = FeatureMap.linear_transformer()
        np.testing.assert_allclose(phi(np.array([-1.0, 0.0, 2.0])), [np.exp(-1.0), 1.0, 3.0])

    def test_performer_frozen(self):
        phi = FeatureMap.performer(4, 2, rng=1)
        with pytest.raises(ValueError):
            phi.w[0, 0] = 1.0

    def test_performer_estimates_softmax_kernel(self):
        rng = np.random.default_rng(2)
        q, k = 0.3 * rng.normal(size=3), 0.3 * rng.normal(size=3)
        phi = FeatureMap.performer(200000, 3, rng=3)
        assert phi(q) @ phi(k) == pytest.approx(np.exp(q @ k), rel=1e-2)

    def test_validation(self):
        with pytest.raises(ValidationError):
            FeatureMap.performer(0, 2)
        with pytest.raises(ShapeMismatch):
            FeatureMap.performer(2, 3, rng=0)(np.ones(2))


class TestAttention:
    def test_full_attention_by_loop(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(5, 3))
        p = AttentionParams.random(3, 2, rng)
        ref = np.zeros((5, 3))
        for i in range(5):
            s = np.array([(x[i] @ p.w_q) @ (x[j] @ p.w_k) for j in range(5)])
            e = np.exp(s - s.max())
            ref[i] = sum(e[j] * (x[j] @ p.w_v) for j in range(5)) / e.sum()
        np.testing.assert_allclose(full_attention(x, p), ref, atol=1e-14)

    def test_linear_attention_by_loop(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(4, 2))
        p = AttentionParams.random(2, 2, rng)
        phi = FeatureMap.linear_transformer()
        ref = np.zeros((4, 2))
        for i in range(4):
            kern = np.array([phi(x[i] @ p.w_q) @ phi(x[j] @ p.w_k) for j in range(4)])
            ref[i] = kern @ (x @ p.w_v) / kern.sum()
        np.testing.assert_allclose(linear_attention(x, p, phi), ref, atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 64), st.integers(1, 8), st.integers(1, 16), st.integers(0, 2**31 - 1), st.booleans())
    def test_vn_pipeline_equals_linear(self, n, d, m, seed, performer):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n, d))
        p = AttentionParams.random(d, d, rng)
        phi = FeatureMap.performer(m, d, rng) if performer else FeatureMap.linear_transformer()
        np.testing.assert_allclose(mpnn_vn_attention(x, p, phi), linear_attention(x, p, phi), atol=1e-10)

    def test_vn_state(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(6, 3))
        p = AttentionParams.random(3, 2, rng)
        phi = FeatureMap.linear_transformer()
        s1, s2 = vn_aggregate(x, p, phi)
        fk = phi(x @ p.w_k)
        np.testing.assert_allclose(s1, fk.sum(axis=0))
        np.testing.assert_allclose(s2, fk.T @ (x @ p.w_v))
        np.testing.assert_allclose(gn_update(x[0], (s1, s2), p, phi), linear_attention(x, p, phi)[0])

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(10, 4))
        p = AttentionParams.random(4, 3, rng)
        phi = FeatureMap.performer(8, 3, rng)
        perm = rng.permutation(10)
        for f in (lambda z: full_attention(z, p), lambda z: linear_attention(z, p, phi),
                  lambda z: mpnn_vn_attention(z, p, phi)):
            np.testing.assert_allclose(f(x[perm]), f(x)[perm], atol=1e-12)

    def test_params_validation(self):
        with pytest.raises(ShapeMismatch):
            AttentionParams(np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 2)))
        with pytest.raises(ShapeMismatch):
            AttentionParams(np.ones((2, 2)), np.ones((2, 2)), np.ones((2, 3)))
        with pytest.raises(ValidationError):
            AttentionParams(np.full((2, 2), np.nan), np.ones((2, 2)), np.ones((2, 2)))
        p = AttentionParams.random(3, 2, 0)
        with pytest.raises(ShapeMismatch):
            full_attention(np.ones((4, 2)), p)


class TestDeepSets:
    def test_identity(self):
        x = np.random.default_rng(8).normal(size=(5, 3))
        np.testing.assert_array_equal(deepsets_layer(x, np.eye(3), np.zeros((3, 3)), np.zeros(3)), x)

    def test_b_only_on_constant(self):
        x = np.tile([1.0, -2.0], (4, 1))
        b = np.array([[1.0, 2.0, 0.0], [0.5, 0.0, 1.0]])
        out = deepsets_layer(x, np.zeros((2, 3)), b, np.zeros(3))
        np.testing.assert_allclose(out, x @ b)

    def test_matches_formula(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(7, 3))
        a, b, c = rng.normal(size=(3, 2)), rng.normal(size=(3, 2)), rng.normal(size=2)
        one = np.ones((7, 1))
        ref = x @ a + one @ one.T @ x @ b / 7 + one @ c[None, :]
        np.testing.assert_allclose(deepsets_layer(x, a, b, c), ref, atol=1e-13)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 32), st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**31 - 1))
    def test_simulation_exact(self, n, di, do, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n, di))
        a, b, c = rng.normal(size=(di, do)), rng.normal(size=(di, do)), rng.normal(size=do)
        assert np.abs(mpnn_vn_deepsets(x, a, b, c) - deepsets_layer(x, a, b, c)).max() <= 1e-14

    def test_shapes(self):
        with pytest.raises(ShapeMismatch):
            deepsets_layer(np.ones((3, 2)), np.ones((2, 2)), np.ones((2, 3)), np.ones(2))
