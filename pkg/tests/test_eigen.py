import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from speccoarse.eigen import eigvalsh, fix_signs, jacobi_eig, sym_eig
from speccoarse.errors import NoConvergence


def symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return a + a.T


class TestJacobi:
    @pytest.mark.parametrize("n", [1, 2, 3, 7, 20, 33])
    def test_matches_lapack(self, n):
        m = symmetric(np.random.default_rng(n), n)
        dec = sym_eig(m, method="jacobi")
        np.testing.assert_allclose(dec.values, np.linalg.eigvalsh(m), atol=1e-12)
        np.testing.assert_allclose(dec.vectors.T @ dec.vectors, np.eye(n), atol=1e-12)
        np.testing.assert_allclose(m @ dec.vectors, dec.vectors * dec.values, atol=1e-11)

    def test_sweep_limit(self):
        m = symmetric(np.random.default_rng(0), 10)
        with pytest.raises(NoConvergence):
            jacobi_eig(m, tol=0.0, max_sweeps=1)

    def test_diagonal_input(self):
        dec = sym_eig(np.diag([3.0, -1.0, 2.0]), method="jacobi")
        np.testing.assert_array_equal(dec.values, [-1.0, 2.0, 3.0])
        np.testing.assert_array_equal(np.abs(dec.vectors), np.eye(3)[:, [1, 2, 0]])

    def test_zero_matrix(self):
        dec = sym_eig(np.zeros((4, 4)))
        np.testing.assert_array_equal(dec.values, np.zeros(4))
        np.testing.assert_array_equal(dec.vectors, np.eye(4))

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (6, 6), elements=st.floats(-10, 10)))
    def test_reconstruction(self, a):
        m = a + a.T
        dec = sym_eig(m, method="jacobi")
        scale = max(1.0, np.abs(m).max())
        np.testing.assert_allclose((dec.vectors * dec.values) @ dec.vectors.T, m, atol=1e-11 * scale)
        assert np.all(np.diff(dec.values) >= 0)


class TestConventions:
    def test_sign_rule(self):
        v = np.array([[0.6, -0.8], [-0.8, -0.6]])
        out = fix_signs(v)
        np.testing.assert_array_equal(out, [[-0.6, 0.8], [0.8, 0.6]])

    def test_sign_tie_goes_to_lowest_index(self):
        s = 1 / np.sqrt(2)
        out = fix_signs(np.array([[-s], [s]]))
        np.testing.assert_allclose(out[:, 0], [s, -s])

    def test_methods_agree_after_sign_fix(self):
        m = symmetric(np.random.default_rng(3), 12)
        a, b = sym_eig(m, "jacobi"), sym_eig(m, "lapack")
        np.testing.assert_allclose(a.values, b.values, atol=1e-12)
        np.testing.assert_allclose(a.vectors, b.vectors, atol=1e-10)

    def test_auto_switch(self):
        m = symmetric(np.random.default_rng(4), 150)
        np.testing.assert_allclose(eigvalsh(m), np.linalg.eigvalsh(m), atol=1e-10)

    def test_symmetrizes_input(self):
        m = np.array([[1.0, 2.0], [0.0, 1.0]])
        np.testing.assert_allclose(sym_eig(m).values, [0.0, 2.0], atol=1e-14)
