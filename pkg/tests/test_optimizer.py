import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from speccoarse.coarsening import coarsen
from speccoarse.errors import DimensionMismatch, NonOrthonormalU, ValidationError
from speccoarse.graph import Graph, combinatorial_laplacian
from speccoarse.optimizer import (
    WeightVector,
    align_spectrum,
    fixed_point_residual,
    gradient,
    lap_adjoint,
    lap_from_weights,
    lipschitz,
    objective,
    pair_indices,
    phi,
    random_orthogonal,
    update_u,
    update_w,
)


def cycle(n, w=1.0):
    return Graph.from_edges(n, [(i, (i + 1) % n, w) for i in range(n)])


class TestCoordinates:
    def test_phi_values(self):
        n = 4
        got = [phi(i, j, n) for j in range(1, n) for i in range(j + 1, n + 1)]
        assert got == list(range(1, 7))
        assert phi(2, 1, 4) == 1 and phi(4, 1, 4) == 3 and phi(3, 2, 4) == 4 and phi(4, 3, 4) == 6

    def test_phi_rejects(self):
        with pytest.raises(ValidationError):
            phi(1, 2, 4)

    def test_pair_indices_follow_phi(self):
        large, small = pair_indices(5)
        for k, (i, j) in enumerate(zip(large, small)):
            assert phi(i + 1, j + 1, 5) == k + 1

    def test_weight_vector_roundtrip(self, rng):
        g = random_graph(rng, 9)
        wv = WeightVector.from_graph(g)
        np.testing.assert_allclose(lap_from_weights(wv), combinatorial_laplacian(g), atol=1e-14)
        assert wv.to_graph(g).edges == g.edges

    def test_weight_vector_validation(self):
        with pytest.raises(DimensionMismatch):
            WeightVector(3, np.zeros(2), np.ones(2, bool))
        with pytest.raises(ValidationError):
            WeightVector(3, np.array([1.0, 0.0, 0.0]), np.array([False, True, True]))


class TestOperators:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2**31 - 1))
    def test_adjoint_identity(self, n, seed):
        rng = np.random.default_rng(seed)
        wv = WeightVector.complete(n, rng.uniform(size=n * (n - 1) // 2))
        y = rng.normal(size=(n, n))
        lhs = np.sum(lap_from_weights(wv) * y)
        assert lhs == pytest.approx(wv.w @ lap_adjoint(y), rel=1e-10, abs=1e-10)

    def test_lipschitz_bounds_operator_norm(self):
        n = 7
        m = n * (n - 1) // 2
        cols = [lap_adjoint(lap_from_weights(WeightVector.complete(n, e))) for e in np.eye(m)]
        assert np.linalg.eigvalsh(np.array(cols)).max() == pytest.approx(lipschitz(n))

    def test_gradient_finite_difference(self, rng):
        n = 6
        wv = WeightVector.complete(n, rng.uniform(0.5, 1.5, size=15))
        u = random_orthogonal(n, rng)
        lam = np.sort(rng.uniform(0, 5, size=n))
        g = gradient(wv, u, lam)
        h = 1e-6
        for k in range(15):
            e = np.zeros(15)
            e[k] = h
            fd = (objective(wv.replace(wv.w + e), u, lam) - objective(wv.replace(wv.w - e), u, lam)) / (2 * h)
            # objective is ‖Lw - T‖², gradient drops the factor 2
            assert fd == pytest.approx(2 * g[k], rel=1e-6, abs=1e-6)

    def test_update_u_diagonalizes(self, rng):
        wv = WeightVector.from_graph(random_graph(rng, 8))
        u = update_u(wv)
        d = u.T @ lap_from_weights(wv) @ u
        np.testing.assert_allclose(d, np.diag(np.diag(d)), atol=1e-10)
        assert np.all(np.diff(np.diag(d)) >= -1e-12)

    def test_nonorthonormal_u(self, rng):
        wv = WeightVector.from_graph(cycle(4))
        with pytest.raises(NonOrthonormalU):
            objective(wv, np.ones((4, 4)), np.zeros(4))

    def test_update_w_stays_feasible(self, rng):
        g = random_graph(rng, 8, p=0.2)
        wv = WeightVector.from_graph(g)
        u = random_orthogonal(8, rng)
        nxt = update_w(wv, u, 10 * np.arange(8.0))
        assert np.all(nxt.w >= 0) and np.all(nxt.w[~wv.mask] == 0)


class TestAlignSpectrum:
    def test_cycle_doubles_weights(self):
        g = cycle(7)
        lam = 2 * np.linalg.eigvalsh(combinatorial_laplacian(g))
        out, trace = align_spectrum(g, lam, tol=1e-10, max_iter=20000, rng=0)
        assert trace.converged
        np.testing.assert_allclose(out.weights, 2.0, atol=1e-4)
        assert trace.objectives[-1] <= 1e-8

    def test_monotone_and_masked(self, rng):
        g = random_graph(rng, 30, p=0.25)
        cr = coarsen(g, "heavy", 0.5, rng=0)
        lam = np.linalg.eigvalsh(combinatorial_laplacian(g))[: cr.coarse.n]
        masks = []
        out, trace = align_spectrum(cr, lam, max_iter=300, rng=1,
                                    callback=lambda t, wv, u, f: masks.append(np.all(wv.w[~wv.mask] == 0)))
        obj = np.array(trace.objectives)
        assert np.all(np.diff(obj) <= 1e-12 * np.maximum(1, obj[:-1]))
        assert all(masks)
        assert trace.iterations == len(obj)
        assert out.num_edges + trace.dropped_edges == cr.coarse.num_edges

    def test_fixed_point_at_solution(self):
        g = cycle(5)
        wv = WeightVector.from_graph(g)
        lam = np.linalg.eigvalsh(combinatorial_laplacian(g))
        assert fixed_point_residual(wv, update_u(wv), lam) < 1e-12

    def test_max_iter_flag(self, rng):
        g = random_graph(rng, 10)
        _, trace = align_spectrum(g, np.linspace(0, 20, 10), max_iter=3, rng=0)
        assert trace.max_iter_exceeded and not trace.converged and trace.iterations == 3

    def test_input_validation(self):
        g = cycle(4)
        with pytest.raises(DimensionMismatch):
            align_spectrum(g, np.zeros(3))
        with pytest.raises(ValidationError):
            align_spectrum(g, np.zeros(4), tol=0.0)
        with pytest.warns(UserWarning):
            align_spectrum(g, np.arange(1.0, 5.0), max_iter=2)
