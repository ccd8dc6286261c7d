import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from speccoarse.errors import ChannelMismatch, DimensionMismatch, IndexOutOfRange, KTooLarge
from speccoarse.ign import (
    PARTITIONS_1TO2,
    PARTITIONS_2TO1,
    PARTITIONS_2TO2,
    IGNLayer,
    IGNModel,
    apply_layer,
    bell,
    enumerate_partitions,
    ign_forward,
    le_op_1to2,
    le_op_2to1,
    le_op_2to2,
    partition_norm_2,
    vector_norm,
)


def partitions_by_insertion(k):
    if k == 0:
        return [[]]
    out = []
    for p in partitions_by_insertion(k - 1):
        for i in range(len(p)):
            out.append(p[:i] + [p[i] + [k]] + p[i + 1:])
        out.append(p + [[k]])
    return out


def formula_2to2(n, a):
    """Discrete basis written with explicit ones vectors."""
    one = np.ones((n, 1))
    dg = np.diag(a)[:, None]
    return [
        a, a.T, np.diag(np.diag(a)),
        a @ one @ one.T / n, one @ (a @ one).T / n, np.diag((a @ one).ravel()) / n,
        a.T @ one @ one.T / n, one @ (a.T @ one).T / n, np.diag((a.T @ one).ravel()) / n,
        (one.T @ a @ one) * (one @ one.T) / n**2, (one.T @ a @ one) * np.eye(n) / n**2,
        (one.T @ dg) * (one @ one.T) / n, (one.T @ dg) * np.eye(n) / n,
        dg @ one.T, one @ dg.T,
    ]


class TestPartitions:
    def test_bell_values(self):
        assert [bell(k) for k in range(8)] == [1, 1, 2, 5, 15, 52, 203, 877]

    @pytest.mark.parametrize("k", range(7))
    def test_enumeration_matches_insertion(self, k):
        ours = {frozenset(frozenset(b) for b in p) for p in enumerate_partitions(k)}
        ref = {frozenset(frozenset(b) for b in p) for p in partitions_by_insertion(k)}
        assert ours == ref and len(enumerate_partitions(k)) == bell(k)

    def test_three_element_partitions(self):
        assert enumerate_partitions(3) == [
            ((1, 2, 3),), ((1, 2), (3,)), ((1, 3), (2,)), ((1,), (2, 3)), ((1,), (2,), (3,))]

    def test_limits(self):
        with pytest.raises(KTooLarge):
            bell(11)
        with pytest.raises(KTooLarge):
            enumerate_partitions(-1)

    def test_label_tables(self):
        assert len(PARTITIONS_2TO2) == 15 and len(PARTITIONS_1TO2) == 5 and len(PARTITIONS_2TO1) == 5
        assert PARTITIONS_2TO2[2] == "{{1,2,3,4}}"


class TestBasis:
    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_2to2_formulas(self, n):
        a = np.random.default_rng(n).normal(size=(n, n))
        for i, ref in enumerate(formula_2to2(n, a), 1):
            np.testing.assert_allclose(le_op_2to2(i, a), ref, atol=1e-14, err_msg=f"op {i}")

    def test_1to2_and_2to1_formulas(self):
        n = 4
        rng = np.random.default_rng(0)
        x, a = rng.normal(size=n), rng.normal(size=(n, n))
        ones = np.ones((n, n))
        refs = [np.diag(x), x[:, None] * ones, x[None, :] * ones, x.mean() * np.eye(n), x.mean() * ones]
        for i, ref in enumerate(refs, 1):
            np.testing.assert_allclose(le_op_1to2(i, x), ref, atol=1e-15)
        refs = [np.diag(a), a @ np.ones(n) / n, a.T @ np.ones(n) / n,
                np.full(n, a.sum() / n**2), np.full(n, np.trace(a) / n)]
        for i, ref in enumerate(refs, 1):
            np.testing.assert_allclose(le_op_2to1(i, a), ref, atol=1e-15)

    def test_examples(self):
        j = np.ones((3, 3))
        np.testing.assert_array_equal(le_op_2to2(4, j), j)
        a = np.arange(9.0).reshape(3, 3)
        np.testing.assert_allclose(le_op_2to2(10, a), np.full((3, 3), 36 / 9))

    @pytest.mark.parametrize("bad", [0, 16])
    def test_index_range(self, bad):
        with pytest.raises(IndexOutOfRange):
            le_op_2to2(bad, np.eye(2))
        with pytest.raises(IndexError):
            le_op_1to2(6, np.ones(2))

    def test_square_input(self):
        with pytest.raises(DimensionMismatch):
            le_op_2to2(1, np.ones((2, 3)))

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, (5, 5), elements=st.floats(-10, 10)),
           arrays(np.float64, (5, 5), elements=st.floats(-10, 10)), st.floats(-3, 3))
    def test_linearity(self, a, b, c):
        for i in range(1, 16):
            np.testing.assert_allclose(le_op_2to2(i, a + c * b), le_op_2to2(i, a) + c * le_op_2to2(i, b),
                                       atol=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**31 - 1))
    def test_equivariance(self, n, seed):
        rng = np.random.default_rng(seed)
        pm = np.eye(n)[rng.permutation(n)]
        a, x = rng.normal(size=(n, n)), rng.normal(size=n)
        for i in range(1, 16):
            np.testing.assert_allclose(le_op_2to2(i, pm @ a @ pm.T), pm @ le_op_2to2(i, a) @ pm.T, atol=1e-12)
        for i in range(1, 6):
            np.testing.assert_allclose(le_op_1to2(i, pm @ x), pm @ le_op_1to2(i, x) @ pm.T, atol=1e-12)
            np.testing.assert_allclose(le_op_2to1(i, pm @ a @ pm.T), pm @ le_op_2to1(i, a), atol=1e-12)


class TestNorms:
    def test_partition_norm_by_hand(self):
        pn = partition_norm_2(np.eye(4))
        assert pn.diag_part == pytest.approx(1.0) and pn.matrix_part == pytest.approx(0.5)
        assert vector_norm(np.array([3.0, 4.0])) == pytest.approx(5 / np.sqrt(2))

    def test_replicated_diagonal_exceeds_matrix_part(self):
        # op 14 on I is the all-ones matrix, whose matrix part 1 exceeds I's 0.5
        pn = partition_norm_2(le_op_2to2(14, np.eye(4)))
        assert pn.matrix_part == pytest.approx(1.0)
        assert not pn.le(partition_norm_2(np.eye(4)), 1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**31 - 1))
    def test_bounded_by_larger_component(self, n, seed):
        a = np.random.default_rng(seed).normal(size=(n, n))
        bound = partition_norm_2(a).max() + 1e-12
        for i in range(1, 16):
            assert partition_norm_2(le_op_2to2(i, a)).max() <= bound


class TestNetwork:
    def test_zero_model(self):
        layer = IGNLayer(np.zeros((15, 1, 3)), np.zeros(3), np.zeros(3))
        model = IGNModel((layer,), np.zeros((6, 2)))
        np.testing.assert_array_equal(ign_forward(model, np.random.default_rng(0).normal(size=(5, 5))), 0.0)

    def test_identity_layer_mean_head(self):
        coef = np.zeros((15, 1, 1))
        coef[0] = 1.0
        model = IGNModel((IGNLayer(coef, np.zeros(1), np.zeros(1)),), np.array([[1.0], [0.0]]))
        a = np.random.default_rng(1).normal(size=(6, 6))
        assert ign_forward(model, a)[0] == pytest.approx(a.mean())

    def test_layer_matches_basis_sum(self):
        rng = np.random.default_rng(2)
        d_in, d_out, n = 2, 3, 5
        layer = IGNLayer(rng.normal(size=(15, d_in, d_out)), rng.normal(size=d_out), rng.normal(size=d_out))
        x = rng.normal(size=(n, n, d_in))
        ref = np.zeros((n, n, d_out))
        for o in range(d_out):
            for c in range(d_in):
                for i in range(15):
                    ref[:, :, o] += layer.coef[i, c, o] * le_op_2to2(i + 1, x[:, :, c])
            ref[:, :, o] += layer.bias_all[o] + layer.bias_diag[o] * np.eye(n)
        np.testing.assert_allclose(apply_layer(layer, x), ref, atol=1e-12)

    def test_invariance(self):
        model = IGNModel.random(rng=0)
        rng = np.random.default_rng(3)
        a = rng.uniform(size=(9, 9))
        pm = np.eye(9)[rng.permutation(9)]
        np.testing.assert_allclose(ign_forward(model, pm @ a @ pm.T), ign_forward(model, a), atol=1e-10)

    def test_random_shapes(self):
        model = IGNModel.random(depth=5, width=16, rng=0)
        assert model.widths == (1, 16, 16, 16, 16, 16) and model.d_out == 8
        assert ign_forward(model, np.eye(4)).shape == (8,)

    def test_lipschitz_smoke(self):
        model = IGNModel.random(rng=0)
        rng = np.random.default_rng(4)
        a = rng.uniform(size=(10, 10))
        e = rng.normal(size=(10, 10))
        e = 1e-6 * (e + e.T)
        ratio = np.linalg.norm(ign_forward(model, a + e) - ign_forward(model, a)) / np.linalg.norm(e)
        assert np.isfinite(ratio) and ratio < 10.0

    def test_channel_mismatch(self):
        model = IGNModel.random(rng=0)
        with pytest.raises(ChannelMismatch):
            ign_forward(model, np.zeros((3, 3, 2)))
        with pytest.raises(DimensionMismatch):
            ign_forward(model, np.zeros((3, 4)))
