import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from compnet.matrices import (
    BinaryBipartite,
    CountMatrix,
    binarize,
    compute_rca,
    default_ids,
    density,
    log_transform,
    rca_histogram,
)

weights = arrays(
    np.float64,
    st.tuples(st.integers(1, 6), st.integers(1, 6)),
    elements=st.one_of(st.just(0.0), st.floats(1e-3, 1e6)),
)


def counts_of(W, **kw):
    W = np.asarray(W, dtype=np.float64)
    return CountMatrix(*default_ids(*W.shape), W, **kw)


class TestCountMatrix:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            counts_of([[1.0, -2.0]])

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            counts_of([[np.nan]])

    def test_rejects_duplicate_ids(self):
        with pytest.raises(ValueError):
            CountMatrix(("a", "a"), ("x",), np.ones((2, 1)))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            CountMatrix(("a",), ("x", "y"), np.ones((2, 2)))

    def test_array_is_read_only(self):
        cm = counts_of([[1.0, 2.0]])
        with pytest.raises(ValueError):
            cm.W[0, 0] = 5.0


class TestLogTransform:
    def test_zero_stays_zero(self):
        out = log_transform(counts_of([[0.0, 3.0]]))
        assert out.W[0, 0] == 0.0

    def test_e_minus_one_maps_to_one(self):
        out = log_transform(counts_of([[np.e - 1.0]]))
        assert out.W[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_nine_maps_to_ln_ten(self):
        out = log_transform(counts_of([[9.0]]))
        assert out.W[0, 0] == pytest.approx(np.log(10.0), abs=1e-12)

    def test_identifiers_preserved(self):
        cm = CountMatrix(("nor", "swe"), ("fish", "ore"), np.ones((2, 2)), layer="trade", year=1999)
        out = log_transform(cm)
        assert out.rows == cm.rows and out.cols == cm.cols
        assert out.layer == "trade" and out.year == 1999

    @given(weights)
    def test_preserves_zero_pattern_and_order(self, W):
        out = log_transform(counts_of(W)).W
        assert ((out == 0) == (W == 0)).all()
        flat_in, flat_out = W.ravel(), out.ravel()
        for i in range(len(flat_in)):
            for j in range(len(flat_in)):
                if flat_in[i] < flat_in[j]:
                    assert flat_out[i] < flat_out[j]


class TestComputeRca:
    def test_uniform_gives_ones(self):
        R = compute_rca(counts_of(np.full((3, 4), 7.0))).R
        np.testing.assert_allclose(R, 1.0)

    def test_hand_worked_two_by_two(self):
        R = compute_rca(counts_of([[2.0, 0.0], [0.0, 1.0]])).R
        np.testing.assert_allclose(R, [[1.5, 0.0], [0.0, 3.0]])

    def test_single_nonzero_entry(self):
        W = np.zeros((3, 3))
        W[1, 2] = 5.0
        R = compute_rca(counts_of(W)).R
        assert R[1, 2] == 1.0
        assert R.sum() == 1.0

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            compute_rca(counts_of(np.zeros((2, 2))))

    def test_zero_row_and_column_give_zero(self):
        W = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 0.0], [3.0, 1.0, 0.0]])
        R = compute_rca(counts_of(W)).R
        assert (R[1, :] == 0).all()
        assert (R[:, 2] == 0).all()
        assert np.isfinite(R).all()

    @given(weights)
    def test_weighted_mean_identity(self, W):
        if W.sum() == 0:
            return
        R = compute_rca(counts_of(W)).R
        g = W.sum(axis=0) / W.sum()
        for i in range(W.shape[0]):
            if W[i].sum() > 0:
                assert (R[i] * g).sum() == pytest.approx(1.0, rel=1e-9)

    @given(weights, st.floats(1e-3, 1e3))
    def test_scale_invariance(self, W, c):
        if W.sum() == 0:
            return
        R1 = compute_rca(counts_of(W)).R
        R2 = compute_rca(counts_of(c * W)).R
        np.testing.assert_allclose(R1, R2, rtol=1e-12, atol=1e-12)


class TestBinarize:
    def test_uniform_ones_at_threshold_one(self):
        rca = compute_rca(counts_of(np.full((2, 3), 4.0)))
        assert binarize(rca, 1.0).M.all()

    def test_hand_worked_binarization(self):
        rca = compute_rca(counts_of([[2.0, 0.0], [0.0, 1.0]]))
        np.testing.assert_array_equal(binarize(rca, 1.0).M, np.eye(2, dtype=np.int8))

    def test_high_threshold_empties_matrix(self):
        rca = compute_rca(counts_of([[2.0, 0.0], [0.0, 1.0]]))
        assert binarize(rca, 10.0).M.sum() == 0

    def test_nonpositive_threshold_rejected(self):
        rca = compute_rca(counts_of([[1.0, 2.0]]))
        with pytest.raises(ValueError):
            binarize(rca, 0.0)

    def test_degrees_derived(self):
        b = binarize(compute_rca(counts_of([[2.0, 0.0], [0.0, 1.0]])))
        np.testing.assert_array_equal(b.k_rows, [1, 1])
        np.testing.assert_array_equal(b.k_cols, [1, 1])

    @given(weights, st.floats(0.1, 5.0), st.floats(0.1, 5.0))
    def test_monotone_in_threshold(self, W, t1, t2):
        if W.sum() == 0:
            return
        lo, hi = sorted((t1, t2))
        rca = compute_rca(counts_of(W))
        wide, narrow = binarize(rca, lo).M, binarize(rca, hi).M
        assert (narrow <= wide).all()
        assert density(narrow) <= density(wide)


class TestDensity:
    def test_full(self):
        assert density(np.ones((3, 4), dtype=np.int8)) == 1.0

    def test_empty(self):
        assert density(np.zeros((3, 4), dtype=np.int8)) == 0.0

    def test_half(self):
        M = np.zeros((3, 4), dtype=np.int8)
        M.ravel()[:6] = 1
        assert density(M) == 0.5


class TestRcaHistogram:
    def test_all_ones_single_bin(self):
        R = compute_rca(counts_of(np.full((3, 4), 2.0))).R
        np.testing.assert_array_equal(rca_histogram(R, [0.5, 1.5]), [12])

    def test_zeros_excluded(self):
        R = compute_rca(counts_of([[2.0, 0.0], [0.0, 1.0]])).R
        np.testing.assert_array_equal(rca_histogram(R, [1.0, 2.0, 4.0]), [1, 1])

    def test_trailing_empty_bins(self):
        R = compute_rca(counts_of([[2.0, 0.0], [0.0, 1.0]])).R
        np.testing.assert_array_equal(rca_histogram(R, [1.0, 2.0, 4.0, 8.0, 16.0]), [1, 1, 0, 0])

    def test_too_few_edges_rejected(self):
        with pytest.raises(ValueError):
            rca_histogram(np.ones((2, 2)), [1.0])

    def test_non_increasing_edges_rejected(self):
        with pytest.raises(ValueError):
            rca_histogram(np.ones((2, 2)), [1.0, 1.0, 2.0])


def test_default_ids_unique_and_sized():
    rows, cols = default_ids(12, 3)
    assert len(rows) == 12 and len(set(rows)) == 12
    assert len(cols) == 3 and len(set(cols)) == 3


def test_binary_bipartite_rejects_non_binary():
    with pytest.raises(ValueError):
        BinaryBipartite(("a",), ("x",), np.array([[2]]))
