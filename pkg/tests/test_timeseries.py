import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadgc.errors import ConfigError, DegenerateSeries, ShapeError
from dyadgc.timeseries import BinaryMask, TimeSeries, median_filter, pearson, shift, standardize

from oracles import oracle_majority_filter, oracle_pearson


def ts(values, start=0):
    return TimeSeries(np.asarray(values, dtype=float), start)


class TestTimeSeries:
    def test_rejects_nan(self):
        with pytest.raises(ShapeError):
            TimeSeries(np.array([1.0, np.nan]))

    def test_rejects_negative_start(self):
        with pytest.raises(ShapeError):
            TimeSeries(np.array([1.0]), start_frame=-1)

    def test_immutable_values(self):
        t = ts([1, 2, 3])
        with pytest.raises(ValueError):
            t.values[0] = 9.0

    def test_slice_frames(self):
        t = ts([1, 2, 3, 4, 5], start=10)
        s = t.slice_frames(11, 13)
        assert s.start_frame == 11
        assert list(s.values) == [2, 3, 4]
        with pytest.raises(ShapeError):
            t.slice_frames(9, 12)


class TestStandardize:
    def test_three_point_example(self):
        # population-std scaling: [1,2,3] -> +-sqrt(3/2)
        out = standardize(ts([1, 2, 3]))
        np.testing.assert_allclose(out.values, [-1.2247448714, 0.0, 1.2247448714], atol=1e-9)
        assert abs(out.values.mean()) < 1e-10
        assert abs(np.std(out.values) - 1.0) < 1e-10

    def test_constant_clamped_to_zeros(self):
        out = standardize(ts([5, 5, 5, 5]))
        assert np.array_equal(out.values, np.zeros(4))

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        x = ts(rng.normal(3.0, 2.5, 400))
        once = standardize(x)
        twice = standardize(once)
        np.testing.assert_allclose(once.values, twice.values, atol=1e-9)

    def test_too_short(self):
        with pytest.raises(DegenerateSeries):
            standardize(ts([1.0]))


class TestPearson:
    def test_self_correlation(self):
        x = ts([1, 2, 4, 3])
        assert pearson(x, x) == pytest.approx(1.0)

    def test_sign_flip(self):
        x = ts([1, 2, 4, 3])
        y = ts([-1, -2, -4, -3])
        assert pearson(x, y) == pytest.approx(-1.0)

    def test_direct_formula(self):
        x = ts([1, 2, 3, 4])
        y = ts([2, 4, 6, 8.5])
        assert pearson(x, y) == pytest.approx(oracle_pearson(x.values, y.values), abs=1e-12)

    def test_constant_is_zero(self):
        assert pearson(ts([1, 1, 1]), ts([1, 2, 3])) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            pearson(ts([1, 2]), ts([1, 2, 3]))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_symmetry_and_bound(self, seed):
        rng = np.random.default_rng(seed)
        x = ts(rng.normal(size=25))
        y = ts(rng.normal(size=25))
        r = pearson(x, y)
        assert r == pearson(y, x)
        assert abs(r) <= 1 + 1e-12

    @given(
        st.integers(0, 2**32 - 1),
        st.floats(0.01, 100.0),
        st.floats(-50.0, 50.0),
    )
    @settings(max_examples=30, deadline=None)
    def test_positive_affine_invariance(self, seed, scale, offset):
        rng = np.random.default_rng(seed)
        xv = rng.normal(size=30)
        y = ts(rng.normal(size=30))
        r1 = pearson(ts(xv), y)
        r2 = pearson(ts(scale * xv + offset), y)
        assert r1 == pytest.approx(r2, abs=1e-9)


class TestMedianFilter:
    def test_all_true_unchanged(self):
        m = BinaryMask(np.ones(200, dtype=bool))
        out = median_filter(m, 51)
        assert out.bits.all()

    def test_isolated_bit_removed(self):
        bits = np.zeros(9, dtype=bool)
        bits[4] = True
        out = median_filter(BinaryMask(bits), 3)
        assert not out.bits.any()

    def test_even_kernel_rejected(self):
        with pytest.raises(ConfigError):
            median_filter(BinaryMask(np.ones(5, dtype=bool)), 4)

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_windowed_majority_oracle(self, seed):
        rng = np.random.default_rng(seed)
        bits = rng.random(60) < 0.5
        out = median_filter(BinaryMask(bits), 5)
        assert np.array_equal(out.bits, oracle_majority_filter(bits, 5))

    def test_idempotent_kernel3_without_short_runs(self):
        # runs of length >= 2 everywhere
        bits = np.array([1, 1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1], dtype=bool)
        once = median_filter(BinaryMask(bits), 3)
        twice = median_filter(once, 3)
        assert np.array_equal(once.bits, twice.bits)


class TestShift:
    def test_zero_is_identity(self):
        x = ts([1, 2, 3, 4])
        assert shift(x, 0) is x

    def test_alignment_bookkeeping(self):
        x = ts([1, 2, 3, 4], start=0)
        delayed = shift(x, 1)
        assert delayed.start_frame == 1
        assert list(delayed.values) == [1, 2, 3]
        # aligned overlap against the unshifted series: (1,2), (2,3), (3,4)
        pairs = [
            (delayed.values[k], x.values[delayed.start_frame - x.start_frame + k])
            for k in range(len(delayed))
        ]
        assert pairs == [(1, 2), (2, 3), (3, 4)]

    def test_round_trip_restores_overlap(self):
        # each trim cuts |s| frames, so the round trip is x on [start+s, end-s]
        x = ts(list(range(10)), start=0)
        back = shift(shift(x, 3), -3)
        assert back.start_frame == 3
        assert list(back.values) == [3, 4, 5, 6]
        np.testing.assert_array_equal(back.values, x.slice_frames(3, 6).values)

    def test_shift_too_large(self):
        with pytest.raises(ShapeError):
            shift(ts([1, 2, 3]), 3)
