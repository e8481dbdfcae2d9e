from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holidet.errors import InputError, RangeError
from holidet.series import Subrange, TimeSeries, acf, dft, mean, periodogram, variance

from oracles import naive_acf, naive_dft, two_pass_variance

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestTimeSeries:
    def test_defaults_and_mask(self):
        ts = TimeSeries([1.0, 2.0, 3.0])
        assert len(ts) == 3
        assert ts.valid_mask.all()
        assert ts.samples_per_day == 48

    def test_time_arithmetic(self):
        ts = TimeSeries(np.zeros(10), start_time=datetime(2022, 3, 1))
        assert ts.time_at(3) == datetime(2022, 3, 1, 1, 30)
        assert ts.index_of(datetime(2022, 3, 1, 2)) == 4

    def test_slice_keeps_time_and_mask(self):
        ts = TimeSeries(np.arange(6.0), valid_mask=[1, 1, 0, 1, 1, 1])
        s = ts.slice(2, 5)
        assert s.values.tolist() == [2.0, 3.0, 4.0]
        assert s.valid_mask.tolist() == [False, True, True]
        assert s.start_time == ts.time_at(2)

    @pytest.mark.parametrize("bad", [[], [1.0, np.nan], [np.inf]])
    def test_rejects_empty_or_nonfinite(self, bad):
        with pytest.raises(InputError):
            TimeSeries(bad)

    def test_rejects_mask_mismatch_and_bad_period(self):
        with pytest.raises(InputError):
            TimeSeries([1.0, 2.0], valid_mask=[True])
        with pytest.raises(InputError):
            TimeSeries([1.0], sampling_period=timedelta(0))

    def test_values_are_read_only(self):
        ts = TimeSeries([1.0, 2.0])
        with pytest.raises(ValueError):
            ts.values[0] = 5.0


class TestMeanVariance:
    def test_constant(self):
        ts = TimeSeries(np.full(37, 5.0))
        assert mean(ts, Subrange(3, 30)) == 5.0
        assert variance(ts, (0, 37)) == 0.0

    def test_hand_values(self):
        assert mean([1, 2, 3, 4], (0, 4)) == 2.5
        assert variance([0, 2], (0, 2)) == 1.0

    def test_mean_vs_summation_oracle(self, rng):
        y = rng.uniform(0, 1, 1000)
        assert abs(mean(y) - sum(y.tolist()) / 1000) <= 1e-12

    def test_variance_vs_two_pass_oracle(self, rng):
        for _ in range(20):
            y = rng.normal(rng.uniform(-100, 100), rng.uniform(0.1, 10), rng.integers(2, 500))
            ref = two_pass_variance(y.tolist())
            assert abs(variance(y) - ref) <= 1e-10 * ref

    @pytest.mark.parametrize("rng_", [(0, 0), (2, 1), (-1, 2), (0, 5)])
    def test_bad_range(self, rng_):
        with pytest.raises(RangeError):
            mean([1.0, 2.0, 3.0], rng_)

    @given(arrays(float, st.integers(2, 200), elements=finite), st.data())
    def test_range_equals_subsequence(self, y, data):
        a = data.draw(st.integers(0, y.size - 1))
        b = data.draw(st.integers(a + 1, y.size))
        assert mean(y, (a, b)) == mean(y[a:b])
        assert variance(y, (a, b)) == variance(y[a:b])
        assert variance(y, (a, b)) >= 0


class TestSpectrum:
    def test_zero_series(self):
        assert not dft(np.zeros(16)).coefficients.any()
        assert not periodogram(np.zeros(16)).powers.any()
        assert not acf(np.zeros(16), 8).any()

    def test_single_tone(self):
        y = np.cos(2 * np.pi * np.arange(64) / 16)
        p = periodogram(y).powers
        assert set(np.flatnonzero(p > 1e-9 * p.max())) == {4, 60}
        assert int(np.argmax(p[1:])) + 1 == 4

    def test_frequencies(self):
        assert periodogram(np.ones(8)).frequencies.tolist() == [k / 8 for k in range(8)]

    def test_dft_oracle(self, rng):
        for _ in range(10):
            y = rng.normal(size=rng.integers(1, 200))
            assert np.max(np.abs(dft(y).coefficients - naive_dft(y.tolist()))) <= 1e-9

    def test_acf_oracle_and_lag0(self, rng):
        for _ in range(10):
            y = rng.normal(size=rng.integers(2, 200))
            lag = int(rng.integers(0, y.size))
            out = acf(y, lag)
            assert np.max(np.abs(out - naive_acf(y.tolist(), lag))) <= 1e-10
            assert abs(out[0] - np.dot(y, y) / y.size) <= 1e-12 * max(1.0, out[0])

    def test_acf_bad_lag(self):
        with pytest.raises(RangeError):
            acf(np.ones(5), 5)

    @given(arrays(float, st.integers(1, 4096), elements=st.floats(-1e3, 1e3)))
    def test_parseval_and_symmetry(self, y):
        p = periodogram(y).powers
        energy = float(np.dot(y, y))
        assert abs(p.sum() - y.size * energy) <= 1e-9 * max(y.size * energy, 1e-300)
        k = np.arange(1, y.size)
        np.testing.assert_allclose(p[k], p[y.size - k], rtol=1e-9, atol=1e-9 * max(p.max(), 1e-300))

    @given(arrays(float, st.integers(2, 300), elements=st.floats(0, 1e3)))
    def test_acf_peaks_at_zero_for_nonnegative(self, y):
        r = acf(y, y.size - 1)
        assert np.all(r <= r[0] * (1 + 1e-12) + 1e-12)
