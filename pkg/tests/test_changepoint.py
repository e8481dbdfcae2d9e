import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holidet.changepoint import (VARIANCE_FLOOR, StopRule, bottom_up, cost_gaussian, cost_l2,
                                 regular_grid, zscore)
from holidet.errors import ConfigError, DegenerateWindowError, InsufficientDataError

from oracles import literal_gaussian_cost, literal_l2_cost, reference_bottom_up


class TestCosts:
    def test_l2_hand_values(self):
        assert cost_l2(np.full(10, 3.0)) == 0.0
        assert cost_l2([0.0, 2.0], (0, 2)) == 2.0

    def test_gaussian_identity(self, rng):
        y = rng.normal(0, 2, 50)
        s2 = np.var(y)
        assert math.isclose(cost_gaussian(y), 50 * math.log(s2) + 50, rel_tol=1e-12)

    def test_gaussian_constant_window_hits_floor(self):
        assert cost_gaussian(np.full(20, 7.0)) == 20 * math.log(VARIANCE_FLOOR)

    def test_gaussian_needs_two_samples(self):
        with pytest.raises(DegenerateWindowError):
            cost_gaussian([1.0, 2.0, 3.0], (1, 2))

    def test_costs_vs_literal_oracles(self, rng):
        for _ in range(50):
            y = rng.normal(rng.uniform(-5, 5), rng.uniform(0.01, 3), rng.integers(2, 300))
            assert math.isclose(cost_l2(y), literal_l2_cost(y.tolist()), rel_tol=1e-10, abs_tol=1e-12)
            ref = literal_gaussian_cost(y.tolist())
            assert abs(cost_gaussian(y) - ref) <= 1e-9 * abs(ref) + 1e-12

    @given(arrays(float, st.integers(2, 200), elements=st.floats(-100, 100)), st.floats(-1e3, 1e3))
    def test_l2_translation_invariant(self, y, c):
        base = cost_l2(y)
        assert abs(cost_l2(y + c) - base) <= 1e-9 * max(base, 1.0)

    def test_unknown_cost(self):
        with pytest.raises(ConfigError):
            bottom_up(np.zeros(100), cost="poisson", grid_size=10)


class TestStopRule:
    def test_exactly_one(self):
        with pytest.raises(ConfigError):
            StopRule()
        with pytest.raises(ConfigError):
            StopRule(threshold=1.0, n_windows=2)
        with pytest.raises(ConfigError):
            StopRule.count(0)


class TestBottomUp:
    def test_grid_last_cell_absorbs_remainder(self):
        assert regular_grid(35, 10) == [0, 10, 20, 35]
        assert regular_grid(30, 10) == [0, 10, 20, 30]

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            bottom_up(np.zeros(19), grid_size=10)

    def test_homogeneous_noise_collapses(self, rng):
        seg, trail = bottom_up(rng.normal(size=1000), grid_size=50, stop=StopRule.max_cost(1e9))
        assert seg.breakpoints == (0, 1000)
        assert len(trail) == 1000 // 50 - 1

    def test_step_signal_l2(self, rng):
        y = np.r_[rng.normal(0, 1, 500), rng.normal(10, 1, 500)]
        seg, _ = bottom_up(y, "l2", 50, StopRule.count(2))
        assert seg.breakpoints == (0, 500, 1000)

    def test_step_signal_matches_exhaustive_scan(self, rng):
        y = np.r_[rng.normal(0, 1, 500), rng.normal(10, 1, 500)]
        best = min(range(50, 1000, 50), key=lambda b: cost_l2(y[:b]) + cost_l2(y[b:]))
        seg, _ = bottom_up(y, "l2", 50, StopRule.count(2))
        assert seg.breakpoints[1] == best

    def test_variance_change_gaussian(self, rng):
        y = np.r_[rng.normal(0, 0.1, 430), rng.normal(0, 2.0, 570)]
        scan = min(range(50, 1000, 50), key=lambda b: cost_gaussian(y[:b]) + cost_gaussian(y[b:]))
        seg, _ = bottom_up(y, "gaussian", 50, StopRule.count(2))
        assert abs(seg.breakpoints[1] - 430) <= 50
        assert abs(scan - 430) <= 50

    @pytest.mark.parametrize("n", [1, 2, 5, 9])
    def test_count_rule_exact(self, rng, n):
        y = rng.normal(size=500)
        seg, _ = bottom_up(y, "l2", 50, StopRule.count(n))
        assert seg.n_windows == n

    def test_windows_tile_and_respect_grid(self, rng):
        y = np.r_[rng.normal(0, 1, 333), rng.normal(5, 3, 400), rng.normal(0, 0.2, 290)]
        seg, _ = bottom_up(y, "gaussian", 40, StopRule.max_cost(30.0))
        wins = seg.windows()
        assert wins[0].a == 0 and wins[-1].b == len(y)
        assert all(w.b == v.a for w, v in zip(wins, wins[1:]))
        assert all(w.b - w.a >= 40 for w in wins)
        ids = seg.window_ids()
        assert ids[0] == 0 and ids[-1] == seg.n_windows - 1 and np.all(np.diff(ids) >= 0)

    def test_trail_gains_below_threshold_and_deterministic(self, rng):
        y = np.r_[rng.normal(0, 1, 600), rng.normal(0, 4, 600)]
        a = bottom_up(zscore(y), grid_size=48, stop=StopRule.max_cost(250.0))
        b = bottom_up(zscore(y), grid_size=48, stop=StopRule.max_cost(250.0))
        assert a == b
        assert all(r.merge_gain <= 250.0 for r in a[1])
        assert [r.step for r in a[1]] == list(range(len(a[1])))

    def test_ties_go_to_lowest_index(self):
        # a periodic signal makes every merge gain equal
        y = np.tile([0.0, 1.0], 50)
        _, trail = bottom_up(y, "l2", 10, StopRule.count(9))
        assert trail[0].removed_index == 10

    def test_matches_reference_implementation(self):
        for seed in range(50):
            r = np.random.default_rng(seed)
            n = int(r.integers(20, 201))
            k = int(r.integers(1, 4))
            cuts = np.sort(r.choice(np.arange(1, n), k, replace=False))
            y = np.concatenate([r.normal(r.uniform(-3, 3), r.uniform(0.1, 2), size=len(p))
                                for p in np.split(np.arange(n), cuts)])
            thr = float(r.uniform(0, 40))
            seg, trail = bottom_up(y, "gaussian", 10, StopRule.max_cost(thr))
            bps, ref = reference_bottom_up(y.tolist(), 10, literal_gaussian_cost, threshold=thr)
            assert [t.removed_index for t in trail] == [i for i, _ in ref]
            for t, (_, g) in zip(trail, ref):
                assert abs(t.merge_gain - g) <= 1e-8 * max(1.0, abs(g))
            assert list(seg.breakpoints) == bps


def test_zscore():
    z = zscore([1.0, 2.0, 3.0, 4.0])
    assert abs(z.mean()) < 1e-15 and abs(z.std() - 1) < 1e-12
    assert zscore([2.0, 2.0]).tolist() == [0.0, 0.0]
