"""Acceptance checks. Each test prints one ``ACCEPTANCE <criterion>: PASS|FAIL`` line."""

import time

import numpy as np
import pytest

from holidet import bench
from holidet.autoperiod import detect_periods
from holidet.changepoint import StopRule, bottom_up
from holidet.series import acf, dft

from oracles import literal_gaussian_cost, naive_acf, naive_dft, reference_bottom_up

DFT_TOL, ACF_TOL = 1e-9, 1e-10
GAIN_TOL = 1e-8
ORACLE_BUDGET_S = 60.0
CASES_BUDGET_S = 30.0
MIN_TRIALS = 100
F_VAR_MIN, RANDOM_MAX = 0.85, 0.30
NOISE_MIN_EMPTY = 95


@pytest.fixture
def verdict(capsys):
    def emit(name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def cases():
    t0 = time.perf_counter()
    res = bench.run_cases(bench.BENCH_SEED)
    return res, time.perf_counter() - t0


def test_period_detection_table(cases, verdict):
    res, secs = cases
    bad = [n for n, r in res.items() if not all(bench.period_checks(r))]
    got = ", ".join(f"{n}:{r.period(0)}/{r.period(1)}" for n, r in res.items())
    verdict("period-detection", not bad and secs < CASES_BUDGET_S,
            f"{got}; failing {bad or 'none'}; {secs:.1f}s")


def test_retrieval_bands_and_ordering(cases, verdict):
    res, _ = cases
    bad = [n for n, r in res.items() if not all(bench.band_checks(r))]
    ordered = bench.ordering_check(res)
    got = ", ".join(f"{n}:" + "/".join(f"{e:.3f}" for e in r.nmae) for n, r in res.items())
    verdict("retrieval-nmae", not bad and ordered,
            f"{got}; out of band {bad or 'none'}; ordering {'holds' if ordered else 'broken'}")


def test_classifier_suite(suite, verdict):
    res = bench.classifier_suite(suite, folds=5, names=("F_var", "N_mean"))
    f, n, r = (res[k]["macro_f1"] for k in ("F_var", "N_mean", "random_0.25"))
    verdict("classifier-suite", f >= F_VAR_MIN and f > n > r and r <= RANDOM_MAX,
            f"F_var {f:.3f}, N_mean {n:.3f}, random {r:.3f}")


def test_oracle_equivalence(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    dft_err = acf_err = 0.0
    for _ in range(100):
        y = rng.normal(size=int(rng.integers(2, 513)))
        dft_err = max(dft_err, float(np.max(np.abs(dft(y).coefficients - naive_dft(y.tolist())))))
        lag = int(rng.integers(0, y.size))
        acf_err = max(acf_err, float(np.max(np.abs(acf(y, lag) - naive_acf(y.tolist(), lag)))))
    mismatched = 0
    for seed in range(50):
        r = np.random.default_rng(10_000 + seed)
        n = int(r.integers(20, 201))
        cuts = np.sort(r.choice(np.arange(1, n), int(r.integers(1, 4)), replace=False))
        y = np.concatenate([r.normal(r.uniform(-3, 3), r.uniform(0.1, 2), size=len(p))
                            for p in np.split(np.arange(n), cuts)])
        thr = float(r.uniform(0, 40))
        seg, trail = bottom_up(y, "gaussian", 10, StopRule.max_cost(thr))
        bps, ref = reference_bottom_up(y.tolist(), 10, literal_gaussian_cost, threshold=thr)
        same = ([t.removed_index for t in trail] == [i for i, _ in ref]
                and list(seg.breakpoints) == bps
                and all(abs(t.merge_gain - g) <= GAIN_TOL * max(1.0, abs(g)) for t, (_, g) in zip(trail, ref)))
        mismatched += not same
    secs = time.perf_counter() - t0
    verdict("oracle-equivalence",
            dft_err <= DFT_TOL and acf_err <= ACF_TOL and mismatched == 0 and secs < ORACLE_BUDGET_S,
            f"dft max err {dft_err:.1e}, acf max err {acf_err:.1e}, "
            f"bottom-up mismatches {mismatched}/50, {secs:.1f}s")


def _property_tests():
    import test_autoperiod
    import test_occupancy
    import test_properties
    import test_spikes
    return {
        "additive-closure": (test_spikes, "test_additive_closure"),
        "permutation-determinism": (test_autoperiod, "test_deterministic_per_seed"),
        "scale-covariance": (test_occupancy, "test_scale_covariance"),
        "pipeline-scale-covariance": (test_properties, "test_labels_invariant_to_power_of_two_scaling"),
        "merged-3-day-minimum": (test_occupancy, "test_intervals_disjoint_sorted_and_long"),
        "pipeline-3-day-minimum": (test_properties, "test_intervals_are_long_sorted_and_on_holiday_windows"),
        "json-byte-determinism": (test_properties, "test_report_bytes_are_deterministic"),
    }


def test_property_suites(verdict):
    lines, ok = [], True
    for name, (owner, attr) in _property_tests().items():
        fn = getattr(owner, attr)
        inner = fn.hypothesis.inner_test
        calls = []

        def counted(*a, _inner=inner, **kw):
            calls.append(1)
            return _inner(*a, **kw)

        fn.hypothesis.inner_test = counted
        try:
            fn()
            passed = len(calls) >= MIN_TRIALS
        except Exception:  # noqa: BLE001 - any failure of the property counts
            passed = False
        finally:
            fn.hypothesis.inner_test = inner
        ok &= passed
        lines.append(f"{name} {len(calls)} trials {'ok' if passed else 'FAILED'}")
    verdict("property-suites", ok, "; ".join(lines))


def test_white_noise_control(verdict):
    empty = sum(not detect_periods(np.random.default_rng(s).normal(size=1440)) for s in range(100))
    verdict("white-noise", empty >= NOISE_MIN_EMPTY, f"{empty}/100 noise windows without periods")
