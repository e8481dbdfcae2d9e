"""Period detection: periodogram candidates checked against the autocorrelation.

Candidates are periodogram bins whose power beats a permutation threshold;
each is then confirmed (or not) by a two-line "hill" fit on the
autocorrelation around the candidate lag.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import RangeError, WindowTooShortError
from .series import acf, periodogram, values_of

MIN_SAMPLES = 96


@dataclass(frozen=True)
class PeriodCandidate:
    frequency_bin: int
    period_samples: float
    power: float
    validated: bool = False
    refined_period: int | None = None


@dataclass(frozen=True)
class PermutationThreshold:
    value: float
    n_permutations: int = 100
    seed: int = 0


@dataclass(frozen=True)
class AutoPeriodConfig:
    """Knobs of :func:`detect_periods`.

    ``half_width_fraction`` / ``min_half_width`` size the hill-test window,
    ``acf_z`` (in units of ``1/sqrt(T)``) and ``min_correlation`` are floors
    on the normalised autocorrelation at the split lag. ``dedup_tolerance``
    merges near-equal periods and, with ``drop_multiples``, drops periods
    that sit within that tolerance (relative to the shorter period) of a
    whole multiple of a shorter kept one.
    """

    n_permutations: int = 100
    seed: int = 0
    half_width_fraction: float = 0.2
    min_half_width: int = 2
    acf_z: float = 3.0
    min_correlation: float = 0.0
    dedup_tolerance: float = 0.05
    drop_multiples: bool = True
    min_samples: int = MIN_SAMPLES


def _max_nondc_power(y: np.ndarray) -> float:
    p = periodogram(y).powers
    return float(p[1:].max()) if p.size > 1 else 0.0


def permutation_maxima(series, n_permutations: int = 100, seed: int = 0) -> np.ndarray:
    """Largest non-DC periodogram power of each shuffled copy of ``series``.

    Permutation ``i`` draws from its own generator seeded with ``(seed, i)``,
    so the pool for ``n`` permutations is a prefix of the pool for ``n + 1``.
    """
    y = values_of(series)
    out = np.empty(n_permutations)
    for i in range(n_permutations):
        rng = np.random.default_rng([seed, i])
        out[i] = _max_nondc_power(rng.permutation(y))
    return out


def permutation_threshold(series, n_permutations: int = 100, seed: int = 0) -> PermutationThreshold:
    """Second-highest of the per-permutation maximum powers."""
    y = values_of(series)
    if y.size < 4:
        raise WindowTooShortError("permutation threshold needs at least 4 samples")
    if n_permutations < 2:
        raise ValueError("n_permutations must be >= 2")
    maxima = np.sort(permutation_maxima(y, n_permutations, seed))
    return PermutationThreshold(float(maxima[-2]), n_permutations, seed)


def candidate_periods(series, threshold: PermutationThreshold) -> list[PeriodCandidate]:
    """Non-DC bins with power strictly above the threshold, strongest first."""
    y = values_of(series)
    n = y.size
    powers = periodogram(y).powers
    # bins above n/2 mirror the ones below; keep the lower half only
    ks = np.arange(1, n // 2 + 1)
    hits = ks[powers[ks] > threshold.value]
    order = sorted(hits, key=lambda k: (-powers[k], k))
    return [PeriodCandidate(int(k), n / k, float(powers[k])) for k in order]


def half_width(period: float, config: AutoPeriodConfig = AutoPeriodConfig()) -> int:
    return max(config.min_half_width, int(round(config.half_width_fraction * period)))


def _line_sse(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and residual sum of squares of ``y`` on ``x``."""
    xm = x - x.mean()
    ym = y - y.mean()
    sxx = float(np.dot(xm, xm))
    slope = float(np.dot(xm, ym)) / sxx
    resid = ym - slope * xm
    return slope, float(np.dot(resid, resid))


def hill_split(lags: np.ndarray, values: np.ndarray) -> tuple[int, float, float]:
    """Best two-segment linear fit; returns (split position, left slope, right slope).

    Both segments include the split point and hold at least two points.
    Ties go to the earliest split.
    """
    best = None
    for s in range(1, lags.size - 1):
        ls, le = _line_sse(lags[: s + 1], values[: s + 1])
        rs, re = _line_sse(lags[s:], values[s:])
        total = le + re
        if best is None or total < best[0]:
            best = (total, s, ls, rs)
    _, s, ls, rs = best
    return s, ls, rs


def validate_on_acf(series, candidate: PeriodCandidate, window_half_width: int | None = None,
                    config: AutoPeriodConfig = AutoPeriodConfig(),
                    acf_values: np.ndarray | None = None) -> PeriodCandidate:
    """Check that the candidate period sits on an autocorrelation hill.

    The autocorrelation of the mean-removed series is fitted with two lines
    over lags ``[p - w, p + w]``. The candidate holds when the left line
    rises, the right line falls, and the value at the split lag is above both
    the window mean and ``max(acf_z / sqrt(T), min_correlation)`` times the
    lag-0 value. The
    refined period is the autocorrelation peak reached by climbing from the
    split lag.

    Raises
    ------
    RangeError
        If ``p + w`` reaches ``T / 2``.
    """
    y = values_of(series)
    n = y.size
    p = int(round(candidate.period_samples))
    w = half_width(candidate.period_samples, config) if window_half_width is None else window_half_width
    if p + w >= n / 2 or p - w < 1:
        raise RangeError(f"hill window [{p - w}, {p + w}] outside the usable lag range")
    if acf_values is None:
        acf_values = acf(y - y.mean(), n // 2)
    lags = np.arange(p - w, p + w + 1)
    vals = acf_values[lags]
    s, left, right = hill_split(lags.astype(float), vals)
    peak = vals[s]
    floor = max(config.acf_z / np.sqrt(n), config.min_correlation) * acf_values[0]
    ok = bool(left > 0 and right < 0 and peak > vals.mean() and peak > floor)
    if not ok:
        return replace(candidate, validated=False, refined_period=None)
    # climb from the split lag to the top of the hill
    while 0 < s and vals[s - 1] > vals[s]:
        s -= 1
    while s < vals.size - 1 and vals[s + 1] > vals[s]:
        s += 1
    return replace(candidate, validated=True, refined_period=int(lags[s]))


def detect_periods_detailed(series, config: AutoPeriodConfig = AutoPeriodConfig()):
    """Like :func:`detect_periods` but also returns the threshold and every candidate."""
    y = values_of(series)
    n = y.size
    if n < config.min_samples:
        raise WindowTooShortError(f"period detection needs >= {config.min_samples} samples, got {n}")
    thr = permutation_threshold(y, config.n_permutations, config.seed)
    cands = candidate_periods(y, thr)
    centered_acf = acf(y - y.mean(), n // 2) if cands else None
    checked = []
    for cand in cands:
        try:
            checked.append(validate_on_acf(y, cand, config=config, acf_values=centered_acf))
        except RangeError:
            checked.append(cand)
    kept: list[PeriodCandidate] = []
    for cand in checked:  # already strongest first
        if not cand.validated:
            continue
        if any(abs(cand.refined_period - k.refined_period) <= config.dedup_tolerance * k.refined_period
               for k in kept):
            continue
        kept.append(cand)
    if config.drop_multiples:
        kept = [c for c in kept if not any(
            k.refined_period < c.refined_period
            and _near_multiple(c.refined_period, k.refined_period, config.dedup_tolerance)
            for k in kept)]
    return kept, thr, checked


def _near_multiple(p: float, q: float, tol: float) -> bool:
    """True when ``p`` lies within ``tol * q`` of ``n * q`` for some ``n >= 2``."""
    n = round(p / q)
    return n >= 2 and abs(p - n * q) <= tol * q


def detect_periods(series, config: AutoPeriodConfig = AutoPeriodConfig()) -> list[int]:
    """Validated periods (in samples), strongest periodogram power first.

    Periods within ``dedup_tolerance`` of a stronger one are dropped.
    """
    kept, _, _ = detect_periods_detailed(series, config)
    return [c.refined_period for c in kept]
