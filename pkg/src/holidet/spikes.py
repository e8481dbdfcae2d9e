"""Spike detection and periodic spike retrieval.

The extraction loop alternates period detection and spike retrieval on the
running residue, peeling off one periodic component per pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import find_peaks
from scipy.stats import gaussian_kde

from .autoperiod import AutoPeriodConfig, detect_periods_detailed
from .errors import ConfigError, ConsistencyError, NoSpikesError, WindowTooShortError
from .series import TimeSeries, values_of

DEFAULT_MAX_ERROR = 2
DEFAULT_MAX_ITERATIONS = 4
DEFAULT_MIN_ENERGY_RATIO = 0.05
KDE_GRID_POINTS = 1024
MODE_PROMINENCE = 0.02  # fraction of the peak density


@dataclass(frozen=True)
class Spike:
    start: int
    end: int  # exclusive
    peak: float
    mean_above_baseline: float
    baseline: float

    @property
    def width(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class RetrievalParams:
    period: float
    max_error: int = DEFAULT_MAX_ERROR

    def __post_init__(self):
        if self.period < 2:
            raise ConfigError(f"period must be >= 2, got {self.period}")
        if not 0 <= self.max_error < self.period / 2:
            raise ConfigError(f"max_error must lie in [0, period/2), got {self.max_error}")


@dataclass(frozen=True, eq=False)
class ExtractionResult:
    component: TimeSeries
    residue: TimeSeries
    selected_spikes: list[Spike]
    period: float
    threshold: float = math.nan
    retrieval_period: float = math.nan


@dataclass(frozen=True)
class ExtractionConfig:
    autoperiod: AutoPeriodConfig = field(default_factory=AutoPeriodConfig)
    max_error: int = DEFAULT_MAX_ERROR
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    min_energy_ratio: float = DEFAULT_MIN_ENERGY_RATIO


def kde_threshold(series) -> float:
    """Spike threshold from the density of the sample values.

    A Gaussian KDE (Silverman bandwidth) is evaluated on a regular grid.
    Of the two tallest density modes, the upper one is taken as the spike
    level; the threshold is the density minimum between it and the next mode
    below it. With a single mode, ``mean + 2 * std`` is returned instead.

    Raises
    ------
    NoSpikesError
        For constant input.
    """
    y = values_of(series)
    if y.size < 16:
        raise WindowTooShortError("kde_threshold needs at least 16 samples")
    lo, hi = float(y.min()), float(y.max())
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        raise NoSpikesError("constant series has no spikes")
    grid = np.linspace(lo, hi, KDE_GRID_POINTS)
    density = gaussian_kde(y, bw_method="silverman")(grid)
    fallback = float(y.mean() + 2 * y.std())

    peaks, _ = find_peaks(np.concatenate(([0.0], density, [0.0])),
                          prominence=MODE_PROMINENCE * density.max())
    peaks = peaks - 1
    if peaks.size < 2:
        return fallback
    upper = max(peaks[np.argsort(density[peaks], kind="stable")[-2:]])
    below = peaks[peaks < upper].max()
    valley = below + int(np.argmin(density[below:upper + 1]))
    return float(grid[valley])


def detect_spikes(series, threshold: float) -> list[Spike]:
    """Maximal runs of samples strictly above ``threshold``.

    The baseline of a spike is the mean of the sample just before and the
    sample just after it (only one of them at a series edge).
    """
    y = values_of(series)
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    above = np.concatenate(([False], y > threshold, [False]))
    edges = np.flatnonzero(np.diff(above.astype(np.int8)))
    starts, ends = edges[0::2], edges[1::2]
    spikes = []
    for s, e in zip(starts.tolist(), ends.tolist()):
        flank = [y[i] for i in (s - 1, e) if 0 <= i < y.size]
        seg = y[s:e]
        baseline = float(np.mean(flank)) if flank else 0.0
        spikes.append(Spike(s, e, float(seg.max()), float(seg.mean()) - baseline, baseline))
    return spikes


def _circular_offset(d: float, period: float) -> float:
    r = d % period
    return min(r, period - r)


def _best_anchor(starts: np.ndarray, P: float, m: float) -> int:
    """Index of the spike that lines up with the most period slots.

    A slot ``n != 0`` counts for anchor ``i`` when some spike lies within
    ``m`` of ``s_i + n * P``. Ties go to the smallest summed deviation over
    the matched slots, then to the earliest spike.
    """
    best_key, best = None, 0
    for i, si in enumerate(starts):
        d = starts - si
        slot = np.rint(d / P)
        dev = np.abs(d - slot * P)
        hit = (dev <= m) & (slot != 0)
        slots = {}
        for n, e in zip(slot[hit].tolist(), dev[hit].tolist()):
            slots[n] = min(e, slots.get(n, np.inf))
        key = (-len(slots), sum(slots.values()))
        if best_key is None or key < best_key:
            best_key, best = key, i
    return best


def retrieve_periodic(spike_starts, params: RetrievalParams) -> list[int]:
    """Pick the spike starts that follow the period.

    The anchor is the spike with the most whole-period slots occupied by
    another spike within ``max_error`` (see :func:`_best_anchor`). From it the scan
    jumps ``+P`` then ``-P``: at jump ``j`` the spike nearest to ``j * P``
    from the last accepted one is accepted if it deviates by at most
    ``max_error``, and ``j`` restarts at 1 from it; otherwise ``j`` grows.
    A direction ends once ``j * P`` overshoots the farthest spike by more
    than ``max_error``.
    """
    starts = np.asarray(sorted(set(int(s) for s in spike_starts)), dtype=float)
    if starts.size == 0:
        return []
    P, m = float(params.period), float(params.max_error)

    anchor = _best_anchor(starts, P, m)
    selected = {anchor}

    for sign in (1.0, -1.0):
        cur = starts[anchor]
        j = 1
        while True:
            ahead = (starts - cur) * sign
            reach = ahead.max()
            if j * P - m > reach:
                break
            dev = np.abs(ahead - j * P)
            k = int(np.argmin(dev))  # first hit -> earliest start on ties
            if dev[k] <= m:
                selected.add(k)
                cur = starts[k]
                j = 1
            else:
                j += 1
    return sorted(int(starts[i]) for i in selected)


GRID_BITS = 40  # component quantum = 2**-GRID_BITS of the series' magnitude


def _on_grid(height: float, y: np.ndarray, quantum: float) -> np.ndarray:
    """``height`` rounded, per sample, to a multiple of ``max(ulp(y), quantum)``.

    With that rounding ``y - c`` is exact whenever ``y`` itself lies on the
    ``quantum`` grid (whole watt-hours, say), and for other values whenever
    the difference fits the sample's precision. Adding the component back
    onto the residue then restores ``y`` bit for bit.
    """
    g = np.maximum(np.spacing(np.abs(y)), quantum)
    out = np.full(y.shape, float(height))
    fine = np.spacing(abs(height)) < g  # elsewhere height is already on the grid
    out[fine] = np.round(height / g[fine]) * g[fine]
    return out


def reconstruct(series, selected: list[Spike], period: float = math.nan,
                threshold: float = math.nan) -> ExtractionResult:
    """Rebuild the periodic component from the selected spikes.

    Each spike contributes its mean height above baseline over its own
    samples (rounded onto a fine dyadic grid, see :func:`_on_grid`); the
    residue is the input minus that component.
    """
    ts = series if isinstance(series, TimeSeries) else TimeSeries(series)
    y = ts.values
    comp = np.zeros_like(y)
    top = float(np.max(np.abs(y)))
    quantum = math.ldexp(1.0, math.frexp(top)[1] - GRID_BITS) if top > 0 else 0.0
    taken = np.zeros(y.size, dtype=bool)
    for sp in sorted(selected, key=lambda s: s.start):
        if taken[sp.start:sp.end].any():
            raise ConsistencyError(f"spike [{sp.start}, {sp.end}) overlaps another selected spike")
        taken[sp.start:sp.end] = True
        comp[sp.start:sp.end] = _on_grid(sp.mean_above_baseline, y[sp.start:sp.end], quantum)
    return ExtractionResult(ts.with_values(comp), ts.with_values(y - comp),
                            sorted(selected, key=lambda s: s.start), period, threshold)


def fit_period(starts, period: float) -> float:
    """Least-squares period of spike starts laid on a grid of step ``period``."""
    s = np.asarray(sorted(starts), dtype=float)
    slots = np.rint((s - s[0]) / period)
    if s.size < 3 or np.unique(slots).size < s.size:
        return float(period)
    return float(np.polyfit(slots, s, 1)[0])


def extract_once(series, period: float, max_error: int = DEFAULT_MAX_ERROR,
                 alt_periods=()) -> ExtractionResult:
    """Threshold, detect spikes, keep the periodic ones, rebuild the component.

    Retrieval is tried with ``period``, with every ``alt_periods`` value
    within 5% of it (e.g. the periodogram estimate of a fractional period)
    and with the period fitted to the best selection so far. The trial that
    keeps the most spikes wins, earliest on ties.
    """
    thr = kde_threshold(series)
    spikes = detect_spikes(series, thr)
    by_start = {sp.start: sp for sp in spikes}
    starts = list(by_start)
    m = min(max_error, math.ceil(period / 2) - 1)

    def close(p):
        return abs(p - period) <= 0.05 * period

    best, used = retrieve_periodic(starts, RetrievalParams(period, m)), float(period)
    tried = {used}
    for p in [float(a) for a in alt_periods if close(a)] + [None]:
        if p is None:  # last round: refit on the best selection so far
            p = fit_period(best, used) if best else used
            if not close(p):
                continue
        if p in tried:
            continue
        tried.add(p)
        sel = retrieve_periodic(starts, RetrievalParams(p, m))
        if len(sel) > len(best):
            best, used = sel, p
    res = reconstruct(series, [by_start[s] for s in best], period, thr)
    return replace(res, retrieval_period=used)


def extract_all(series, config: ExtractionConfig = ExtractionConfig()) -> list[ExtractionResult]:
    """Peel periodic components off ``series`` until no period validates.

    At most ``config.max_iterations`` components are returned; components
    plus the last residue add back to the input. A component whose energy
    (sum of squares) is below ``config.min_energy_ratio`` times that of the
    first one is treated as leftover of earlier passes and ends the loop.
    """
    current = series if isinstance(series, TimeSeries) else TimeSeries(series)
    if len(current) < config.autoperiod.min_samples:
        raise WindowTooShortError(
            f"extraction needs >= {config.autoperiod.min_samples} samples, got {len(current)}")
    results: list[ExtractionResult] = []
    for _ in range(config.max_iterations):
        kept, _, _ = detect_periods_detailed(current, config.autoperiod)
        if not kept:
            break
        top = kept[0]
        try:
            res = extract_once(current, top.refined_period, config.max_error,
                               alt_periods=[top.period_samples])
        except NoSpikesError:
            break
        if not res.selected_spikes:
            break
        energy = float(np.dot(res.component.values, res.component.values))
        if results and energy < config.min_energy_ratio * first_energy:
            break
        if not results:
            first_energy = energy
        results.append(res)
        current = res.residue
    return results
