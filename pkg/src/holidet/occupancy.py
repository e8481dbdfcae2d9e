"""Window-level holiday classification, interval merging and scoring.

Each window of a segmentation is compared either with its neighbours or
with the whole series, on its mean or its variance. The four combinations
are the classifiers ``N_mean``, ``N_var``, ``F_mean`` and ``F_var``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Sequence

import numpy as np

from .changepoint import Segmentation
from .errors import AlignmentError, ConfigError, InsufficientContextError
from .series import DEFAULT_SAMPLING_PERIOD, DEFAULT_START, Subrange, TimeSeries, mean, variance

DEFAULT_RATIO = 0.5
DEFAULT_RATIO_GRID = tuple(round(0.05 * i, 2) for i in range(1, 21))
MIN_HOLIDAY = timedelta(days=3)
# ties within round-off count as equal, so labels survive rescaling
REL_TOL = 1e-9


class Comparison(str, enum.Enum):
    NEIGHBOURS = "neighbours"
    FULL = "full"


class Criterion(str, enum.Enum):
    MEAN = "mean"
    VARIANCE = "variance"


class Label(str, enum.Enum):
    HOLIDAY = "holiday"
    OCCUPIED = "occupied"


_PREFIX = {Comparison.NEIGHBOURS: "N", Comparison.FULL: "F"}
_SUFFIX = {Criterion.MEAN: "mean", Criterion.VARIANCE: "var"}


@dataclass(frozen=True)
class ClassifierSpec:
    comparison: Comparison = Comparison.FULL
    criterion: Criterion = Criterion.VARIANCE
    ratio: float = DEFAULT_RATIO

    def __post_init__(self):
        object.__setattr__(self, "comparison", Comparison(self.comparison))
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        if not 0 < self.ratio <= 1:
            raise ConfigError(f"ratio must lie in (0, 1], got {self.ratio}")

    @property
    def name(self) -> str:
        return f"{_PREFIX[self.comparison]}_{_SUFFIX[self.criterion]}"

    @classmethod
    def from_name(cls, name: str, ratio: float = DEFAULT_RATIO) -> "ClassifierSpec":
        """``"F_var"`` and friends; case-insensitive."""
        try:
            head, tail = name.strip().split("_")
            comparison = {"n": Comparison.NEIGHBOURS, "f": Comparison.FULL}[head.lower()]
            criterion = {"mean": Criterion.MEAN, "var": Criterion.VARIANCE}[tail.lower()]
        except (ValueError, KeyError):
            raise ConfigError(f"unknown classifier {name!r}; use N_mean, N_var, F_mean or F_var") from None
        return cls(comparison, criterion, ratio)

    def with_ratio(self, ratio: float) -> "ClassifierSpec":
        return ClassifierSpec(self.comparison, self.criterion, ratio)


@dataclass(frozen=True)
class WindowLabel:
    window: Subrange
    label: Label
    criterion_value: float

    @property
    def is_holiday(self) -> bool:
        return self.label is Label.HOLIDAY


@dataclass(frozen=True)
class HolidayInterval:
    start: datetime
    end: datetime
    source_windows: tuple[int, ...]
    start_index: int
    end_index: int  # exclusive

    @property
    def duration(self) -> timedelta:
        return self.end - self.start


@dataclass(frozen=True)
class MetricsReport:
    """Window-level confusion counts with Holiday as the positive class."""

    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "MetricsReport":
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f1, tp, fp, fn, tn)

    def __add__(self, other: "MetricsReport") -> "MetricsReport":
        return MetricsReport.from_counts(self.tp + other.tp, self.fp + other.fp,
                                         self.fn + other.fn, self.tn + other.tn)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def window_statistics(series, seg: Segmentation, criterion: Criterion) -> np.ndarray:
    stat = mean if Criterion(criterion) is Criterion.MEAN else variance
    return np.array([stat(series, w) for w in seg.windows()])


def _le(a: float, b: float) -> bool:
    return a <= b + REL_TOL * abs(b)


def _labels_from_stats(gammas: np.ndarray, full: float, spec: ClassifierSpec) -> list[bool]:
    r = spec.ratio
    n = gammas.size
    out = []
    if spec.comparison is Comparison.FULL:
        for g in gammas:
            # a dead meter compares zero with zero: not evidence of vacancy
            out.append(not (g == 0 and full == 0) and _le(g, r * full))
        return out
    if n < 2:
        raise InsufficientContextError("neighbour comparison needs at least two windows")
    for k, g in enumerate(gammas):
        nbrs = [gammas[j] for j in (k - 1, k + 1) if 0 <= j < n]
        if len(nbrs) == 1:
            nbrs = nbrs * 2
        lo, avg2 = min(nbrs), nbrs[0] + nbrs[1]
        if g == 0 and lo == 0 and avg2 == 0:
            out.append(False)
        else:
            out.append(_le(g, lo) and _le(g, 0.5 * r * avg2))
    return out


def classify_windows(series, seg: Segmentation, spec: ClassifierSpec) -> list[WindowLabel]:
    """Label every window of ``seg`` as holiday or occupied.

    Full mode: holiday iff ``gamma(window) <= r * gamma(series)``.
    Neighbours mode: holiday iff ``gamma(window)`` is at most the smaller
    neighbour value and at most ``r / 2`` times the neighbours' sum; the
    first and last windows use their single neighbour twice. ``gamma`` is
    the window mean or population variance.

    Raises
    ------
    InsufficientContextError
        Neighbours mode on a single-window segmentation.
    """
    if seg.length != len(series):
        raise AlignmentError(f"segmentation covers {seg.length} samples, series has {len(series)}")
    gammas = window_statistics(series, seg, spec.criterion)
    full = window_statistics(series, Segmentation((0, seg.length), seg.grid_size), spec.criterion)[0]
    flags = _labels_from_stats(gammas, full, spec)
    return [WindowLabel(w, Label.HOLIDAY if f else Label.OCCUPIED, float(g))
            for w, f, g in zip(seg.windows(), flags, gammas)]


def merge_holidays(labels: Sequence[WindowLabel], seg: Segmentation,
                   min_duration: timedelta = MIN_HOLIDAY, *,
                   start_time: datetime = DEFAULT_START,
                   sampling_period: timedelta = DEFAULT_SAMPLING_PERIOD) -> list[HolidayInterval]:
    """Merge consecutive holiday windows; drop runs shorter than ``min_duration``."""
    windows = seg.windows()
    if len(labels) != len(windows):
        raise AlignmentError(f"{len(labels)} labels for {len(windows)} windows")
    out: list[HolidayInterval] = []
    run: list[int] = []
    for k in range(len(windows) + 1):
        if k < len(windows) and labels[k].is_holiday:
            run.append(k)
            continue
        if run:
            a, b = windows[run[0]].a, windows[run[-1]].b
            if (b - a) * sampling_period >= min_duration:
                out.append(HolidayInterval(start_time + a * sampling_period,
                                           start_time + b * sampling_period,
                                           tuple(run), a, b))
            run = []
    return out


def _as_flags(labels) -> np.ndarray:
    out = []
    for x in labels:
        if isinstance(x, WindowLabel):
            out.append(x.is_holiday)
        elif isinstance(x, (Label, str)):
            out.append(Label(x) is Label.HOLIDAY)
        else:
            out.append(bool(x))
    return np.array(out, dtype=bool)


def score(pred, truth) -> MetricsReport:
    """Precision, recall and F1 of ``pred`` against ``truth``.

    Both accept :class:`WindowLabel` objects, :class:`Label` values or
    booleans (True = holiday).
    """
    p, t = _as_flags(pred), _as_flags(truth)
    if p.shape != t.shape:
        raise AlignmentError(f"{p.size} predictions for {t.size} truth labels")
    tp = int(np.sum(p & t))
    fp = int(np.sum(p & ~t))
    fn = int(np.sum(~p & t))
    tn = int(np.sum(~p & ~t))
    return MetricsReport.from_counts(tp, fp, fn, tn)


def baseline_random(seg: Segmentation, p: float, seed: int) -> list[WindowLabel]:
    """Each window is a holiday with probability ``p``, independently."""
    if not 0 <= p <= 1:
        raise ConfigError(f"probability must lie in [0, 1], got {p}")
    draws = np.random.default_rng(seed).random(seg.n_windows)
    return [WindowLabel(w, Label.HOLIDAY if u < p else Label.OCCUPIED, float(u))
            for w, u in zip(seg.windows(), draws)]


# --- ratio fitting -----------------------------------------------------------


@dataclass(eq=False)
class LabelledChunk:
    series: TimeSeries
    segmentation: Segmentation
    truth: list[bool]

    def __post_init__(self):
        if len(self.truth) != self.segmentation.n_windows:
            raise AlignmentError(f"{len(self.truth)} labels for {self.segmentation.n_windows} windows")


@dataclass(eq=False)
class LabelledHousehold:
    """Ground-truth window labels of one home, one entry per analysis chunk."""

    household_id: str
    chunks: list[LabelledChunk]

    @classmethod
    def single(cls, household_id: str, series: TimeSeries, segmentation: Segmentation,
               truth: Sequence[bool]) -> "LabelledHousehold":
        return cls(household_id, [LabelledChunk(series, segmentation, list(truth))])


@dataclass(frozen=True)
class FoldResult:
    fold: int
    ratio: float
    fit_households: tuple[str, ...]
    eval_households: tuple[str, ...]
    report: MetricsReport  # counts pooled over the evaluation households
    macro_f1: float


@dataclass(frozen=True)
class FitResult:
    best_ratio: float
    folds: list[FoldResult] = field(default_factory=list)

    @property
    def mean_macro_f1(self) -> float:
        return float(np.mean([f.macro_f1 for f in self.folds]))

    def __iter__(self):  # unpacks as (best_ratio, folds)
        return iter((self.best_ratio, self.folds))


class _Scorer:
    """Caches window statistics so every ratio costs only comparisons."""

    def __init__(self, households: Sequence[LabelledHousehold], spec: ClassifierSpec):
        self.spec = spec
        self.stats = []
        for h in households:
            parts = []
            for c in h.chunks:
                g = window_statistics(c.series, c.segmentation, spec.criterion)
                full = window_statistics(c.series, Segmentation((0, len(c.series)), 1), spec.criterion)[0]
                parts.append((g, full, c.truth))
            self.stats.append(parts)

    def household_report(self, i, spec) -> MetricsReport:
        reps = [score(_labels_from_stats(g, full, spec), truth) for g, full, truth in self.stats[i]]
        return sum(reps[1:], reps[0])

    def reports(self, idx, ratio) -> list[MetricsReport]:
        spec = self.spec.with_ratio(ratio)
        return [self.household_report(i, spec) for i in idx]

    def best(self, idx, grid) -> float:
        best_r, best_f = None, -1.0
        for r in sorted(grid):  # ascending: ties keep the smaller ratio
            f = float(np.mean([m.f1 for m in self.reports(idx, r)]))
            if f > best_f:
                best_r, best_f = r, f
        return best_r


def fold_assignment(n: int, folds: int, seed: int = 0) -> list[list[int]]:
    """Partition household indices ``0..n-1`` into ``folds`` groups."""
    order = np.random.default_rng(seed).permutation(n)
    return [sorted(int(i) for i in order[k::folds]) for k in range(folds)]


def fit_ratio(dataset: Sequence[LabelledHousehold], shape: ClassifierSpec | str,
              ratio_grid: Sequence[float] = DEFAULT_RATIO_GRID, folds: int = 5,
              seed: int = 0) -> FitResult:
    """Cross-validated choice of the classifier ratio.

    Households are split into ``folds`` groups. In fold ``k`` the ratio is
    fitted on group ``k`` alone (a fifth of the homes for five folds) and
    scored on all other homes. The fitted ratio maximises the mean per-home
    F1, smaller ratios winning ties. ``best_ratio`` is the same fit over the
    whole dataset. With ``folds=1`` fitting and scoring both use every home.

    Raises
    ------
    ConfigError
        Empty dataset or grid, or a fold count that would leave a fold empty.
    """
    if isinstance(shape, str):
        shape = ClassifierSpec.from_name(shape)
    if not dataset:
        raise ConfigError("fit_ratio needs at least one household")
    grid = [float(r) for r in ratio_grid]
    if not grid:
        raise ConfigError("ratio grid is empty")
    for r in grid:
        shape.with_ratio(r)  # validates
    n = len(dataset)
    if not 1 <= folds <= n:
        raise ConfigError(f"{folds} folds over {n} households leaves a fold empty")

    scorer = _Scorer(dataset, shape)
    everyone = list(range(n))
    ids = [h.household_id for h in dataset]
    results = []
    groups = [everyone] if folds == 1 else fold_assignment(n, folds, seed)
    for k, fit_idx in enumerate(groups):
        eval_idx = everyone if folds == 1 else [i for i in everyone if i not in fit_idx]
        r = scorer.best(fit_idx, grid)
        reps = scorer.reports(eval_idx, r)
        pooled = sum(reps[1:], reps[0])
        results.append(FoldResult(k, r, tuple(ids[i] for i in fit_idx), tuple(ids[i] for i in eval_idx),
                                  pooled, float(np.mean([m.f1 for m in reps]))))
    return FitResult(scorer.best(everyone, grid), results)
