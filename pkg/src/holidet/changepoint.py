"""Bottom-up segmentation with piecewise-constant Gaussian cost functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, DegenerateWindowError, InsufficientDataError
from .series import Subrange, values_of, window_values

VARIANCE_FLOOR = 1e-8
DEFAULT_GRID_SIZE = 144  # three days of half-hourly samples
DEFAULT_THRESHOLD = 250.0


def cost_l2(series, rng: Subrange | tuple | None = None) -> float:
    """Sum of squared deviations from the window mean (mean-shift cost)."""
    w = window_values(series, rng)
    d = w - w.mean()
    return float(np.dot(d, d))


def cost_gaussian(series, rng: Subrange | tuple | None = None) -> float:
    """Negative Gaussian log-likelihood with free mean and variance.

    ``n log(s2) + sum((y - mean)^2) / s2`` where ``s2`` is the window variance
    floored at :data:`VARIANCE_FLOOR`. The second term is evaluated as written
    even though it equals ``n`` whenever the floor is inactive.
    """
    w = window_values(series, rng)
    n = w.size
    if n < 2:
        raise DegenerateWindowError("gaussian cost needs at least 2 samples")
    d = w - w.mean()
    sse = float(np.dot(d, d))
    s2 = max(sse / n, VARIANCE_FLOOR)
    return n * math.log(s2) + sse / s2


COSTS: dict[str, Callable] = {"l2": cost_l2, "gaussian": cost_gaussian}


def get_cost(cost) -> Callable:
    if callable(cost):
        return cost
    try:
        return COSTS[cost]
    except KeyError:
        raise ConfigError(f"unknown cost function {cost!r}; choose from {sorted(COSTS)}") from None


@dataclass(frozen=True)
class StopRule:
    """Either a merge-gain ceiling (``threshold``) or a target window count."""

    threshold: float | None = None
    n_windows: int | None = None

    def __post_init__(self):
        if (self.threshold is None) == (self.n_windows is None):
            raise ConfigError("StopRule takes exactly one of threshold / n_windows")
        if self.n_windows is not None and self.n_windows < 1:
            raise ConfigError("n_windows must be >= 1")

    @classmethod
    def max_cost(cls, threshold: float) -> "StopRule":
        return cls(threshold=float(threshold))

    @classmethod
    def count(cls, n_windows: int) -> "StopRule":
        return cls(n_windows=int(n_windows))


@dataclass(frozen=True)
class MergeRecord:
    removed_index: int
    merge_gain: float
    step: int


@dataclass(frozen=True)
class Segmentation:
    breakpoints: tuple[int, ...]
    grid_size: int

    @property
    def n_windows(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def length(self) -> int:
        return self.breakpoints[-1]

    def windows(self) -> list[Subrange]:
        bp = self.breakpoints
        return [Subrange(bp[i], bp[i + 1]) for i in range(len(bp) - 1)]

    def window_ids(self) -> np.ndarray:
        """Window index for every sample."""
        ids = np.empty(self.length, dtype=int)
        for k, (a, b) in enumerate(self.windows()):
            ids[a:b] = k
        return ids


def regular_grid(n: int, grid_size: int) -> list[int]:
    """Breakpoints ``0, d, 2d, ..., n``; the last cell absorbs ``n mod d``."""
    cells = n // grid_size
    return [i * grid_size for i in range(cells)] + [n]


def bottom_up(series, cost="gaussian", grid_size: int = DEFAULT_GRID_SIZE,
              stop: StopRule | None = None) -> tuple[Segmentation, list[MergeRecord]]:
    """Greedy bottom-up merging of a regular grid of cells.

    At each step the interior breakpoint whose removal increases the total
    cost the least is removed (lowest index on ties). Merging stops once
    that smallest increase exceeds ``stop.threshold`` or once ``stop.n_windows``
    windows remain.

    Returns
    -------
    segmentation : Segmentation
    trail : list of MergeRecord
        One record per accepted merge, in order.
    """
    y = values_of(series)
    n = y.size
    cost_fn = get_cost(cost)
    if stop is None:
        stop = StopRule.max_cost(DEFAULT_THRESHOLD)
    if grid_size < 2:
        raise ConfigError("grid_size must be >= 2")
    if n < 2 * grid_size:
        raise InsufficientDataError(
            f"series of {n} samples is shorter than two grid cells of {grid_size}")

    bps = regular_grid(n, grid_size)
    cache: dict[tuple[int, int], float] = {}

    def c(a, b):
        key = (a, b)
        if key not in cache:
            cache[key] = cost_fn(y, Subrange(a, b))
        return cache[key]

    def gain(i):
        a, m, b = bps[i - 1], bps[i], bps[i + 1]
        return c(a, b) - (c(a, m) + c(m, b))

    gains = [math.nan] + [gain(i) for i in range(1, len(bps) - 1)] + [math.nan]
    trail: list[MergeRecord] = []
    while len(bps) > 2:
        if stop.n_windows is not None and len(bps) - 1 <= stop.n_windows:
            break
        interior = gains[1:-1]
        j = int(np.argmin(interior))  # first minimum -> lowest index
        best = interior[j]
        if stop.threshold is not None and best > stop.threshold:
            break
        i = j + 1
        trail.append(MergeRecord(bps[i], best, len(trail)))
        del bps[i]
        del gains[i]
        if i - 1 >= 1:
            gains[i - 1] = gain(i - 1)
        if i <= len(bps) - 2:
            gains[i] = gain(i)
    return Segmentation(tuple(bps), grid_size), trail


def zscore(series) -> np.ndarray:
    """Mean-removed series divided by its standard deviation (if nonzero)."""
    y = values_of(series)
    d = y - y.mean()
    sd = float(np.sqrt(np.dot(d, d) / y.size))
    return d / sd if sd > 0 else d
