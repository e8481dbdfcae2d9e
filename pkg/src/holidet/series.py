"""Series container and the numeric primitives everything else builds on.

All functions accept either a :class:`TimeSeries` or a plain 1-D array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import NamedTuple

import numpy as np

from .errors import InputError, RangeError

SAMPLES_PER_DAY = 48
DEFAULT_SAMPLING_PERIOD = timedelta(minutes=30)
DEFAULT_START = datetime(1970, 1, 1)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled consumption curve.

    ``values`` are energy per sampling interval (Wh per 30 min by default).
    ``valid_mask`` is False where a sample was imputed during ingestion.
    """

    values: np.ndarray
    sampling_period: timedelta = DEFAULT_SAMPLING_PERIOD
    start_time: datetime = DEFAULT_START
    valid_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise InputError("a time series needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise InputError("time series values must be finite")
        if self.valid_mask is None:
            mask = np.ones(values.size, dtype=bool)
        else:
            mask = np.asarray(self.valid_mask, dtype=bool)
        if mask.shape != values.shape:
            raise InputError("valid_mask and values differ in length")
        if self.sampling_period <= timedelta(0):
            raise InputError("sampling period must be positive")
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid_mask", mask)

    def __len__(self):
        return self.values.size

    @property
    def samples_per_day(self) -> float:
        return timedelta(days=1) / self.sampling_period

    def time_at(self, index: int) -> datetime:
        return self.start_time + index * self.sampling_period

    def index_of(self, when: datetime) -> float:
        return (when - self.start_time) / self.sampling_period

    def slice(self, a: int, b: int) -> "TimeSeries":
        check_range(len(self), a, b)
        return TimeSeries(self.values[a:b], self.sampling_period,
                          self.time_at(a), self.valid_mask[a:b])

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(values, self.sampling_period, self.start_time, self.valid_mask)


class Subrange(NamedTuple):
    """Half-open sample range ``[a, b)``."""

    a: int
    b: int


@dataclass(frozen=True, eq=False)
class Spectrum:
    powers: np.ndarray
    frequencies: np.ndarray  # cycles per sample, k / T
    coefficients: np.ndarray | None = None

    def __len__(self):
        return self.powers.size


def values_of(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise InputError("expected a 1-D series")
    return y


def check_range(n: int, a: int, b: int) -> None:
    if not (0 <= a < b <= n):
        raise RangeError(f"invalid range [{a}, {b}) for a series of length {n}")


def window_values(series, rng) -> np.ndarray:
    y = values_of(series)
    if rng is None:
        rng = Subrange(0, y.size)
    a, b = rng
    check_range(y.size, a, b)
    return y[a:b]


def mean(series, rng: Subrange | tuple | None = None) -> float:
    """Arithmetic mean of ``values[a:b]`` (whole series when ``rng`` is None)."""
    w = window_values(series, rng)
    if w.min() == w.max():
        return float(w[0])  # summation round-off would move a constant
    return float(np.mean(w))


def variance(series, rng: Subrange | tuple | None = None) -> float:
    """Population variance (divides by ``b - a``) of ``values[a:b]``."""
    w = window_values(series, rng)
    if w.min() == w.max():
        return 0.0
    d = w - w.mean()  # two-pass
    return float(np.dot(d, d) / w.size)


def dft(series) -> Spectrum:
    """Discrete Fourier transform ``Y_k = sum_t y_t exp(-2 pi i k t / T)``.

    Computed with an FFT; the defining sum is the contract.
    """
    y = values_of(series)
    if y.size < 1:
        raise InputError("DFT of an empty series")
    coef = np.fft.fft(y)
    powers = coef.real ** 2 + coef.imag ** 2
    return Spectrum(powers, np.arange(y.size) / y.size, coef)


def periodogram(series) -> Spectrum:
    """Squared modulus of every DFT coefficient, DC bin included."""
    spec = dft(series)
    return Spectrum(spec.powers, spec.frequencies)


def acf(series, max_lag: int) -> np.ndarray:
    """Raw autocorrelation ``(1/T) sum_t y_t y_{t+k}`` for ``k = 0..max_lag``.

    Samples past the end are taken as zero, so lag ``k`` sums ``T - k`` terms
    but is still divided by ``T``. No mean removal.
    """
    y = values_of(series)
    n = y.size
    if not (0 <= max_lag < n):
        raise RangeError(f"max_lag {max_lag} outside [0, {n})")
    # zero padding to 2T makes the circular correlation linear
    size = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(y, size)
    full = np.fft.irfft(f.real ** 2 + f.imag ** 2, size)[: max_lag + 1]
    out = full / n
    # exact zeros stay zero instead of round-off noise
    if not np.any(y):
        out[:] = 0.0
    return out
