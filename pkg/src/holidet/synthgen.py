"""Synthetic benchmark signals and labelled synthetic households.

Every generator is a pure function of its parameters and seed and returns
the ground truth needed to score an extraction: the clean components, their
pulse positions, the random events and, for households, the vacancies.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime

import numpy as np

from .errors import AlignmentError, NormalizationError, SpecificationError
from .series import SAMPLES_PER_DAY, TimeSeries, values_of

SYNTH_START = datetime(2021, 9, 1)

# period 1, period 2, random spikes
CASE_TABLE: dict[str, tuple[float, float | None, bool]] = {
    "A": (48, None, False),
    "B": (48, None, True),
    "C": (23.6, None, False),
    "D": (23.6, None, True),
    "E": (48, 48, False),
    "F": (48, 48, True),
    "G": (21, 17, False),
    "H": (23.6, 29.4, False),
}

RANDOM_SPIKE_RATE = 0.06


@dataclass(frozen=True)
class SyntheticCase:
    name: str
    period1: float
    period2: float | None = None
    random_spikes: bool = False
    length: int = 1440
    seed: int = 42
    amplitude1: float = 1.0
    amplitude2: float = 0.8
    duty1: float = 8
    duty2: float = 6
    noise_sigma: float = 0.05
    offset2: float = 10
    spike_rate: float = RANDOM_SPIKE_RATE


def named_case(name: str, seed: int = 42, **overrides) -> SyntheticCase:
    """One of the eight benchmark cases ``A`` .. ``H``."""
    try:
        p1, p2, rnd = CASE_TABLE[name.upper()]
    except KeyError:
        raise SpecificationError(f"unknown case {name!r}; expected one of {sorted(CASE_TABLE)}") from None
    return replace(SyntheticCase(name.upper(), p1, p2, rnd, seed=seed), **overrides)


@dataclass(eq=False)
class GroundTruth:
    components: list[np.ndarray] = field(default_factory=list)
    events: list[list[tuple[int, int]]] = field(default_factory=list)
    random_events: list[tuple[int, int, float]] = field(default_factory=list)
    noise: np.ndarray | None = None
    random_component: np.ndarray | None = None
    vacancy_intervals: list[tuple[int, int]] = field(default_factory=list)
    periods: list[float] = field(default_factory=list)
    background: np.ndarray | None = None  # households: standby level + occupant load

    def recompose(self) -> np.ndarray:
        """Aggregate rebuilt in the generator's order of addition."""
        total = np.zeros_like(self.components[0])
        for c in self.components:
            total = total + c
        total = total + self.noise + self.random_component
        if self.background is not None:
            total = total + self.background
        return total

    def to_dict(self) -> dict:
        return {
            "periods": [float(p) for p in self.periods],
            "components": [c.tolist() for c in self.components],
            "events": [[list(e) for e in ev] for ev in self.events],
            "random_events": [[int(s), int(e), float(v)] for s, e, v in self.random_events],
            "vacancy_intervals": [list(v) for v in self.vacancy_intervals],
        }


def _on_time(x: np.ndarray, period: float, duty: float, offset: float) -> np.ndarray:
    """Cumulative on-time of the pulse train over ``[0, x)``."""
    u = np.maximum(x - offset, 0.0)
    q = np.floor(u / period)
    r = u - q * period
    # keep quotient and remainder consistent when u / period rounds across an integer
    q = np.where(r < 0, q - 1, np.where(r >= period, q + 1, q))
    r = u - q * period
    return q * duty + np.clip(r, 0.0, duty)


def pulse_train(length: int, period: float, duty: float, amplitude: float = 1.0,
                offset: float = 0.0) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Asymmetric square wave averaged over each unit sampling interval.

    Pulses start at ``offset + j * period`` for ``j >= 0`` and last ``duty``
    samples. A sample partly covered by a pulse gets the covered fraction of
    ``amplitude``, which is exactly 0 or ``amplitude`` when period, duty and
    offset are integers.

    Returns
    -------
    values : ndarray
    events : list of (start, end)
        Sample span touched by each pulse, clipped to the series.
    """
    edges = np.arange(length + 1, dtype=float)
    covered = np.diff(_on_time(edges, period, duty, offset))
    values = amplitude * covered
    events = []
    j = 0
    while True:
        t0 = offset + j * period
        if t0 >= length:
            break
        s = int(math.floor(t0))
        e = min(int(math.ceil(t0 + duty)), length)
        events.append((s, e))
        j += 1
    return values, events


def random_spikes(length: int, rng: np.random.Generator, rate: float = RANDOM_SPIKE_RATE,
                  mean_height: float = 0.5) -> tuple[np.ndarray, list[tuple[int, int, float]]]:
    """Bernoulli(rate) onsets per sample, geometric durations (mean 2), normal heights."""
    onsets = np.flatnonzero(rng.random(length) < rate)
    durations = rng.geometric(0.5, onsets.size)
    heights = rng.normal(mean_height, 0.1, onsets.size)
    heights = np.clip(heights, 0.1 * mean_height, None)
    values = np.zeros(length)
    events = []
    for s, d, h in zip(onsets.tolist(), durations.tolist(), heights.tolist()):
        e = min(s + d, length)
        values[s:e] += h
        events.append((s, e, h))
    return values, events


def generate_case(case: SyntheticCase) -> tuple[TimeSeries, GroundTruth]:
    """Aggregate signal of one benchmark case plus its ground truth.

    The aggregate is ``sum(components) + noise + random spikes``, in that
    order of addition.
    """
    rng = np.random.default_rng(case.seed)
    truth = GroundTruth()
    c1, ev1 = pulse_train(case.length, case.period1, case.duty1, case.amplitude1)
    truth.components.append(c1)
    truth.events.append(ev1)
    truth.periods.append(case.period1)
    if case.period2 is not None:
        c2, ev2 = pulse_train(case.length, case.period2, case.duty2, case.amplitude2, case.offset2)
        truth.components.append(c2)
        truth.events.append(ev2)
        truth.periods.append(case.period2)
    truth.noise = rng.normal(0.0, case.noise_sigma, case.length)
    if case.random_spikes:
        truth.random_component, truth.random_events = random_spikes(
            case.length, rng, case.spike_rate, 0.5 * case.amplitude1)
    else:
        truth.random_component = np.zeros(case.length)
    return TimeSeries(truth.recompose(), start_time=SYNTH_START), truth


# --- households -------------------------------------------------------------


@dataclass(frozen=True)
class HouseholdProfile:
    """Consumption levels of a synthetic household, in Wh per half hour."""

    standby: float = 40.0
    standby_noise: float = 3.0
    device_amplitude: float = 100.0
    device_duty: int = 6
    device_offset: int = 2
    occupied_base: float = 120.0
    morning_peak: float = 250.0
    evening_peak: float = 450.0
    activity_mean: float = 80.0
    appliance_prob: float = 0.5  # per day
    appliance_energy: float = 800.0
    seasonal_swing: tuple[float, float] = (0.1, 0.3)  # occupied load, winter vs summer
    heating_max: float = 800.0  # winter base load kept on while away
    heating_noise: float = 0.03
    regime_days: float = 14.0  # mean length of a stretch of steady occupant habits
    regime_spread: float = 0.2  # log-sd of the occupied level between stretches


def _daily_shape(spd: int) -> np.ndarray:
    h = np.arange(spd) * 24.0 / spd
    morning = np.exp(-0.5 * ((h - 7.5) / 1.0) ** 2)
    evening = np.exp(-0.5 * ((h - 20.0) / 1.8) ** 2)
    return np.stack([morning, evening])


def random_vacancies(days: int, rng: np.random.Generator, count: tuple[int, int] = (2, 4),
                     duration: tuple[int, int] = (7, 21), gap: int = 21) -> list[tuple[int, int]]:
    """Non-overlapping (start_day, duration_days) pairs kept ``gap`` days apart."""
    n = int(rng.integers(count[0], count[1] + 1))
    out: list[tuple[int, int]] = []
    attempts = 0
    while len(out) < n and attempts < 1000:
        attempts += 1
        d = int(rng.integers(duration[0], duration[1] + 1))
        s = int(rng.integers(gap, days - d - gap))
        if all(s + d + gap <= s2 or s2 + d2 + gap <= s for s2, d2 in out):
            out.append((s, d))
    return sorted(out)


def generate_household(years: int = 2, vacancy_spec: list[tuple[float, float]] | None = None,
                       seed: int = 0, profile: HouseholdProfile = HouseholdProfile()
                       ) -> tuple[TimeSeries, GroundTruth]:
    """Synthetic half-hourly household curve with known vacancies.

    Parameters
    ----------
    years : int
        Length in 365-day years.
    vacancy_spec : list of (start_day, duration_days)
        Vacancies; each at least three days long and non-overlapping. ``None``
        draws 2-4 random vacancies from the seed.
    seed : int

    Notes
    -----
    Occupied stretches combine a household-scaled daily profile with a
    seasonal swing, day-to-day level changes and appliance bursts. A smooth
    winter heating load, scaled per household, runs whether or not anyone
    is home, so vacancies are low-variance but not always low-mean. Standby
    noise and a period-48 pulse device run throughout; the device is the
    component to recover during vacancies.
    """
    spd = SAMPLES_PER_DAY
    days = 365 * years
    n = days * spd
    rng = np.random.default_rng(seed)
    if vacancy_spec is None:
        vacancy_spec = random_vacancies(days, rng)
    vac = sorted((int(round(s * spd)), int(round((s + d) * spd))) for s, d in vacancy_spec)
    for s, d in vacancy_spec:
        if d < 3:
            raise SpecificationError(f"vacancy of {d} days is shorter than 3 days")
    for (a0, b0), (a1, b1) in zip(vac, vac[1:]):
        if a1 < b0:
            raise SpecificationError("vacancies overlap")
    if vac and (vac[0][0] < 0 or vac[-1][1] > n):
        raise SpecificationError("vacancy outside the series")

    p = profile
    vacant = np.zeros(n, dtype=bool)
    for a, b in vac:
        vacant[a:b] = True

    scale = float(rng.lognormal(0.0, 0.25))
    shape = _daily_shape(spd)
    day_level = rng.uniform(0.7, 1.3, days)
    bounds = np.cumsum(rng.geometric(1.0 / p.regime_days, days))
    regime = np.exp(p.regime_spread * rng.standard_normal(days))[np.searchsorted(bounds, np.arange(days), side="right")]
    day_level = day_level * regime
    daily = np.repeat(day_level, spd) * np.tile(p.morning_peak * shape[0] + p.evening_peak * shape[1], days)
    activity = rng.gamma(1.5, p.activity_mean / 1.5, n)
    appliance = np.zeros(n)
    for d in np.flatnonzero(rng.random(days) < p.appliance_prob):
        s = int(d * spd + rng.integers(16, 44))
        appliance[s:s + 3] += p.appliance_energy / 3
    winter = np.cos(2 * np.pi * (np.arange(n) / spd - 20.0) / 365.0)  # peaks late January
    swing = rng.uniform(*p.seasonal_swing)
    occupied = scale * (1 + swing * winter) * (p.occupied_base + daily + activity + appliance)
    heating = rng.uniform(0.0, p.heating_max) * np.maximum(winter, 0.0)
    heating = heating * (1 + p.heating_noise * rng.standard_normal(n))

    noise = rng.normal(0.0, p.standby_noise, n)
    device, events = pulse_train(n, spd, p.device_duty, p.device_amplitude, p.device_offset)
    truth = GroundTruth(components=[device], events=[events], noise=noise,
                        random_component=np.zeros(n),
                        background=p.standby + heating + np.where(vacant, 0.0, occupied),
                        vacancy_intervals=vac, periods=[float(spd)])
    return TimeSeries(truth.recompose(), start_time=SYNTH_START), truth


VACANT_FRACTION = 0.8


def window_truth(seg_windows, vacancy_intervals, length: int,
                 min_fraction: float = VACANT_FRACTION) -> list[bool]:
    """Holiday truth per window: at least ``min_fraction`` of its samples are vacant.

    A window holding a full occupied day out of three is not a holiday.
    """
    vacant = np.zeros(length, dtype=bool)
    for a, b in vacancy_intervals:
        vacant[a:b] = True
    return [bool(vacant[a:b].mean() >= min_fraction) for a, b in seg_windows]


def nmae(extracted, truth) -> float:
    """Mean absolute error normalised by the mean of ``truth`` over its nonzero support."""
    x = values_of(extracted)
    t = values_of(truth)
    if x.shape != t.shape:
        raise AlignmentError(f"extracted has {x.size} samples, truth {t.size}")
    support = t != 0
    if not support.any():
        raise NormalizationError("truth is all zero; nMAE undefined")
    return float(np.mean(np.abs(x - t)) / np.mean(np.abs(t[support])))


def case_to_dict(case: SyntheticCase) -> dict:
    return asdict(case)
