"""End-to-end analysis of a household curve and evaluation against window labels.

One chunk (a gap-free stretch of the meter file) goes through
normalisation, bottom-up segmentation, window classification, interval
merging and, inside each holiday interval, periodic-component extraction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .changepoint import Segmentation, bottom_up, zscore
from .config import PipelineConfig
from .errors import AlignmentError, HolidetError, InsufficientDataError, NormalizationError, ParseError
from .ingest import parse_timestamp
from .occupancy import (Label, LabelledChunk, LabelledHousehold, MetricsReport, classify_windows,
                        merge_holidays, score)
from .series import TimeSeries
from .spikes import ExtractionResult, extract_all
from .synthgen import nmae

SCHEMA_VERSION = "1.0"
LABEL_HEADER = ("household_id", "window_start", "window_end", "label")


# --- report structure --------------------------------------------------------


@dataclass(frozen=True)
class SpikeRecord:
    start: int  # chunk sample index
    end: int  # exclusive
    height: float
    baseline: float
    peak: float


@dataclass(frozen=True)
class ComponentReport:
    period_samples: int
    period_hours: float
    retrieval_period: float
    threshold: float
    spikes: tuple[SpikeRecord, ...]
    nmae: float | None = None

    def values(self, length: int, offset: int = 0) -> np.ndarray:
        """The component on ``length`` samples starting at chunk index ``offset``."""
        out = np.zeros(length)
        for s in self.spikes:
            out[s.start - offset:s.end - offset] = s.height
        return out


@dataclass(frozen=True)
class IntervalReport:
    start: datetime
    end: datetime
    start_index: int
    end_index: int
    source_windows: tuple[int, ...]
    components: tuple[ComponentReport, ...] = ()
    error: str | None = None


@dataclass(frozen=True)
class WindowRecord:
    start_index: int
    end_index: int
    start: datetime
    end: datetime
    label: Label
    criterion_value: float


@dataclass(frozen=True)
class ChunkReport:
    start_time: datetime
    n_samples: int
    n_filled: int
    windows: tuple[WindowRecord, ...] = ()
    holidays: tuple[IntervalReport, ...] = ()
    error: str | None = None

    @property
    def breakpoints(self) -> list[int]:
        if not self.windows:
            return []
        return [w.start_index for w in self.windows] + [self.windows[-1].end_index]


@dataclass(frozen=True)
class AnalysisReport:
    household_id: str
    chunks: tuple[ChunkReport, ...]
    config: dict
    sampling_period_minutes: float = 30.0
    version: str = __version__
    schema_version: str = SCHEMA_VERSION

    @property
    def holidays(self) -> list[IntervalReport]:
        return [h for c in self.chunks for h in c.holidays]

    @property
    def windows(self) -> list[WindowRecord]:
        return [w for c in self.chunks for w in c.windows]

    @property
    def failed(self) -> bool:
        return bool(self.chunks) and all(c.error is not None for c in self.chunks)

    def to_dict(self) -> dict:
        return report_to_dict(self)


# --- (de)serialisation -------------------------------------------------------


def _iso(t: datetime) -> str:
    return t.isoformat()


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else None


def report_to_dict(rep: AnalysisReport) -> dict:
    hours = rep.sampling_period_minutes / 60.0

    def comp(c: ComponentReport):
        return {"period_samples": c.period_samples, "period_hours": c.period_hours,
                "retrieval_period": _num(c.retrieval_period), "threshold": _num(c.threshold),
                "nmae": c.nmae,
                "spikes": [[s.start, s.end, s.height, s.baseline, s.peak] for s in c.spikes]}

    def interval(h: IntervalReport):
        return {"start": _iso(h.start), "end": _iso(h.end), "start_index": h.start_index,
                "end_index": h.end_index, "source_windows": list(h.source_windows),
                "duration_days": (h.end_index - h.start_index) * hours / 24.0,
                "components": [comp(c) for c in h.components], "error": h.error}

    def chunk(c: ChunkReport):
        return {"start_time": _iso(c.start_time), "n_samples": c.n_samples, "n_filled": c.n_filled,
                "breakpoints": c.breakpoints,
                "breakpoint_times": [_iso(c.start_time + timedelta(hours=b * hours)) for b in c.breakpoints],
                "windows": [{"start": _iso(w.start), "end": _iso(w.end), "start_index": w.start_index,
                             "end_index": w.end_index, "label": w.label.value,
                             "criterion_value": w.criterion_value} for w in c.windows],
                "holidays": [interval(h) for h in c.holidays], "error": c.error}

    return {"schema_version": rep.schema_version, "version": rep.version,
            "household_id": rep.household_id,
            "sampling_period_minutes": rep.sampling_period_minutes,
            "config": dict(rep.config), "chunks": [chunk(c) for c in rep.chunks]}


def report_from_dict(data: dict) -> AnalysisReport:
    """Inverse of :func:`report_to_dict`."""
    def num(x):
        return float("nan") if x is None else float(x)

    def comp(d):
        return ComponentReport(d["period_samples"], d["period_hours"], num(d["retrieval_period"]),
                               num(d["threshold"]), tuple(SpikeRecord(*s) for s in d["spikes"]),
                               d["nmae"])

    def interval(d):
        return IntervalReport(datetime.fromisoformat(d["start"]), datetime.fromisoformat(d["end"]),
                              d["start_index"], d["end_index"], tuple(d["source_windows"]),
                              tuple(comp(c) for c in d["components"]), d["error"])

    def chunk(d):
        wins = tuple(WindowRecord(w["start_index"], w["end_index"], datetime.fromisoformat(w["start"]),
                                  datetime.fromisoformat(w["end"]), Label(w["label"]),
                                  w["criterion_value"]) for w in d["windows"])
        return ChunkReport(datetime.fromisoformat(d["start_time"]), d["n_samples"], d["n_filled"],
                           wins, tuple(interval(h) for h in d["holidays"]), d["error"])

    return AnalysisReport(data["household_id"], tuple(chunk(c) for c in data["chunks"]),
                          dict(data["config"]), data["sampling_period_minutes"], data["version"],
                          data["schema_version"])


# --- analysis ----------------------------------------------------------------


@dataclass(eq=False)
class ChunkAnalysis:
    """Everything computed for a chunk, including arrays the report leaves out."""

    series: TimeSeries
    segmentation: Segmentation
    report: ChunkReport
    extractions: dict[int, list[ExtractionResult]] = field(default_factory=dict)


def segment(series: TimeSeries, config: PipelineConfig) -> Segmentation:
    """Bottom-up segmentation of the z-scored series."""
    seg, _ = bottom_up(zscore(series), config.cost, config.grid_size, config.stop_rule)
    return seg


def _component_report(res: ExtractionResult, offset: int, hours: float, truth) -> ComponentReport:
    err = None
    if truth is not None:
        try:
            err = nmae(res.component, truth)
        except NormalizationError:
            err = None
    spikes = tuple(SpikeRecord(s.start + offset, s.end + offset, s.mean_above_baseline, s.baseline, s.peak)
                   for s in res.selected_spikes)
    return ComponentReport(int(res.period), res.period * hours, float(res.retrieval_period),
                           float(res.threshold), spikes, err)


def analyze_chunk(series: TimeSeries, config: PipelineConfig, truth=None) -> ChunkAnalysis:
    """Segment, classify and extract one gap-free chunk.

    ``truth`` is an optional per-sample reference component; when given,
    every extracted component carries its nMAE against it.

    Raises
    ------
    InsufficientDataError
        If the chunk is shorter than two grid cells.
    """
    n = len(series)
    if n < 2 * config.grid_size:
        raise InsufficientDataError(f"chunk of {n} samples is shorter than two grid cells "
                                    f"of {config.grid_size}")
    seg = segment(series, config)
    labels = classify_windows(series, seg, config.classifier_spec)
    intervals = merge_holidays(labels, seg, timedelta(days=config.min_holiday_days),
                               start_time=series.start_time, sampling_period=series.sampling_period)
    hours = series.sampling_period / timedelta(hours=1)
    windows = tuple(WindowRecord(wl.window.a, wl.window.b, series.time_at(wl.window.a),
                                 series.time_at(wl.window.b), wl.label, wl.criterion_value)
                    for wl in labels)
    truth_values = None if truth is None else np.asarray(truth, dtype=float)
    holidays, extractions = [], {}
    for k, iv in enumerate(intervals):
        a, b = iv.start_index, iv.end_index
        t = None if truth_values is None else truth_values[a:b]
        try:
            results = extract_all(series.slice(a, b), config.extraction)
        except (HolidetError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            holidays.append(IntervalReport(iv.start, iv.end, a, b, iv.source_windows,
                                           error=f"{type(exc).__name__}: {exc}"))
            continue
        extractions[k] = results
        comps = tuple(_component_report(r, a, hours, t) for r in results)
        holidays.append(IntervalReport(iv.start, iv.end, a, b, iv.source_windows, comps))
    n_filled = int(np.sum(~series.valid_mask))
    report = ChunkReport(series.start_time, n, n_filled, windows, tuple(holidays))
    return ChunkAnalysis(series, seg, report, extractions)


def analyze_household(chunks: Sequence[TimeSeries], config: PipelineConfig,
                      household_id: str = "household", truths=None) -> AnalysisReport:
    """Analyse every chunk; a chunk that fails is recorded, not raised."""
    out = []
    truths = truths if truths is not None else [None] * len(chunks)
    for series, truth in zip(chunks, truths):
        try:
            out.append(analyze_chunk(series, config, truth).report)
        except HolidetError as exc:
            out.append(ChunkReport(series.start_time, len(series), int(np.sum(~series.valid_mask)),
                                   error=f"{type(exc).__name__}: {exc}"))
    minutes = chunks[0].sampling_period / timedelta(minutes=1) if chunks else 30.0
    return AnalysisReport(household_id, tuple(out), config.to_dict(), minutes)


def run_pipeline(series: TimeSeries, config: PipelineConfig = PipelineConfig(),
                 household_id: str = "household", truth=None) -> AnalysisReport:
    """Analyse a single gap-free series.

    Unlike :func:`analyze_household`, a series too short to segment raises
    :class:`InsufficientDataError`. Failing interval extractions are
    recorded in the report.
    """
    ca = analyze_chunk(series, config, truth)
    return AnalysisReport(household_id, (ca.report,), config.to_dict(),
                          series.sampling_period / timedelta(minutes=1))


# --- labels and evaluation ---------------------------------------------------


@dataclass(frozen=True)
class LabelRecord:
    household_id: str
    window_start: datetime
    window_end: datetime
    label: Label


def read_labels(path: str | Path) -> list[LabelRecord]:
    p = Path(path)
    try:
        fh = p.open(newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc.strerror}") from None
    out = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != LABEL_HEADER:
            raise ParseError(f"header must be {','.join(LABEL_HEADER)}", 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", line)
            try:
                label = Label(row[3].strip().lower())
            except ValueError:
                raise ParseError(f"label must be holiday or occupied, got {row[3]!r}", line) from None
            out.append(LabelRecord(row[0].strip(), parse_timestamp(row[1], line),
                                   parse_timestamp(row[2], line), label))
    return out


def write_labels(path: str | Path, records: Iterable[LabelRecord]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABEL_HEADER)
        for r in records:
            w.writerow([r.household_id, _iso(r.window_start), _iso(r.window_end), r.label.value])


def report_labels(report: AnalysisReport) -> list[LabelRecord]:
    """The predicted window labels of a report, as label records."""
    return [LabelRecord(report.household_id, w.start, w.end, w.label) for w in report.windows]


def truth_labels(household_id: str, windows: Sequence[tuple[datetime, datetime]],
                 flags: Sequence[bool]) -> list[LabelRecord]:
    return [LabelRecord(household_id, a, b, Label.HOLIDAY if f else Label.OCCUPIED)
            for (a, b), f in zip(windows, flags)]


@dataclass(frozen=True)
class Evaluation:
    per_household: dict[str, MetricsReport]
    macro_f1: float
    pooled: MetricsReport

    def to_dict(self) -> dict:
        return {"macro_f1": self.macro_f1, "pooled": self.pooled.to_dict(),
                "households": {k: v.to_dict() for k, v in sorted(self.per_household.items())}}


def _aligned_truth(report: AnalysisReport, labels: Sequence[LabelRecord]) -> list[bool]:
    by_window = {(r.window_start, r.window_end): r.label for r in labels}
    offending, flags = [], []
    for w in report.windows:
        lab = by_window.pop((w.start, w.end), None)
        if lab is None:
            offending.append(f"{report.household_id} {_iso(w.start)}..{_iso(w.end)}: no label")
        else:
            flags.append(lab is Label.HOLIDAY)
    offending += [f"{report.household_id} {_iso(a)}..{_iso(b)}: no window" for a, b in by_window]
    if offending:
        shown = "; ".join(offending[:10]) + (" ..." if len(offending) > 10 else "")
        raise AlignmentError(f"{len(offending)} label/window mismatch(es): {shown}", offending)
    return flags


def evaluate(reports: Sequence[AnalysisReport], labels: Sequence[LabelRecord]) -> Evaluation:
    """Window-level scores per household plus their macro average.

    Raises
    ------
    AlignmentError
        When a household's labels and report windows differ; the error
        lists the offending windows.
    """
    by_house: dict[str, list[LabelRecord]] = {}
    for r in labels:
        by_house.setdefault(r.household_id, []).append(r)
    per = {}
    for rep in reports:
        truth = _aligned_truth(rep, by_house.get(rep.household_id, []))
        pred = [w.label is Label.HOLIDAY for w in rep.windows]
        per[rep.household_id] = score(pred, truth)
    if not per:
        raise AlignmentError("no reports to evaluate")
    reps = list(per.values())
    return Evaluation(per, float(np.mean([m.f1 for m in reps])), sum(reps[1:], reps[0]))


def labelled_household(household_id: str, chunks: Sequence[TimeSeries], labels: Sequence[LabelRecord],
                       config: PipelineConfig) -> LabelledHousehold:
    """Segment every chunk and attach the matching ground-truth labels."""
    by_window = {(r.window_start, r.window_end): r.label for r in labels
                 if r.household_id == household_id}
    parts, offending = [], []
    for series in chunks:
        seg = segment(series, config)
        truth = []
        for a, b in seg.windows():
            key = (series.time_at(a), series.time_at(b))
            lab = by_window.get(key)
            if lab is None:
                offending.append(f"{household_id} {_iso(key[0])}..{_iso(key[1])}: no label")
            truth.append(lab is Label.HOLIDAY)
        parts.append(LabelledChunk(series, seg, truth))
    if offending:
        raise AlignmentError(f"{len(offending)} window(s) without a label: " + "; ".join(offending[:10]),
                             offending)
    return LabelledHousehold(household_id, parts)
