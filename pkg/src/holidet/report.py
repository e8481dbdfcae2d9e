"""Writing analysis reports to disk: JSON, per-sample CSV and SVG."""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import InputError
from .pipeline import AnalysisReport, report_from_dict, report_to_dict
from .series import TimeSeries

FORMATS = ("json", "csv", "svg")
SAMPLE_HEADER = ("timestamp", "chunk", "value", "valid", "window_id", "label")


def dumps(data) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, no NaN."""
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def write_json(path: str | Path, data) -> Path:
    path = Path(path)
    _write_text(path, dumps(data))
    return path


def read_report(path: str | Path) -> AnalysisReport:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        return report_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: not an analysis report ({type(exc).__name__}: {exc})") from None


def run_metadata(extra: dict | None = None) -> dict:
    """Run-specific facts kept out of the report so the report stays reproducible."""
    meta = {"created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "version": __version__}
    meta.update(extra or {})
    return meta


def sample_rows(chunks: Sequence[TimeSeries], report: AnalysisReport) -> tuple[list[str], list[list]]:
    """Per-sample table: value, window id, label and one column per extracted component.

    Component columns are numbered by extraction pass; samples outside a
    holiday interval hold 0. Window ids run across chunks.
    """
    n_comp = max((len(h.components) for h in report.holidays), default=0)
    header = list(SAMPLE_HEADER) + [f"component_{k + 1}" for k in range(n_comp)]
    rows = []
    wid = 0
    for c, (series, chunk) in enumerate(zip(chunks, report.chunks)):
        n = len(series)
        win = np.full(n, -1)
        lab = np.full(n, "", dtype=object)
        for w in chunk.windows:
            win[w.start_index:w.end_index] = wid
            lab[w.start_index:w.end_index] = w.label.value
            wid += 1
        comps = np.zeros((n_comp, n))
        for h in chunk.holidays:
            for k, comp in enumerate(h.components):
                comps[k] += comp.values(n)
        values, valid = series.values.tolist(), series.valid_mask.tolist()
        for i in range(n):
            rows.append([series.time_at(i).isoformat(), c, repr(values[i]), int(valid[i]),
                         int(win[i]) if win[i] >= 0 else "", lab[i]]
                        + [repr(float(comps[k, i])) for k in range(n_comp)])
    return header, rows


def write_samples(path: str | Path, chunks: Sequence[TimeSeries], report: AnalysisReport) -> Path:
    path = Path(path)
    header, rows = sample_rows(chunks, report)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None
    return path


def emit_outputs(report: AnalysisReport, chunks: Sequence[TimeSeries], out_dir: str | Path,
                 formats: Sequence[str] = ("json", "csv"), meta: dict | None = None) -> list[Path]:
    """Write the requested outputs for one household into ``out_dir``.

    Files are named after the household id: ``<id>.json`` (report),
    ``<id>.meta.json`` (run metadata, written with the JSON report),
    ``<id>.csv`` (per-sample table) and ``<id>.svg`` (figure).
    """
    unknown = sorted(set(formats) - set(FORMATS))
    if unknown:
        raise InputError(f"unknown output format(s): {', '.join(unknown)}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create {out}: {exc.strerror}") from None
    stem = report.household_id
    written = []
    if "json" in formats:
        written.append(write_json(out / f"{stem}.json", report_to_dict(report)))
        written.append(write_json(out / f"{stem}.meta.json", run_metadata(meta)))
    if "csv" in formats:
        written.append(write_samples(out / f"{stem}.csv", chunks, report))
    if "svg" in formats:
        from .plotting import plot_household  # matplotlib only when asked for
        written.append(plot_household(out / f"{stem}.svg", chunks, report))
    return written
