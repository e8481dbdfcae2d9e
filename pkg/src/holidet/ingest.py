"""Reading half-hourly meter CSV files into analysis chunks."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import CoverageError, InputError, OrderingError, ParseError
from .series import DEFAULT_SAMPLING_PERIOD, TimeSeries

HEADER = ("timestamp", "consumption_wh")


@dataclass(eq=False)
class IngestResult:
    """Chunks separated by outages longer than the gap-fill limit."""

    chunks: list[TimeSeries]
    coverage: float
    n_rows: int
    n_filled: int
    chunk_offsets: list[int] = field(default_factory=list)  # sample index of each chunk start

    @property
    def series(self) -> TimeSeries:
        """The only chunk; an error when the file was split."""
        if len(self.chunks) != 1:
            raise InputError(f"expected one chunk, found {len(self.chunks)}")
        return self.chunks[0]


def parse_timestamp(text: str, line: int | None = None) -> datetime:
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    try:
        return datetime.fromisoformat(s)
    except ValueError:
        raise ParseError(f"not an ISO-8601 timestamp: {text!r}", line) from None


def read_rows(path: str | Path) -> list[tuple[int, datetime, float]]:
    """``(line, timestamp, value)`` for every data row, header checked."""
    p = Path(path)
    try:
        fh = p.open(newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise InputError(f"cannot read {p}: {exc.strerror}") from None
    rows = []
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        except (csv.Error, UnicodeDecodeError) as exc:
            raise ParseError(str(exc), 1) from None
        if tuple(h.strip() for h in header) != HEADER:
            raise ParseError(f"header must be {','.join(HEADER)}, got {','.join(header)}", 1)
        aware = None
        try:
            for row in reader:
                line = reader.line_num
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 2:
                    raise ParseError(f"expected 2 fields, got {len(row)}", line)
                ts = parse_timestamp(row[0], line)
                if aware is None:
                    aware = ts.tzinfo is not None
                elif aware != (ts.tzinfo is not None):
                    raise ParseError("mix of timestamps with and without UTC offset", line)
                try:
                    value = float(row[1])
                except ValueError:
                    raise ParseError(f"not a number: {row[1]!r}", line) from None
                if not math.isfinite(value):
                    raise ParseError(f"non-finite value {row[1]!r}", line)
                rows.append((line, ts, value))
        except (csv.Error, UnicodeDecodeError) as exc:
            raise ParseError(str(exc), reader.line_num) from None
    if not rows:
        raise ParseError("no data rows", 2)
    return rows


def assemble(rows, sampling_period: timedelta = DEFAULT_SAMPLING_PERIOD,
             gap_fill_limit: int = 4, min_coverage: float = 0.9) -> IngestResult:
    """Place rows on the sampling grid, fill short gaps, split at long ones.

    Gaps of at most ``gap_fill_limit`` missing samples are filled by linear
    interpolation and flagged invalid; longer gaps end the current chunk.

    Raises
    ------
    OrderingError
        Timestamps not strictly increasing.
    ParseError
        A timestamp off the sampling grid.
    CoverageError
        Fewer than ``min_coverage`` of the spanned samples present.
    """
    t0 = rows[0][1]
    idx = []
    for line, ts, _ in rows:
        steps = (ts - t0) / sampling_period
        if idx and steps <= idx[-1]:
            raise OrderingError(f"line {line}: timestamp {ts.isoformat()} does not increase")
        k = round(steps)
        if abs(steps - k) > 1e-9:
            raise ParseError(f"timestamp {ts.isoformat()} is off the {sampling_period} grid", line)
        idx.append(k)
    idx = np.array(idx)
    values = np.array([v for _, _, v in rows])
    span = int(idx[-1]) + 1
    coverage = idx.size / span
    if coverage < min_coverage:
        raise CoverageError(f"coverage {coverage:.1%} is below {min_coverage:.0%}")

    chunks, offsets, filled = [], [], 0
    missing = np.diff(idx) - 1
    cuts = np.flatnonzero(missing > gap_fill_limit) + 1
    for part in np.split(np.arange(idx.size), cuts):
        k, v = idx[part], values[part]
        grid = np.arange(k[0], k[-1] + 1)
        full = np.interp(grid, k, v)
        mask = np.zeros(grid.size, dtype=bool)
        mask[k - k[0]] = True
        filled += int(grid.size - k.size)
        chunks.append(TimeSeries(full, sampling_period, t0 + int(k[0]) * sampling_period, mask))
        offsets.append(int(k[0]))
    return IngestResult(chunks, float(coverage), len(rows), filled, offsets)


def ingest_csv(path: str | Path, gap_fill_limit: int = 4, min_coverage: float = 0.9,
               sampling_period: timedelta = DEFAULT_SAMPLING_PERIOD) -> IngestResult:
    """Read a ``timestamp,consumption_wh`` file into gap-free chunks."""
    return assemble(read_rows(path), sampling_period, gap_fill_limit, min_coverage)


def write_csv(path: str | Path, series: TimeSeries) -> None:
    """Write ``series`` in the input format (valid samples only)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for i, (v, ok) in enumerate(zip(series.values.tolist(), series.valid_mask.tolist())):
            if ok:
                w.writerow([series.time_at(i).isoformat(), repr(v)])
