from datetime import datetime, timedelta

import numpy as np
import pytest

from holidet.errors import CoverageError, InputError, OrderingError, ParseError
from holidet.ingest import ingest_csv, parse_timestamp, read_rows, write_csv
from holidet.series import TimeSeries

T0 = datetime(2020, 1, 1)
STEP = timedelta(minutes=30)


def write(path, rows, header="timestamp,consumption_wh"):
    path.write_text(header + "\n" + "".join(f"{t},{v}\n" for t, v in rows), encoding="utf-8")
    return path


def rows_for(n, skip=()):
    return [((T0 + i * STEP).isoformat(), float(i % 7)) for i in range(n) if i not in skip]


def test_two_year_file_single_chunk(tmp_path):
    n = 2 * 365 * 48 + 48  # 2020 is a leap year
    res = ingest_csv(write(tmp_path / "a.csv", rows_for(n)))
    assert len(res.chunks) == 1 and len(res.series) == n == 35088
    assert res.coverage == 1.0 and res.n_filled == 0


def test_single_missing_sample_is_interpolated(tmp_path):
    res = ingest_csv(write(tmp_path / "a.csv", rows_for(200, skip={50})))
    ts = res.series
    assert len(ts) == 200 and not ts.valid_mask[50] and ts.valid_mask.sum() == 199
    assert ts.values[50] == pytest.approx((ts.values[49] + ts.values[51]) / 2)
    assert res.n_filled == 1


def test_long_outage_splits(tmp_path):
    res = ingest_csv(write(tmp_path / "a.csv", rows_for(4000, skip=set(range(1000, 1144)))))
    assert [len(c) for c in res.chunks] == [1000, 2856]
    assert res.chunks[1].start_time == T0 + 1144 * STEP
    assert res.chunk_offsets == [0, 1144]
    with pytest.raises(InputError):
        res.series


def test_gap_at_fill_limit_is_filled(tmp_path):
    res = ingest_csv(write(tmp_path / "a.csv", rows_for(100, skip={10, 11, 12, 13})), gap_fill_limit=4)
    assert len(res.chunks) == 1
    res = ingest_csv(write(tmp_path / "b.csv", rows_for(100, skip={10, 11, 12, 13, 14})), gap_fill_limit=4)
    assert len(res.chunks) == 2


def test_low_coverage(tmp_path):
    with pytest.raises(CoverageError):
        ingest_csv(write(tmp_path / "a.csv", rows_for(100, skip=set(range(20, 35)))))


def test_non_monotone(tmp_path):
    rows = rows_for(10)
    rows[5], rows[6] = rows[6], rows[5]
    with pytest.raises(OrderingError):
        ingest_csv(write(tmp_path / "a.csv", rows))
    with pytest.raises(OrderingError):
        ingest_csv(write(tmp_path / "b.csv", rows_for(10) + [rows_for(10)[-1]]))


@pytest.mark.parametrize("line,content", [
    (4, "2020-01-01T01:00:00,abc"),
    (4, "not-a-time,1.0"),
    (4, "2020-01-01T01:00:00,1.0,2.0"),
    (4, "2020-01-01T01:00:00,nan"),
    (4, "2020-01-01T01:10:00,1.0"),
])
def test_malformed_rows_report_line(tmp_path, line, content):
    p = tmp_path / "a.csv"
    rows = "".join(f"{t},{v}\n" for t, v in rows_for(2))
    p.write_text("timestamp,consumption_wh\n" + rows + content + "\n")
    with pytest.raises(ParseError) as err:
        ingest_csv(p)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_header_and_empty(tmp_path):
    with pytest.raises(ParseError):
        ingest_csv(write(tmp_path / "a.csv", rows_for(5), header="time,value"))
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(ParseError):
        ingest_csv(tmp_path / "e.csv")
    with pytest.raises(InputError):
        ingest_csv(tmp_path / "missing.csv")


def test_timezones(tmp_path):
    assert parse_timestamp("2020-01-01T00:00:00Z").utcoffset() == timedelta(0)
    rows = [("2020-01-01T00:00:00+00:00", 1), ("2020-01-01T00:30:00", 2)]
    with pytest.raises(ParseError):
        read_rows(write(tmp_path / "a.csv", rows))


def test_bom_is_accepted(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("﻿timestamp,consumption_wh\n2020-01-01T00:00:00,1.5\n", encoding="utf-8")
    assert read_rows(p)[0][2] == 1.5


def test_write_read_round_trip(tmp_path, rng):
    ts = TimeSeries(rng.uniform(0, 500, 300), start_time=T0)
    write_csv(tmp_path / "a.csv", ts)
    back = ingest_csv(tmp_path / "a.csv").series
    assert np.array_equal(back.values, ts.values) and back.start_time == T0
