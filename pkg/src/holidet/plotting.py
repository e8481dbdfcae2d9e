"""Static SVG figures: a consumption curve with shaded holiday intervals,
and the synthetic benchmark summary."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import InputError  # noqa: E402

HOLIDAY_COLOR = "tab:orange"
SVG_SALT = "holidet"


def _save(fig, path: Path) -> None:
    # a fixed hash salt and no date keep the SVG byte-identical across runs
    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT}):
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise InputError(f"cannot write {path}: {exc.strerror}") from None
        finally:
            plt.close(fig)


def plot_household(path: str | Path, chunks, report, title: str | None = None) -> Path:
    """Write the series of every chunk with one shaded span per holiday interval.

    Each span carries the SVG id ``holiday-<n>`` so the intervals can be
    located in the output.
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(12, 3.5))
    n = 0
    for series, chunk in zip(chunks, report.chunks):
        t = np.array([series.time_at(i) for i in range(len(series))])
        ax.plot(t, series.values, lw=0.4, color="tab:blue")
        for h in chunk.holidays:
            ax.axvspan(h.start, h.end, color=HOLIDAY_COLOR, alpha=0.3, lw=0, gid=f"holiday-{n}")
            n += 1
    ax.set_ylabel("consumption (Wh)")
    ax.set_title(title or report.household_id)
    fig.autofmt_xdate()
    fig.tight_layout()
    _save(fig, path)
    return path


def plot_cases(path: str | Path, results: dict, names: Sequence[str] | None = None) -> Path:
    """Aggregate signal and extracted components of each benchmark case."""
    path = Path(path)
    names = list(names or results)
    fig, axes = plt.subplots(len(names), 1, figsize=(10, 1.6 * len(names)), sharex=True, squeeze=False)
    for ax, name in zip(axes[:, 0], names):
        r = results[name]
        agg = r.truth.recompose()
        show = slice(0, min(len(agg), 480))
        ax.plot(agg[show], lw=0.6, color="0.6")
        for k, ex in enumerate(r.extractions):
            ax.plot(ex.component.values[show], lw=0.8, label=f"pass {k + 1}: P={ex.period:g}")
        ax.set_ylabel(name, rotation=0, labelpad=12)
        if r.extractions:
            ax.legend(loc="upper right", fontsize=6, frameon=False)
    axes[-1, 0].set_xlabel("sample")
    fig.tight_layout()
    _save(fig, path)
    return path
