"""Command-line interface: ``holidet analyze|evaluate|fit-ratio|synth|bench``.

Exit codes: 0 success, 2 input error, 3 configuration error, 4 partial
failure (some households errored).
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import PipelineConfig, load_config, parse_value
from .errors import ConfigError, HolidetError, InputError

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_PARTIAL = 0, 2, 3, 4


# --- shared helpers ----------------------------------------------------------


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline configuration (flags override --config)")
    g.add_argument("--config", type=Path, help="flat 'key = value' config file")
    for f in fields(PipelineConfig):
        g.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None, metavar=f.type.upper(),
                       help=f"default {f.default}")


def _config(args) -> PipelineConfig:
    overrides = {f.name: parse_value(f.name, getattr(args, f.name))
                 for f in fields(PipelineConfig) if getattr(args, f.name) is not None}
    return load_config(args.config, overrides)


def _workers(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes (default 1)")


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    """``fn`` over ``items`` in input order, on at most ``workers`` processes."""
    if workers < 1:
        raise ConfigError(f"--workers must be at least 1, got {workers}")
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


def _household_ids(paths: Iterable[Path]) -> list[str]:
    ids = [p.stem for p in paths]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        raise InputError(f"duplicate household id(s) from file names: {', '.join(dup)}")
    return ids


def _read_truth(path: Path, offsets: list[int], lengths: list[int]) -> list[np.ndarray]:
    import json
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        total = np.sum(np.asarray(data["components"], dtype=float), axis=0)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: unusable ground truth ({exc})") from None
    if total.ndim != 1 or total.size < offsets[-1] + lengths[-1]:
        raise InputError(f"{path}: ground truth does not cover the series")
    return [total[o:o + n] for o, n in zip(offsets, lengths)]


def _write_table(path: Path, rows: list[dict]) -> None:
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _out_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create {path}: {exc.strerror}") from None
    return path


# --- analyze -----------------------------------------------------------------


def _analyze_one(job: tuple) -> tuple[str, str | None, int]:
    """Worker: ingest, analyse and write one household. Returns (id, error, holidays)."""
    from .ingest import ingest_csv
    from .pipeline import analyze_household
    from .report import emit_outputs

    path, hid, config, out, formats, truth_dir = job
    try:
        ing = ingest_csv(path, config.gap_fill_limit, config.min_coverage)
        truths = None
        if truth_dir is not None:
            truths = _read_truth(Path(truth_dir) / f"{hid}.truth.json", ing.chunk_offsets,
                                 [len(c) for c in ing.chunks])
        report = analyze_household(ing.chunks, config, hid, truths)
        emit_outputs(report, ing.chunks, out, formats,
                     meta={"input": str(path), "coverage": ing.coverage, "n_rows": ing.n_rows,
                           "n_filled": ing.n_filled})
    except HolidetError as exc:
        return hid, f"{type(exc).__name__}: {exc}", 0
    if report.failed:
        return hid, "; ".join(c.error for c in report.chunks if c.error), 0
    return hid, None, len(report.holidays)


def cmd_analyze(args) -> int:
    config = _config(args)
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    from .report import FORMATS
    bad = sorted(set(formats) - set(FORMATS))
    if bad:
        raise ConfigError(f"unknown output format(s): {', '.join(bad)}")
    ids = _household_ids(args.inputs)
    _out_dir(args.out)
    jobs = [(p, h, config, args.out, formats, args.truth_dir) for p, h in zip(args.inputs, ids)]
    results = _map(_analyze_one, jobs, args.workers)
    failed = 0
    for hid, err, n in results:
        if err:
            failed += 1
            print(f"{hid}: ERROR {err}", file=sys.stderr)
        else:
            print(f"{hid}: {n} holiday interval(s)")
    if failed == 0:
        return EXIT_OK
    return EXIT_INPUT if failed == len(results) else EXIT_PARTIAL


# --- evaluate / fit-ratio ----------------------------------------------------


def cmd_evaluate(args) -> int:
    from .pipeline import evaluate, read_labels
    from .report import dumps, read_report, write_json

    reports = [read_report(p) for p in args.reports]
    result = evaluate(reports, read_labels(args.labels))
    if args.out:
        write_json(args.out, result.to_dict())
    for hid, m in sorted(result.per_household.items()):
        print(f"{hid}: precision={m.precision:.4f} recall={m.recall:.4f} f1={m.f1:.4f}")
    print(f"macro F1 = {result.macro_f1:.4f}")
    if args.verbose:
        print(dumps(result.to_dict()), end="")
    return EXIT_OK


def _labelled_one(job):
    from .ingest import ingest_csv
    from .pipeline import labelled_household
    path, hid, config, labels = job
    ing = ingest_csv(path, config.gap_fill_limit, config.min_coverage)
    return labelled_household(hid, ing.chunks, labels, config)


def cmd_fit_ratio(args) -> int:
    from .occupancy import DEFAULT_RATIO_GRID, fit_ratio
    from .pipeline import read_labels
    from .report import write_json

    config = _config(args)
    labels = read_labels(args.labels)
    ids = _household_ids(args.inputs)
    grid = DEFAULT_RATIO_GRID
    if args.grid:
        try:
            grid = [float(x) for x in args.grid.split(",")]
        except ValueError:
            raise ConfigError(f"--grid: not a list of numbers: {args.grid!r}") from None
    data = _map(_labelled_one, [(p, h, config, labels) for p, h in zip(args.inputs, ids)], args.workers)
    result = fit_ratio(data, config.classifier, grid, args.folds, config.seed)
    for f in result.folds:
        print(f"fold {f.fold}: ratio={f.ratio:g} eval macro F1={f.macro_f1:.4f}")
    print(f"{config.classifier}: best ratio {result.best_ratio:g}, "
          f"cross-validated macro F1 {result.mean_macro_f1:.4f}")
    if args.out:
        write_json(args.out, {
            "classifier": config.classifier, "best_ratio": result.best_ratio,
            "mean_macro_f1": result.mean_macro_f1, "folds": [
                {"fold": f.fold, "ratio": f.ratio, "macro_f1": f.macro_f1,
                 "fit_households": list(f.fit_households), "eval_households": list(f.eval_households),
                 "pooled": f.report.to_dict()} for f in result.folds]})
    return EXIT_OK


# --- synth -------------------------------------------------------------------


def _seeds(text: str) -> list[int]:
    out = []
    try:
        for part in text.split(","):
            if "-" in part.strip()[1:]:
                a, b = part.rsplit("-", 1)
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise ConfigError(f"bad seed list {text!r}; use e.g. 0-19 or 1,5,9") from None
    return out


def _write_household(seed: int, years: int, out: Path, config: PipelineConfig):
    from .bench import synthetic_household
    from .ingest import write_csv
    from .pipeline import truth_labels
    from .report import write_json

    lh, truth = synthetic_household(seed, config, years)
    chunk = lh.chunks[0]
    hid = lh.household_id
    write_csv(out / f"{hid}.csv", chunk.series)
    write_json(out / f"{hid}.truth.json", truth.to_dict())
    ts = chunk.series
    wins = [(ts.time_at(a), ts.time_at(b)) for a, b in chunk.segmentation.windows()]
    return truth_labels(hid, wins, chunk.truth)


def cmd_synth(args) -> int:
    from .pipeline import write_labels
    from .report import write_json
    from .synthgen import CASE_TABLE, case_to_dict, generate_case, named_case
    from .ingest import write_csv

    out = _out_dir(args.out)
    if args.kind == "case":
        names = list(CASE_TABLE) if args.name.lower() == "all" else [args.name.upper()]
        for name in names:
            if name not in CASE_TABLE:
                raise ConfigError(f"unknown case {name!r}; choose from {', '.join(CASE_TABLE)} or all")
            case = named_case(name, args.data_seed if args.data_seed is not None else 42)
            ts, truth = generate_case(case)
            write_csv(out / f"case-{name}.csv", ts)
            write_json(out / f"case-{name}.truth.json", {"case": case_to_dict(case), **truth.to_dict()})
            print(out / f"case-{name}.csv")
        return EXIT_OK
    config = _config(args)
    seeds = _seeds(args.data_seeds) if args.kind == "suite" else [args.data_seed if args.data_seed is not None else 0]
    labels = []
    for s in seeds:
        labels += _write_household(s, args.years, out, config)
    write_labels(out / "labels.csv", labels)
    print(f"{len(seeds)} household(s) and labels.csv written to {out}")
    return EXIT_OK


# --- bench -------------------------------------------------------------------


def cmd_bench(args) -> int:
    from . import bench
    from .report import write_json

    out = _out_dir(args.out)
    config = _config(args)
    results = bench.run_cases(args.data_seed, config=config.extraction)
    rows = bench.case_rows(results)
    _write_table(out / "cases.csv", rows)
    print("case  periods        nMAE")
    for r in rows:
        per = f"{r['period_1']}/{r['period_2']}"
        err = "/".join("-" if e is None else f"{e:.3f}" for e in (r["nmae_1"], r["nmae_2"]))
        print(f"{r['case']:<5} {per:<14} {err:<14} periods {'ok' if r['periods_ok'] else 'FAIL'}, "
              f"bands {'ok' if r['bands_ok'] else 'FAIL'}")
    ordering = bench.ordering_check(results)
    print(f"ordering easy < offset < overlap: {'ok' if ordering else 'FAIL'}")
    summary = {"seed": args.data_seed, "cases": rows, "ordering_ok": ordering}
    if not args.no_plot:
        from .plotting import plot_cases
        plot_cases(out / "cases.svg", results)
    if not args.no_suite:
        hs = _map(_suite_one, [(s, config) for s in _seeds(args.suite_seeds)], args.workers)
        suite = bench.classifier_suite(hs, folds=args.folds)
        crow = [{"classifier": k, "macro_f1": v["macro_f1"], "best_ratio": v["best_ratio"]}
                for k, v in suite.items()]
        _write_table(out / "classifiers.csv", crow)
        for r in crow:
            print(f"{r['classifier']:<12} macro F1 {r['macro_f1']:.3f}")
        summary["classifiers"] = suite
    write_json(out / "bench.json", summary)
    return EXIT_OK


def _suite_one(job):
    from .bench import synthetic_household
    seed, config = job
    return synthetic_household(seed, config)[0]


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from . import __version__
    p = argparse.ArgumentParser(prog="holidet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="print full metrics JSON (evaluate)")
    sub = p.add_subparsers(dest="verb", required=True)

    a = sub.add_parser("analyze", help="detect holidays and extract periodic loads")
    a.add_argument("inputs", nargs="+", type=Path, help="meter CSV files; file stem = household id")
    a.add_argument("-o", "--out", type=Path, default=Path("holidet-out"))
    a.add_argument("--format", default="json,csv", help="comma list of json, csv, svg")
    a.add_argument("--truth-dir", type=Path, help="directory of <id>.truth.json files for nMAE")
    _workers(a)
    _add_config_flags(a)
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("evaluate", help="score report window labels against a label file")
    e.add_argument("reports", nargs="+", type=Path, help="report JSON files")
    e.add_argument("-l", "--labels", type=Path, required=True)
    e.add_argument("-o", "--out", type=Path, help="write metrics JSON here")
    e.set_defaults(func=cmd_evaluate)

    f = sub.add_parser("fit-ratio", help="cross-validate the classifier ratio on labelled households")
    f.add_argument("inputs", nargs="+", type=Path)
    f.add_argument("-l", "--labels", type=Path, required=True)
    f.add_argument("--folds", type=int, default=5)
    f.add_argument("--grid", help="comma list of candidate ratios")
    f.add_argument("-o", "--out", type=Path)
    _workers(f)
    _add_config_flags(f)
    f.set_defaults(func=cmd_fit_ratio)

    s = sub.add_parser("synth", help="generate synthetic cases or labelled households")
    s.add_argument("kind", choices=("case", "household", "suite"))
    s.add_argument("name", nargs="?", default="all", help="case letter A-H or 'all' (kind=case)")
    s.add_argument("--data-seed", type=int, help="generator seed (default 42 for cases, 0 for a household)")
    s.add_argument("--data-seeds", default="0-19", help="generator seed list for kind=suite")
    s.add_argument("--years", type=int, default=2)
    s.add_argument("-o", "--out", type=Path, default=Path("synth"))
    _add_config_flags(s)
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", help="run the synthetic benchmark")
    b.add_argument("--data-seed", type=int, default=42, help="generator seed of the cases")
    b.add_argument("--suite-seeds", default="0-19")
    b.add_argument("--folds", type=int, default=5)
    b.add_argument("--no-suite", action="store_true", help="skip the classifier suite")
    b.add_argument("--no-plot", action="store_true")
    b.add_argument("-o", "--out", type=Path, default=Path("bench-out"))
    _workers(b)
    _add_config_flags(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"holidet: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HolidetError as exc:
        print(f"holidet: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
