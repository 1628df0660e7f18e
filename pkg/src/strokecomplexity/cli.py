"""Command-line entry point: ``strokecx {analyze,compare,annotate,verify}``.

Exit status: 0 success, 1 I/O or parse failure, 2 some records failed
validation (outputs for the valid ones are still written), 3 the
verification suite found a failing property.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

from . import metrics, report, synth
from .ingest import EncodingError, MalformedFile, load_dataset, merge_datasets, validate_record
from .model import InvariantViolation, PipelineConfig
from .preprocess import SegmentationParams, preprocess_word
from .shapepoints import classify_glyph

log = logging.getLogger("strokecx")

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    """Bad input files, config or arguments; reported with exit status 1."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

_CFG_FIELDS = {f.name for f in fields(PipelineConfig)}
_SEG_FIELDS = {f.name for f in fields(SegmentationParams)}


def load_config(path: str | None) -> tuple[PipelineConfig, SegmentationParams]:
    """Defaults overlaid with a JSON object of field values."""
    cfg, seg = PipelineConfig(), SegmentationParams()
    if path is None:
        return cfg, seg
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    unknown = sorted(set(doc) - _CFG_FIELDS - _SEG_FIELDS)
    if unknown:
        raise UsageError(f"config {path}: unknown keys {unknown}")
    try:
        cfg = cfg.updated(**{k: v for k, v in doc.items() if k in _CFG_FIELDS})
        seg = SegmentationParams(**{k: v for k, v in doc.items() if k in _SEG_FIELDS})
    except (InvariantViolation, TypeError) as exc:
        raise UsageError(f"config {path}: {exc}") from exc
    return cfg, seg


def resolve_config(args) -> tuple[PipelineConfig, SegmentationParams]:
    cfg, seg = load_config(args.config)
    try:
        cfg = cfg.updated(
            resample_n=args.resample,
            sigma_s=args.sigma,
            delta_id=args.delta_id,
            c3_kinds=args.c3_kinds,
        )
    except InvariantViolation as exc:
        raise UsageError(str(exc)) from exc
    return cfg, seg


# --------------------------------------------------------------------------
# dataset processing
# --------------------------------------------------------------------------

def _load_inputs(paths: list[str]):
    missing = [p for p in paths if not os.access(p, os.R_OK)]
    if missing:
        raise UsageError(f"cannot read input {missing[0]}")
    try:
        return merge_datasets([load_dataset(p) for p in paths])
    except (MalformedFile, EncodingError, InvariantViolation) as exc:
        raise UsageError(str(exc)) from exc
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from exc


def _process(job):
    """Worker: metrics row of one record and, on request, its glyph SVGs."""
    index, record, cfg, seg, annotate = job
    word = preprocess_word(record, seg, cfg)
    classified = [classify_glyph(g, cfg) for g in word.glyphs]
    row = metrics.compute_row(word, cfg, [c for _, c in classified])
    svgs = []
    if annotate:
        for gi, (g, (points, _)) in enumerate(zip(word.glyphs, classified)):
            title = f"{record.script} {record.word_id} glyph {gi}"
            svgs.append(report.render_annotated_glyph(g, points, title))
    return index, row, svgs


def analyze_records(dataset, cfg, seg, workers=1, annotate=False):
    """Rows (sorted by script, word) for the valid records, the problems found, and SVGs."""
    problems, jobs = [], []
    for i, rec in enumerate(dataset.records):
        issues = validate_record(rec)
        if issues:
            problems.extend(issues)
            continue
        jobs.append((i, rec, cfg, seg, annotate))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_process, jobs))
    else:
        results = [_process(j) for j in jobs]
    results.sort(key=lambda r: (r[1].script, r[1].word, r[0]))
    rows = [r[1] for r in results]
    svgs = [(r[1].script, r[1].word, r[2]) for r in results]
    return rows, problems, svgs


def _write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def _write_svgs(out: Path, svgs):
    for script, word, docs in svgs:
        for gi, doc in enumerate(docs):
            _write(report.annotation_path(out / "annotations", script, word, gi), doc)


def _finish(out: Path, problems: list[str]) -> int:
    target = out / "violations.txt"
    if problems:
        _write(target, report.emit_violations(problems))
        for p in problems:
            log.warning("%s", p)
        return EXIT_INVALID
    if target.exists():
        target.unlink()
    return EXIT_OK


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    cfg, seg = resolve_config(args)
    dataset = _load_inputs([args.input])
    out = Path(args.out)
    rows, problems, svgs = analyze_records(dataset, cfg, seg, args.workers, args.annotate)
    ext = args.format
    _write(out / f"metrics.{ext}", report.emit_rows(rows, ext))
    _write(out / f"summary.{ext}", report.emit_rows(metrics.summarize_all(rows, cfg), ext))
    if args.annotate:
        _write_svgs(out, svgs)
    return _finish(out, problems)


def cmd_compare(args) -> int:
    cfg, seg = resolve_config(args)
    dataset = _load_inputs(args.inputs)
    if len(dataset.scripts) < 2:
        raise UsageError(f"compare needs at least 2 scripts, found {len(dataset.scripts)}")
    out = Path(args.out)
    rows, problems, _ = analyze_records(dataset, cfg, seg, args.workers)
    summaries = metrics.summarize_all(rows, cfg)
    if len(summaries) < 2:
        raise UsageError("fewer than 2 scripts have valid records")
    tables = report.comparison_tables(summaries)
    _write(out / f"comparison.{args.format}", report.emit_summary(tables, args.format))
    return _finish(out, problems)


def cmd_annotate(args) -> int:
    cfg, seg = resolve_config(args)
    dataset = _load_inputs([args.input])
    out = Path(args.out)
    _, problems, svgs = analyze_records(dataset, cfg, seg, args.workers, annotate=True)
    _write_svgs(out, svgs)
    return _finish(out, problems)


def cmd_verify(args) -> int:
    cfg, _ = resolve_config(args)
    result = synth.run_suite(cfg, trials=args.trials, seed=args.seed, workers=args.workers)
    out = Path(args.out)
    _write(out / "survival.csv", report.emit_survival(result.survival))
    sys.stdout.write(report.emit_survival(result.survival).decode("utf-8"))
    for f in result.failures:
        print(f"FAIL {f}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_VERIFY


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON object of configuration fields")
    common.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
    common.add_argument("--resample", type=int, metavar="N", help="points per resampled stroke")
    common.add_argument("--sigma", type=float, metavar="S", help="Gaussian smoothing sigma, in samples")
    common.add_argument("--delta-id", type=float, metavar="D", help="identification radius (normalized units)")
    common.add_argument("--c3-kinds", choices=("ctda", "ctd"), help="kinds weighted by complexity C3")
    common.add_argument("--seed", type=int, default=0, help="base seed for randomized studies")
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="strokecx", description="Shape-point analysis of handwritten strokes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="per-word metrics and per-script summary")
    p.add_argument("input")
    p.add_argument("--annotate", action="store_true", help="also render each glyph to SVG")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", parents=[common], help="per-script comparison tables")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("annotate", parents=[common], help="render annotated glyphs to SVG")
    p.add_argument("input")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("verify", parents=[common], help="run the synthetic verification suite")
    p.add_argument("--trials", type=int, default=1000, help="perturbation trials per shape")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="strokecx: %(message)s",
    )
    if args.workers < 1:
        print("strokecx: --workers must be at least 1", file=sys.stderr)
        return EXIT_IO
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"strokecx: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"strokecx: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
