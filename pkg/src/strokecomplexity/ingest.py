"""Reading and validating stroke datasets.

Two on-disk formats are supported:

``json``
    ``{"format_version": "1", "records": [...]}``. Each record has
    ``script``, ``transcription`` and ``strokes``; a stroke is a list of
    ``[x, y]`` pairs in drawing order, or ``{"id": n, "points": [...]}``.
    Optional per-record keys: ``word_id`` and ``glyphs`` (lists of stroke
    ids, which skip automatic segmentation).

``csv``
    Header ``word_id,script,transcription,stroke_id,x,y``; one sample per
    row, grouped by word and then stroke, sample order = row order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from .model import InvariantViolation, Stroke, WordRecord

FORMAT_VERSION = "1"
CSV_HEADER = ["word_id", "script", "transcription", "stroke_id", "x", "y"]

# ZWNJ and ZWJ shape rendering only; they spell no vowel or consonant
_JOINERS = {"‌", "‍"}


class MalformedFile(ValueError):
    pass


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    records: tuple[WordRecord, ...]
    source_path: str = ""
    format_version: str = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    @property
    def scripts(self) -> list[str]:
        return sorted({r.script for r in self.records})


def count_unicodes(transcription: str) -> int:
    """Number of Unicode scalar values, ignoring whitespace and ZWJ/ZWNJ."""
    return sum(1 for ch in transcription if not ch.isspace() and ch not in _JOINERS)


def guess_format(path: str | Path) -> str:
    return "csv" if str(path).lower().endswith((".csv", ".tsv")) else "json"


def _decode(raw: bytes | str) -> str:
    if isinstance(raw, str):
        return raw
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"input is not valid UTF-8: {exc}") from exc


def _coord(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise MalformedFile(f"{where}: coordinate {value!r} is not a number")
    try:
        v = float(value)
    except ValueError as exc:
        raise MalformedFile(f"{where}: coordinate {value!r} is not a number") from exc
    if not math.isfinite(v):
        raise MalformedFile(f"{where}: coordinate {value!r} is not finite")
    return v


def _reject_constant(name):
    raise MalformedFile(f"non-finite literal {name} is not allowed")


def _parse_json(text: str, source: str) -> Dataset:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{source}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("records"), list):
        raise MalformedFile(f"{source}: expected an object with a 'records' list")
    version = str(doc.get("format_version", FORMAT_VERSION))

    records = []
    for ri, rec in enumerate(doc["records"]):
        where = f"{source}: record {ri}"
        if not isinstance(rec, dict):
            raise MalformedFile(f"{where}: expected an object")
        script = rec.get("script", "")
        transcription = rec.get("transcription", "")
        if not isinstance(script, str) or not isinstance(transcription, str):
            raise MalformedFile(f"{where}: script and transcription must be strings")
        raw_strokes = rec.get("strokes")
        if not isinstance(raw_strokes, list):
            raise MalformedFile(f"{where}: 'strokes' must be a list")

        strokes = []
        for si, raw in enumerate(raw_strokes):
            sid = si
            if isinstance(raw, dict):
                sid = raw.get("id", si)
                if isinstance(sid, bool) or not isinstance(sid, int):
                    raise MalformedFile(f"{where}: stroke id {sid!r} must be an integer")
                raw = raw.get("points")
            if not isinstance(raw, list):
                raise MalformedFile(f"{where}: stroke {si} must be a list of [x, y] pairs")
            pts = []
            for pi, pair in enumerate(raw):
                if not isinstance(pair, list) or len(pair) != 2:
                    raise MalformedFile(f"{where}: stroke {si} sample {pi} is not an [x, y] pair")
                pts.append((_coord(pair[0], where), _coord(pair[1], where)))
            if not pts:
                raise InvariantViolation(f"{where}: stroke {sid} has no samples")
            strokes.append(Stroke(sid, pts))

        groups = rec.get("glyphs")
        if groups is not None:
            if not (isinstance(groups, list) and all(isinstance(g, list) for g in groups)):
                raise MalformedFile(f"{where}: 'glyphs' must be a list of stroke-id lists")
            groups = tuple(tuple(int(i) for i in g) for g in groups)

        records.append(
            WordRecord(
                script=script,
                transcription=transcription,
                strokes=tuple(strokes),
                word_id=str(rec.get("word_id", ri)),
                glyph_groups=groups,
            )
        )
    if not records:
        raise InvariantViolation(f"{source}: dataset has no records")
    return Dataset(tuple(records), source, version)


def _parse_csv(text: str, source: str) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedFile(f"{source}: empty file") from None
    if [h.strip() for h in header] != CSV_HEADER:
        raise MalformedFile(f"{source}: header must be {','.join(CSV_HEADER)}")

    words: dict[str, dict] = {}
    order: list[str] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise MalformedFile(f"{source}:{lineno}: expected {len(CSV_HEADER)} columns")
        word_id, script, transcription, stroke_id, x, y = row
        where = f"{source}:{lineno}"
        try:
            sid = int(stroke_id)
        except ValueError:
            raise MalformedFile(f"{where}: stroke_id {stroke_id!r} is not an integer") from None
        point = (_coord(x, where), _coord(y, where))

        w = words.get(word_id)
        if w is None:
            w = words[word_id] = {"script": script, "transcription": transcription, "strokes": []}
            order.append(word_id)
        elif order[-1] != word_id:
            raise InvariantViolation(f"{where}: rows of word {word_id} are not contiguous")
        elif (w["script"], w["transcription"]) != (script, transcription):
            raise MalformedFile(f"{where}: word {word_id} changes script or transcription")

        strokes = w["strokes"]
        if strokes and strokes[-1][0] == sid:
            strokes[-1][1].append(point)
        else:
            # a stroke id seen again later becomes a second stroke; validation reports it
            strokes.append((sid, [point]))

    records = [
        WordRecord(
            script=words[wid]["script"],
            transcription=words[wid]["transcription"],
            strokes=tuple(Stroke(sid, pts) for sid, pts in words[wid]["strokes"]),
            word_id=wid,
        )
        for wid in order
    ]
    if not records:
        raise InvariantViolation(f"{source}: dataset has no records")
    return Dataset(tuple(records), source, FORMAT_VERSION)


def parse_dataset(raw: bytes | str, format: str = "json", source_path: str = "<memory>") -> Dataset:
    """Parse dataset bytes in ``json`` or ``csv`` format."""
    text = _decode(raw)
    if format == "json":
        return _parse_json(text, source_path)
    if format == "csv":
        return _parse_csv(text, source_path)
    raise ValueError(f"unknown dataset format {format!r}")


def load_dataset(path: str | Path, format: str | None = None) -> Dataset:
    path = Path(path)
    return parse_dataset(path.read_bytes(), format or guess_format(path), str(path))


def serialize_dataset(dataset: Dataset, format: str = "json") -> bytes:
    if format == "json":
        records = []
        for rec in dataset.records:
            out = {
                "word_id": rec.word_id,
                "script": rec.script,
                "transcription": rec.transcription,
                "strokes": [
                    {"id": s.id, "points": [[float(x), float(y)] for x, y in s.points]}
                    for s in rec.strokes
                ],
            }
            if rec.glyph_groups is not None:
                out["glyphs"] = [list(g) for g in rec.glyph_groups]
            records.append(out)
        doc = {"format_version": dataset.format_version, "records": records}
        return (json.dumps(doc, ensure_ascii=False, indent=1) + "\n").encode("utf-8")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in dataset.records:
            for s in rec.strokes:
                for x, y in s.points:
                    writer.writerow([rec.word_id, rec.script, rec.transcription, s.id, repr(float(x)), repr(float(y))])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown dataset format {format!r}")


def validate_record(rec: WordRecord) -> list[str]:
    problems = []
    name = f"record {rec.word_id!r} ({rec.script or '?'})"
    if not rec.script:
        problems.append(f"{name}: empty script identifier")
    if count_unicodes(rec.transcription) < 1:
        problems.append(f"{name}: transcription has no countable code points")
    if not rec.strokes:
        problems.append(f"{name}: no strokes")
    ids = [s.id for s in rec.strokes]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        problems.append(f"{name}: duplicate stroke ids {dupes}")
    if rec.glyph_groups is not None:
        grouped = [i for g in rec.glyph_groups for i in g]
        if len(grouped) != len(set(grouped)):
            problems.append(f"{name}: a stroke belongs to more than one glyph")
        unknown = sorted(set(grouped) - set(ids))
        if unknown:
            problems.append(f"{name}: glyphs reference unknown strokes {unknown}")
        if any(not g for g in rec.glyph_groups):
            problems.append(f"{name}: empty glyph group")
    return problems


def validate_dataset(dataset: Dataset) -> list[str]:
    """All invariant violations in ``dataset``; empty when it is clean."""
    problems = []
    if not dataset.records:
        problems.append("dataset has no records")
    for rec in dataset.records:
        problems.extend(validate_record(rec))
    return problems


def merge_datasets(datasets: Sequence[Dataset]) -> Dataset:
    records = tuple(r for d in datasets for r in d.records)
    return Dataset(records, ";".join(d.source_path for d in datasets))
