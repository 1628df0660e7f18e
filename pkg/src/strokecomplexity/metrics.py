"""Complexity measures per word and per script.

Every measure is a pure function of a census, a glyph or a set of rows.
Aggregation over a script sums numerators and unicode counts first and
divides last.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, fields

from .ingest import count_unicodes
from .model import (
    COUNTED_KINDS,
    Glyph,
    PipelineConfig,
    ShapePointCensus,
    ShapePointKind,
    WordRecord,
)
from .preprocess import arc_length, preprocess_word
from .shapepoints import classify_glyph

K = ShapePointKind


class ZeroUnicodes(ValueError):
    """A per-unicode ratio was requested for an empty transcription."""


class MixedScripts(ValueError):
    """Rows from more than one script were passed to a per-script fold."""


@dataclass(frozen=True)
class ComplexityVariant:
    name: str
    included_kinds: frozenset

    def __post_init__(self):
        object.__setattr__(self, "included_kinds", frozenset(ShapePointKind(k) for k in self.included_kinds))
        if K.I in self.included_kinds:
            raise ValueError("interior points carry no weight")


C1 = ComplexityVariant("C1", frozenset(COUNTED_KINDS))
C2 = ComplexityVariant("C2", frozenset(COUNTED_KINDS) - {K.E})
C3 = ComplexityVariant("C3", frozenset({K.C, K.T, K.D, K.A}))
C3_CTD = ComplexityVariant("C3", frozenset({K.C, K.T, K.D}))


def variants(cfg: PipelineConfig | None = None) -> tuple[ComplexityVariant, ...]:
    """(C1, C2, C3) with C3 chosen by ``cfg.c3_kinds``."""
    cfg = cfg or PipelineConfig()
    return C1, C2, (C3 if cfg.c3_kinds == "ctda" else C3_CTD)


def net_shape_complexity(census: ShapePointCensus, variant: ComplexityVariant = C1) -> int:
    """Sum of (1 + codimension) * N over the kinds the variant includes."""
    return sum((1 + k.codimension) * census[k] for k in variant.included_kinds)


def shape_complexity_per_unicode(net: float, unicode_count: int) -> float:
    if unicode_count <= 0:
        raise ZeroUnicodes("unicode count must be at least 1")
    return net / unicode_count


def strokes_per_unicode(stroke_count: int, unicode_count: int) -> float:
    if unicode_count <= 0:
        raise ZeroUnicodes("unicode count must be at least 1")
    return stroke_count / unicode_count


def curvelength(glyph: Glyph) -> float:
    """Total polyline length of all strokes."""
    return sum(arc_length(s.points) for s in glyph.strokes)


def stability_index(census: ShapePointCensus) -> float:
    """Stable over unstable counts; ``math.inf`` when nothing is unstable."""
    unstable = census.unstable_total
    if unstable == 0:
        return math.inf
    return census.stable_total / unstable


@dataclass(frozen=True)
class MetricsRow:
    script: str
    word: str
    unicode_count: int
    stroke_count: int
    census: ShapePointCensus
    net_c1: int
    net_c2: int
    net_c3: int
    c1_per_unicode: float
    c2_per_unicode: float
    c3_per_unicode: float
    curvelength: float
    curvelength_per_unicode: float
    stability: float
    strokes_per_unicode: float

    @classmethod
    def build(
        cls,
        script: str,
        word: str,
        unicode_count: int,
        stroke_count: int,
        census: ShapePointCensus,
        length: float,
        cfg: PipelineConfig | None = None,
    ) -> MetricsRow:
        """Derive every ratio field from the raw totals."""
        nets = [net_shape_complexity(census, v) for v in variants(cfg)]
        return cls(
            script=script,
            word=word,
            unicode_count=unicode_count,
            stroke_count=stroke_count,
            census=census,
            net_c1=nets[0],
            net_c2=nets[1],
            net_c3=nets[2],
            c1_per_unicode=shape_complexity_per_unicode(nets[0], unicode_count),
            c2_per_unicode=shape_complexity_per_unicode(nets[1], unicode_count),
            c3_per_unicode=shape_complexity_per_unicode(nets[2], unicode_count),
            curvelength=length,
            curvelength_per_unicode=length / unicode_count,
            stability=stability_index(census),
            strokes_per_unicode=strokes_per_unicode(stroke_count, unicode_count),
        )

    def as_record(self) -> dict:
        """Flat mapping for serialization; census counts appear as n_E .. n_A."""
        out = {}
        for f in fields(self):
            if f.name == "census":
                out.update({f"n_{k}": v for k, v in self.census.as_dict().items()})
            else:
                out[f.name] = getattr(self, f.name)
        return out


def compute_row(
    word: WordRecord,
    cfg: PipelineConfig | None = None,
    censuses: Sequence[ShapePointCensus] | None = None,
) -> MetricsRow:
    """Metrics of one word.

    ``word`` is preprocessed here when it has no glyphs yet. Glyph censuses
    are computed with the detectors unless supplied.
    """
    cfg = cfg or PipelineConfig()
    if word.glyphs is None:
        word = preprocess_word(word, cfg=cfg)
    if censuses is None:
        censuses = [classify_glyph(g, cfg)[1] for g in word.glyphs]
    census = sum(censuses, ShapePointCensus())
    length = sum(curvelength(g) for g in word.glyphs)
    return MetricsRow.build(
        word.script,
        word.word_id,
        count_unicodes(word.transcription),
        len(word.strokes),
        census,
        length,
        cfg,
    )


@dataclass(frozen=True)
class ScriptSummary(MetricsRow):
    """Totals over a script's words, with ratios taken from the totals."""

    word_count: int = 0

    def value(self, measure: str) -> float:
        """Value of one of the six compared measures."""
        return {
            "strokes_per_unicode": self.strokes_per_unicode,
            "curvelength_per_unicode": self.curvelength_per_unicode,
            "stability": self.stability,
            "c1": self.c1_per_unicode,
            "c2": self.c2_per_unicode,
            "c3": self.c3_per_unicode,
        }[measure]


def summarize_script(rows: Iterable[MetricsRow], cfg: PipelineConfig | None = None) -> ScriptSummary:
    rows = sorted(rows, key=lambda r: r.word)
    if not rows:
        raise ValueError("no rows to summarize")
    scripts = {r.script for r in rows}
    if len(scripts) > 1:
        raise MixedScripts(f"rows span several scripts: {sorted(scripts)}")
    census = sum((r.census for r in rows), ShapePointCensus())
    base = MetricsRow.build(
        rows[0].script,
        rows[0].word if len(rows) == 1 else "*",
        sum(r.unicode_count for r in rows),
        sum(r.stroke_count for r in rows),
        census,
        math.fsum(r.curvelength for r in rows),
        cfg,
    )
    values = {f.name: getattr(base, f.name) for f in fields(MetricsRow)}
    return ScriptSummary(**values, word_count=len(rows))


def summarize_all(rows: Iterable[MetricsRow], cfg: PipelineConfig | None = None) -> list[ScriptSummary]:
    """One summary per script, ordered by script id."""
    by_script: dict[str, list[MetricsRow]] = {}
    for r in rows:
        by_script.setdefault(r.script, []).append(r)
    return [summarize_script(by_script[s], cfg) for s in sorted(by_script)]
