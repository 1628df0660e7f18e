"""Segmentation, size normalization, Gaussian smoothing and resampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Glyph, InvariantViolation, PipelineConfig, Stroke, WordRecord, main_stroke_id


class DegenerateGlyph(ValueError):
    """Every stroke of the glyph has zero y-span."""


@dataclass(frozen=True)
class SegmentationParams:
    """Controls how strokes are grouped into characters.

    Two strokes share a character when their x-extents overlap by at least
    ``overlap_fraction`` of the narrower extent. A stroke narrower than
    ``gap_threshold`` (a dot or short diacritic mark) also joins a stroke
    whose x-extent lies closer than ``gap_threshold``.
    """

    overlap_fraction: float = 0.1
    gap_threshold: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.overlap_fraction <= 1.0:
            raise InvariantViolation("overlap_fraction must lie in [0, 1]")
        if not self.gap_threshold > 0:
            raise InvariantViolation("gap_threshold must be positive")


def _linked(a: tuple[float, float], b: tuple[float, float], p: SegmentationParams) -> bool:
    overlap = min(a[1], b[1]) - max(a[0], b[0])
    narrow = min(a[1] - a[0], b[1] - b[0])
    if overlap >= 0 and overlap >= p.overlap_fraction * narrow:
        return True
    return narrow < p.gap_threshold and -overlap < p.gap_threshold


def segment_characters(word: WordRecord, p: SegmentationParams | None = None) -> list[Glyph]:
    """Group the strokes of ``word`` into glyphs, ordered left to right."""
    p = p or SegmentationParams()
    strokes = list(word.strokes)
    if not strokes:
        raise InvariantViolation("cannot segment a word without strokes")
    extents = [(float(s.x.min()), float(s.x.max())) for s in strokes]

    parent = list(range(len(strokes)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(strokes)):
        for j in range(i + 1, len(strokes)):
            if _linked(extents[i], extents[j], p):
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in range(len(strokes)):
        groups.setdefault(find(i), []).append(i)

    glyphs = [Glyph(tuple(strokes[i] for i in members)) for members in groups.values()]
    glyphs.sort(key=lambda g: (g.bbox()[0], min(s.id for s in g.strokes)))
    return glyphs


def glyphs_from_groups(word: WordRecord) -> list[Glyph]:
    """Glyphs as declared by the input file, in declaration order."""
    by_id = {s.id: s for s in word.strokes}
    return [Glyph(tuple(by_id[i] for i in group)) for group in word.glyph_groups]


def normalize_glyph(g: Glyph, strict: bool = False) -> Glyph:
    """Translate the glyph to the origin and divide by the main stroke's height.

    When every stroke is flat the widest stroke's x-span is used instead, and
    a glyph made only of dots is returned untouched. With ``strict=True`` a
    flat glyph raises :class:`DegenerateGlyph`.
    """
    main_id = main_stroke_id(g.strokes)
    factor = g.stroke(main_id).y_span
    if factor <= 0:
        if strict:
            raise DegenerateGlyph("all strokes have zero y-span")
        factor = max(s.x_span for s in g.strokes)
        if factor <= 0:
            return Glyph(g.strokes, main_id, g.scale_factor, g.label)

    xmin, ymin, _, _ = g.bbox()
    origin = np.array([xmin, ymin])
    strokes = tuple(s.with_points((s.points - origin) / factor) for s in g.strokes)
    return Glyph(strokes, main_id, g.scale_factor * factor, g.label)


def gaussian_kernel(cfg: PipelineConfig, normalize: bool = True) -> np.ndarray:
    """g(u) = exp(-(u - mu)^2 / (2 sigma^2)) / (sqrt(2 pi) sigma) for u = 1..window."""
    u = np.arange(1, cfg.kernel_window + 1, dtype=float)
    g = np.exp(-((u - cfg.mu) ** 2) / (2 * cfg.sigma_s**2)) / (math.sqrt(2 * math.pi) * cfg.sigma_s)
    if normalize:
        g = g / g.sum()
    return g


def _smooth_1d(v: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    n, w = len(v), len(kernel)
    half = w // 2
    if n >= w:
        padded = np.concatenate([np.full(half, v[0]), v, np.full(half, v[-1])])
        # correlation; the kernel may be asymmetric when mu is off-center
        return np.convolve(padded, kernel[::-1], mode="valid")
    out = np.empty(n)
    offsets = np.arange(w) - half
    for i in range(n):
        idx = i + offsets
        ok = (idx >= 0) & (idx < n)
        wts = kernel[ok]
        out[i] = np.dot(wts, v[idx[ok]]) / wts.sum()
    return out


def smooth_stroke(s: Stroke, cfg: PipelineConfig | None = None) -> Stroke:
    """Convolve X(t) and Y(t) with the unit-sum discrete Gaussian."""
    cfg = cfg or PipelineConfig()
    k = gaussian_kernel(cfg)
    pts = np.column_stack([_smooth_1d(s.x, k), _smooth_1d(s.y, k)])
    return s.with_points(pts)


def arc_length(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    return float(np.sum(np.hypot(*np.diff(points, axis=0).T)))


def resample_stroke(s: Stroke, n: int = 64) -> Stroke:
    """Linear interpolation to ``n`` points equally spaced in arc length."""
    if n < 2:
        raise ValueError("n must be at least 2")
    pts = s.points
    seg = np.hypot(*np.diff(pts, axis=0).T) if len(pts) > 1 else np.zeros(0)
    keep = np.concatenate([[True], seg > 0])
    pts, seg = pts[keep], seg[seg > 0]
    if len(pts) < 2:
        return s.with_points(np.repeat(s.points[:1], n, axis=0))

    cum = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.linspace(0.0, cum[-1], n)
    out = np.column_stack([np.interp(target, cum, pts[:, 0]), np.interp(target, cum, pts[:, 1])])
    out[0], out[-1] = pts[0], pts[-1]
    return s.with_points(out)


def preprocess_glyph(g: Glyph, cfg: PipelineConfig | None = None) -> Glyph:
    """Normalize, then smooth and resample every stroke."""
    cfg = cfg or PipelineConfig()
    g = normalize_glyph(g)
    strokes = tuple(resample_stroke(smooth_stroke(s, cfg), cfg.resample_n) for s in g.strokes)
    return Glyph(strokes, g.main_stroke_id, g.scale_factor, g.label)


def preprocess_word(
    word: WordRecord,
    p: SegmentationParams | None = None,
    cfg: PipelineConfig | None = None,
) -> WordRecord:
    """Segment the word into glyphs and preprocess each one."""
    cfg = cfg or PipelineConfig()
    if word.glyph_groups is not None:
        glyphs = glyphs_from_groups(word)
    else:
        glyphs = segment_characters(word, p)
    return word.with_glyphs(preprocess_glyph(g, cfg) for g in glyphs)
