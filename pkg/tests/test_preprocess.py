import math

import numpy as np
import pytest

from strokecomplexity.model import Glyph, PipelineConfig, Stroke, WordRecord
from strokecomplexity.preprocess import (
    DegenerateGlyph,
    SegmentationParams,
    arc_length,
    gaussian_kernel,
    normalize_glyph,
    preprocess_word,
    resample_stroke,
    segment_characters,
    smooth_stroke,
)

from conftest import line


def _word(*strokes):
    return WordRecord("s", "ab", tuple(Stroke(i, p) for i, p in enumerate(strokes)))


def _bar(x0, x1, y=0.0):
    return [[x0, y], [x1, y + 1.0]]


def _closure_components(extents, p):
    """Transitive closure of pairwise links, by repeated relaxation."""
    labels = list(range(len(extents)))
    changed = True
    while changed:
        changed = False
        for i, a in enumerate(extents):
            for j, b in enumerate(extents):
                overlap = min(a[1], b[1]) - max(a[0], b[0])
                narrow = min(a[1] - a[0], b[1] - b[0])
                linked = (overlap >= 0 and overlap >= p.overlap_fraction * narrow) or (
                    narrow < p.gap_threshold and -overlap < p.gap_threshold
                )
                if linked and labels[i] != labels[j]:
                    labels[i] = labels[j] = min(labels[i], labels[j])
                    changed = True
    return len(set(labels))


def test_two_clusters_split():
    p = SegmentationParams(gap_threshold=5.0)
    glyphs = segment_characters(_word(_bar(0, 10), _bar(20, 30)), p)
    assert len(glyphs) == 2
    assert _closure_components([(0, 10), (20, 30)], p) == 2
    assert glyphs[0].bbox()[0] == 0.0


def test_single_stroke_single_glyph():
    glyphs = segment_characters(_word(_bar(0, 3)))
    assert len(glyphs) == 1 and len(glyphs[0].strokes) == 1


def test_chained_overlap_merges():
    p = SegmentationParams(overlap_fraction=0.1)
    ext = [(0, 10), (8, 18), (16, 26)]
    glyphs = segment_characters(_word(*[_bar(a, b) for a, b in ext]), p)
    assert len(glyphs) == 1
    assert _closure_components(ext, p) == 1


def test_five_strokes_two_characters():
    strokes = [_bar(0, 10), _bar(2, 8, 3), [[5, 12]], _bar(30, 40), _bar(32, 38, 2)]
    w = _word(*strokes)
    out = preprocess_word(w)
    assert len(out.glyphs) == 2
    assert sum(len(g.strokes) for g in out.glyphs) == 5


def test_normalize_span_example():
    g = Glyph((Stroke(0, [[1, 3], [2, 5]]),))
    n = normalize_glyph(g)
    assert n.scale_factor == 2.0
    assert n.main_stroke.y_span == pytest.approx(1.0, abs=1e-12)
    assert n.bbox()[:2] == (0.0, 0.0)


def test_normalize_two_strokes():
    g = Glyph((Stroke(0, [[0, 0], [0, 2]]), Stroke(1, [[1, 0], [1, 1]])))
    n = normalize_glyph(g)
    assert n.stroke(0).y_span == pytest.approx(1.0)
    assert n.stroke(1).y_span == pytest.approx(0.5)


def test_normalize_single_point_passes_through():
    g = Glyph((Stroke(0, [[4, 4]]),))
    n = normalize_glyph(g)
    assert n.scale_factor == 1.0
    assert np.array_equal(n.strokes[0].points, g.strokes[0].points)


def test_normalize_flat_glyph():
    g = Glyph((Stroke(0, [[0, 1], [4, 1]]),))
    assert normalize_glyph(g).scale_factor == 4.0
    with pytest.raises(DegenerateGlyph):
        normalize_glyph(g, strict=True)


def test_kernel_peak_value():
    raw = gaussian_kernel(PipelineConfig(), normalize=False)
    assert len(raw) == 21
    assert raw[10] == pytest.approx(1 / (3 * math.sqrt(2 * math.pi)), rel=1e-12)
    assert raw[10] == pytest.approx(0.13298, abs=5e-6)
    assert gaussian_kernel(PipelineConfig()).sum() == pytest.approx(1.0, abs=1e-12)


def test_smooth_constant_is_identity():
    s = Stroke(0, np.full((50, 2), 3.25))
    assert np.allclose(smooth_stroke(s).points, 3.25, atol=1e-12)


def test_smooth_line_interior_unchanged():
    t = np.arange(100, dtype=float)
    s = Stroke(0, np.column_stack([t, t]))
    out = smooth_stroke(s).points
    assert np.allclose(out[10:-10], s.points[10:-10], atol=1e-9)


def test_smooth_short_stroke_uses_truncated_kernel():
    s = Stroke(0, [[0, 0], [1, 0], [2, 0]])
    out = smooth_stroke(s).points
    assert out.shape == (3, 2)
    assert out[1, 0] == pytest.approx(1.0)


def test_resample_segment():
    s = Stroke(0, [[0, 0], [1, 0]])
    out = resample_stroke(s, 64).points
    assert np.allclose(out[:, 0], np.arange(64) / 63, atol=1e-12)
    assert np.all(out[:, 1] == 0)


def test_resample_corner():
    s = Stroke(0, [[0, 0], [1, 0], [1, 1]])
    assert np.allclose(resample_stroke(s, 3).points, [[0, 0], [1, 0], [1, 1]])


def test_resample_dot():
    out = resample_stroke(Stroke(0, [[2, 3]]), 64).points
    assert out.shape == (64, 2) and np.all(out == [2, 3])


def test_resample_preserves_circle_length():
    th = np.linspace(0, 2 * math.pi, 400)
    s = Stroke(0, np.column_stack([np.cos(th), np.sin(th)]))
    out = resample_stroke(s, 64)
    assert np.array_equal(out.points[0], s.points[0])
    assert np.array_equal(out.points[-1], s.points[-1])
    assert arc_length(out.points) == pytest.approx(arc_length(s.points), rel=0.01)


def test_preprocess_word_sample_counts_and_determinism():
    w = _word(line((0, 0), (0, 10), 37), line((0, 5), (4, 5), 5), [[20, 3]])
    a = preprocess_word(w)
    b = preprocess_word(w)
    for g in a.glyphs:
        for s in g.strokes:
            assert len(s) == 64
    assert [[s.points.tobytes() for s in g.strokes] for g in a.glyphs] == [
        [s.points.tobytes() for s in g.strokes] for g in b.glyphs
    ]


def test_glyph_groups_bypass_segmentation():
    w = WordRecord("s", "a", (Stroke(0, _bar(0, 1)), Stroke(1, _bar(0, 1))), glyph_groups=((1,), (0,)))
    out = preprocess_word(w)
    assert [g.strokes[0].id for g in out.glyphs] == [1, 0]
