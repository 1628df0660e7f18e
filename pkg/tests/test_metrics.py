import math

import numpy as np
import pytest

from strokecomplexity.metrics import (
    C1,
    C2,
    C3,
    C3_CTD,
    MetricsRow,
    MixedScripts,
    ZeroUnicodes,
    compute_row,
    curvelength,
    net_shape_complexity,
    shape_complexity_per_unicode,
    stability_index,
    strokes_per_unicode,
    summarize_script,
    variants,
)
from strokecomplexity.model import Glyph, PipelineConfig, ShapePointCensus, ShapePointKind as K, Stroke, WordRecord
from strokecomplexity.preprocess import resample_stroke
from strokecomplexity.synth import SyntheticSpec, generate, word_from_shapes

from conftest import line

Cen = ShapePointCensus.of


def test_variant_kind_sets():
    assert {k.value for k in C1.included_kinds} == set("EBXCTDA")
    assert {k.value for k in C2.included_kinds} == set("BXCTDA")
    assert {k.value for k in C3.included_kinds} == set("CTDA")
    assert {k.value for k in C3_CTD.included_kinds} == set("CTD")
    assert variants(PipelineConfig(c3_kinds="ctd"))[2] is C3_CTD


@pytest.mark.parametrize(
    "census,variant,expected",
    [(Cen(E=2), C1, 2), (Cen(A=1), C1, 3), (Cen(), C1, 0), (Cen(), C3, 0),
     (Cen(B=4, A=1), C1, 7), (Cen(B=4, A=1), C3, 3), (Cen(B=4, A=1), C3_CTD, 0), (Cen(E=5, T=1), C2, 2)],
)
def test_net_shape_complexity(census, variant, expected):
    assert net_shape_complexity(census, variant) == expected


def test_per_unicode():
    assert shape_complexity_per_unicode(10, 5) == 2.0
    assert shape_complexity_per_unicode(0, 3) == 0.0
    assert shape_complexity_per_unicode(7, 4) == 1.75
    with pytest.raises(ZeroUnicodes):
        shape_complexity_per_unicode(1, 0)


def test_strokes_per_unicode():
    assert strokes_per_unicode(8, 4) == 2.0
    assert strokes_per_unicode(0, 4) == 0.0
    assert strokes_per_unicode(5, 4) == 1.25
    with pytest.raises(ZeroUnicodes):
        strokes_per_unicode(1, 0)


def test_stability_index():
    assert stability_index(Cen(E=2, B=1, C=1)) == 3.0
    assert stability_index(Cen(B=4, A=1)) == 4.0
    assert stability_index(Cen(E=2)) == math.inf
    assert stability_index(Cen()) == math.inf


def test_curvelength_examples():
    seg = Glyph((resample_stroke(Stroke(0, [[0, 0], [1, 0]]), 64),))
    assert curvelength(seg) == pytest.approx(1.0, abs=1e-9)
    two = Glyph((Stroke(0, [[0, 0], [1, 0]]), Stroke(1, [[0, 1], [0, 2]])))
    assert curvelength(two) == pytest.approx(2.0, abs=1e-12)
    th = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    gon = np.vstack([np.column_stack([0.5 * np.cos(th), 0.5 * np.sin(th)]), [[0.5, 0.0]]])
    # a closed inscribed 64-gon of radius 0.5
    assert curvelength(Glyph((Stroke(0, gon),))) == pytest.approx(2 * 64 * 0.5 * math.sin(math.pi / 64), rel=1e-12)
    assert abs(curvelength(Glyph((Stroke(0, gon),))) - math.pi) / math.pi < 0.002


def _one_glyph_word(shape, transcription="क"):
    return word_from_shapes([shape], "s", transcription, "w")


def test_compute_row_circle():
    row = compute_row(_one_glyph_word("circle"))
    assert row.census == Cen(B=4, A=1)
    assert row.net_c1 == 7 and row.c1_per_unicode == 7.0
    assert row.net_c3 == 3
    assert row.stability == 4.0
    assert row.stroke_count == 1 and row.strokes_per_unicode == 1.0


def test_compute_row_empty_census():
    row = compute_row(WordRecord("s", "क", (Stroke(0, [[0, 0], [1, 0]]),), "w"), censuses=[Cen()])
    assert (row.net_c1, row.net_c2, row.net_c3) == (0, 0, 0)
    assert row.stability == math.inf


def test_compute_row_zero_unicodes():
    with pytest.raises(ZeroUnicodes):
        compute_row(_one_glyph_word("line", " "))


def test_compute_row_uses_c3_option():
    row = compute_row(_one_glyph_word("circle"), PipelineConfig(c3_kinds="ctd"))
    assert row.net_c3 == 0


def _row(script, word, net_census, unicodes):
    return MetricsRow.build(script, word, unicodes, 1, net_census, 1.0)


def test_summary_single_row_equals_row():
    r = compute_row(_one_glyph_word("t_junction", "कख"))
    s = summarize_script([r])
    for name in MetricsRow.__dataclass_fields__:
        assert getattr(s, name) == getattr(r, name)
    assert s.word_count == 1


def test_summary_ratio_of_sums():
    a = _row("s", "a", Cen(A=1), 2)  # net 3 over 2
    b = _row("s", "b", Cen(E=7), 3)  # net 7 over 3
    s = summarize_script([a, b])
    assert s.c1_per_unicode == 2.0
    assert s.unicode_count == 5 and s.net_c1 == 10
    assert s.stability == 7.0


def test_summary_rejects_mixed_scripts():
    with pytest.raises(MixedScripts):
        summarize_script([_row("tamil", "a", Cen(), 1), _row("telugu", "b", Cen(), 1)])


def test_row_record_fields():
    rec = _row("s", "w", Cen(E=2, A=1), 2).as_record()
    assert rec["n_E"] == 2 and rec["n_A"] == 1 and "census" not in rec
