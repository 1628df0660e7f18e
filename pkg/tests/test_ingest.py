import json
import unicodedata

import pytest

from strokecomplexity.ingest import (
    Dataset,
    EncodingError,
    MalformedFile,
    count_unicodes,
    load_dataset,
    merge_datasets,
    parse_dataset,
    serialize_dataset,
    validate_dataset,
)
from strokecomplexity.model import InvariantViolation, Stroke, WordRecord


def _doc(records):
    return json.dumps({"format_version": "1", "records": records})


def test_parse_one_word_two_strokes():
    raw = _doc([{"script": "s", "transcription": "ab", "strokes": [[[0, 0], [1, 1], [2, 2]], [[5, 5], [6, 6], [7, 7]]]}])
    ds = parse_dataset(raw.encode())
    assert len(ds.records) == 1
    rec = ds.records[0]
    assert len(rec.strokes) == 2
    assert sum(len(s) for s in rec.strokes) == 6
    assert [s.id for s in rec.strokes] == [0, 1]


def test_zero_sample_stroke_is_invariant_violation():
    raw = _doc([{"script": "s", "transcription": "a", "strokes": [[]]}])
    with pytest.raises(InvariantViolation):
        parse_dataset(raw)


@pytest.mark.parametrize("bad", ["NaN", "Infinity"])
def test_nonfinite_json_literal_is_malformed(bad):
    raw = '{"records": [{"script": "s", "transcription": "a", "strokes": [[[0, %s]]]}]}' % bad
    with pytest.raises(MalformedFile):
        parse_dataset(raw)


def test_nan_string_in_csv_is_malformed():
    raw = "word_id,script,transcription,stroke_id,x,y\nw,s,a,0,NaN,1\n"
    with pytest.raises(MalformedFile):
        parse_dataset(raw, "csv")


def test_invalid_utf8():
    with pytest.raises(EncodingError):
        parse_dataset(b"\xff\xfe{", "json")


@pytest.mark.parametrize(
    "raw",
    ["[1, 2]", '{"records": 3}', '{"records": [{"script": 1, "transcription": "a", "strokes": []}]}',
     '{"records": [{"script": "s", "transcription": "a", "strokes": [[[0]]]}]}', "{"],
)
def test_malformed_json(raw):
    with pytest.raises(MalformedFile):
        parse_dataset(raw)


def test_empty_record_list():
    with pytest.raises(InvariantViolation):
        parse_dataset('{"records": []}')


def test_stroke_objects_and_glyph_groups():
    raw = _doc([{"word_id": "w9", "script": "s", "transcription": "a",
                 "strokes": [{"id": 4, "points": [[0, 0]]}, {"id": 7, "points": [[1, 1]]}],
                 "glyphs": [[4], [7]]}])
    rec = parse_dataset(raw).records[0]
    assert rec.word_id == "w9"
    assert [s.id for s in rec.strokes] == [4, 7]
    assert rec.glyph_groups == ((4,), (7,))


def test_csv_parse_and_contiguity():
    raw = (
        "word_id,script,transcription,stroke_id,x,y\n"
        "w1,s,ab,0,0,0\nw1,s,ab,0,1,0\nw1,s,ab,1,2,2\nw2,s,c,0,0,0\n"
    )
    ds = parse_dataset(raw, "csv")
    assert [r.word_id for r in ds.records] == ["w1", "w2"]
    assert [len(s) for s in ds.records[0].strokes] == [2, 1]
    with pytest.raises(InvariantViolation):
        parse_dataset(raw + "w1,s,ab,2,0,0\n", "csv")
    with pytest.raises(MalformedFile):
        parse_dataset("a,b\n", "csv")


def _unicode_oracle(text):
    # independent recount by Unicode general category: Z* separators, Cc
    # controls and the two joiners are excluded
    return sum(
        1 for ch in text
        if not unicodedata.category(ch).startswith("Z")
        and ch not in "\t\n\r\x0b\x0c"
        and ch not in ("‌", "‍")
    )


def test_count_unicodes_examples():
    assert count_unicodes("ठाणे") == 4
    assert [hex(ord(c)) for c in "ठाणे"] == ["0x920", "0x93e", "0x923", "0x947"]
    assert count_unicodes("") == 0
    # the scalars are फ त े ह प ु र and स ि क ् र ी, thirteen in all
    assert count_unicodes("फतेहपुर सिक्री") == 13
    assert count_unicodes("फतेहपुर सिक्री") == _unicode_oracle("फतेहपुर सिक्री")


def test_count_unicodes_skips_joiners():
    assert count_unicodes("क्‍ष") == 3
    assert count_unicodes("क्‌ष") == 3


def test_validate_dataset():
    good = WordRecord("s", "ab", (Stroke(0, [[0, 0]]),), "w1")
    assert validate_dataset(Dataset((good,))) == []
    empty = WordRecord("s", "", (Stroke(0, [[0, 0]]),), "w2")
    problems = validate_dataset(Dataset((good, empty)))
    assert len(problems) == 1 and "'w2'" in problems[0]
    dup = WordRecord("s", "a", (Stroke(0, [[0, 0]]), Stroke(0, [[1, 1]])), "w3")
    problems = validate_dataset(Dataset((dup,)))
    assert len(problems) == 1 and "duplicate" in problems[0]
    assert validate_dataset(Dataset(())) == ["dataset has no records"]


def test_validate_glyph_groups():
    rec = WordRecord("s", "a", (Stroke(0, [[0, 0]]), Stroke(1, [[1, 1]])), "w", glyph_groups=((0, 1), (1, 5)))
    problems = validate_dataset(Dataset((rec,)))
    assert any("more than one glyph" in p for p in problems)
    assert any("unknown strokes [5]" in p for p in problems)


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_round_trip(fmt, tmp_path):
    rec = WordRecord("tamil", "தமிழ்", (Stroke(0, [[0.1, 0.2], [1.5, -3.0]]), Stroke(1, [[7, 8]])), "w1")
    ds = Dataset((rec,))
    raw = serialize_dataset(ds, fmt)
    path = tmp_path / f"d.{fmt}"
    path.write_bytes(raw)
    back = load_dataset(path)
    assert back.records[0].strokes == rec.strokes
    assert (back.records[0].script, back.records[0].transcription) == ("tamil", "தமிழ்")
    assert serialize_dataset(back, fmt) == raw


def test_merge_and_scripts():
    a = Dataset((WordRecord("b", "x", (Stroke(0, [[0, 0]]),)),), "a.json")
    b = Dataset((WordRecord("a", "y", (Stroke(0, [[0, 0]]),)),), "b.json")
    m = merge_datasets([a, b])
    assert len(m.records) == 2 and m.scripts == ["a", "b"]
