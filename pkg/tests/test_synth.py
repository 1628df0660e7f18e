import numpy as np
import pytest

from strokecomplexity.model import PipelineConfig, ShapePointCensus, ShapePointKind as K
from strokecomplexity.preprocess import preprocess_glyph
from strokecomplexity.shapepoints import classify_glyph
from strokecomplexity.synth import (
    GROUND_TRUTH,
    SHAPES,
    BadSpec,
    SurvivalRow,
    SyntheticSpec,
    brute_force_census,
    census_of,
    demo_dataset,
    generate,
    mini_scripts,
    perturb,
    perturbation_study,
    random_glyph,
    trial_seed,
)

CFG = PipelineConfig()


def _spec(shape, **prm):
    return SyntheticSpec(shape, samples=8 if shape == "dot" else 200, parameters=prm)


@pytest.mark.parametrize("shape", SHAPES)
def test_ground_truth(shape):
    spec = _spec(shape)
    assert census_of(generate(spec), CFG) == spec.ground_truth == GROUND_TRUTH[shape]


def test_closed_lemniscate():
    with pytest.raises(BadSpec):
        _spec("lemniscate", gap=0.0)
    spec = SyntheticSpec("lemniscate", samples=400, parameters={"gap": 0.0})
    assert spec.ground_truth == ShapePointCensus.of(A=1, B=5, X=1)
    assert census_of(generate(spec), CFG) == spec.ground_truth


@pytest.mark.parametrize("shape", ["line", "corner", "t_junction", "circle"])
def test_ground_truth_is_scale_and_offset_free(shape):
    spec = _spec(shape, scale=250.0, offset=(1000.0, -40.0))
    assert census_of(generate(spec), CFG) == spec.ground_truth


def test_bad_specs():
    with pytest.raises(BadSpec):
        SyntheticSpec("spiral")
    with pytest.raises(BadSpec):
        SyntheticSpec("line", samples=1)
    with pytest.raises(BadSpec):
        SyntheticSpec("circle", parameters={"scale": -1})
    with pytest.raises(BadSpec):
        SyntheticSpec("lemniscate", parameters={"gap": 1.0})
    with pytest.raises(BadSpec):
        SyntheticSpec("circle", samples=100)
    SyntheticSpec("dot", samples=1)


def test_perturb_zero_is_identity():
    g = generate(_spec("arc"))
    assert perturb(g, 0.0, seed=3) == g


def test_perturb_is_seeded_and_bounded():
    g = generate(_spec("t_junction"))
    a, b = perturb(g, 0.15, seed=11), perturb(g, 0.15, seed=11)
    assert a == b
    assert perturb(g, 0.15, seed=12) != a
    for s0, s1 in zip(g.strokes, a.strokes):
        disp = np.abs(s1.points - s0.points)
        assert disp.max() == pytest.approx(0.15, rel=1e-12)
    with pytest.raises(ValueError):
        perturb(g, -1.0)


def test_trial_seed_rule():
    a = np.random.default_rng(trial_seed(7, 3)).random()
    b = np.random.default_rng(np.random.SeedSequence(7, spawn_key=(3,))).random()
    assert a == b
    assert np.random.default_rng(trial_seed(7, 4)).random() != a


@pytest.mark.parametrize("seed", range(0, 40, 3))
def test_oracle_matches_detectors_on_random_glyphs(seed):
    g = preprocess_glyph(random_glyph(seed), CFG)
    assert brute_force_census(g, CFG) == classify_glyph(g, CFG)[1]


def test_oracle_under_other_configs():
    for cfg in (PipelineConfig(delta_id=0.1), PipelineConfig(c3_kinds="ctd", theta_cusp=100.0), PipelineConfig(delta_id=0.0)):
        for seed in range(8):
            g = preprocess_glyph(random_glyph(seed), cfg)
            assert brute_force_census(g, cfg) == classify_glyph(g, cfg)[1]


def test_survival_row_bounds():
    assert SurvivalRow("line", K.E, 0.15, 0.95, 100).passed
    assert not SurvivalRow("line", K.E, 0.15, 0.94, 100).passed
    assert SurvivalRow("dot", K.D, 0.15, 0.05, 100).passed
    assert not SurvivalRow("dot", K.D, 0.15, 0.06, 100).passed


def test_study_is_worker_independent():
    pairs = (("line", K.E), ("dot", K.D))
    a = perturbation_study(CFG, trials=12, seed=5, pairs=pairs, workers=1)
    b = perturbation_study(CFG, trials=12, seed=5, pairs=pairs, workers=2)
    assert a == b
    assert a[0].magnitude == pytest.approx(0.15)


def test_zero_magnitude_keeps_every_point():
    rows = perturbation_study(CFG, trials=3, magnitude=0.0)
    assert all(r.survival_rate == 1.0 for r in rows)


def test_demo_dataset_shape():
    ds = demo_dataset()
    assert [r.word_id for r in ds.records] == ["w1", "w2", "w3", "w4", "w5"]
    assert ds.scripts == ["synthetic"]


def test_mini_scripts():
    ds = mini_scripts(words=4)
    assert ds.scripts == ["junction", "stable"]
    assert len(ds.records) == 8
