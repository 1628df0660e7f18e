"""Synthetic glyphs, smooth perturbations and a brute-force census oracle.

Every generated shape has a census known by construction (see
``GROUND_TRUTH``). Shapes are drawn with a main-stroke height of
``scale`` so perturbation magnitudes are in normalized units at the
default ``scale=1``.

The oracle in :func:`brute_force_census` re-derives the census from raw
coordinates with plain Python loops over every sample pair and every
segment pair. It shares no code with :mod:`strokecomplexity.shapepoints`.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ingest import Dataset
from .model import (
    Glyph,
    PipelineConfig,
    ShapePointCensus,
    ShapePointKind,
    Stroke,
    WordRecord,
)
from .preprocess import preprocess_glyph
from .shapepoints import classify_glyph

SHAPES = ("line", "circle", "arc", "cusp_curve", "lemniscate", "t_junction", "corner", "dot", "plus")

GROUND_TRUTH = {
    "line": ShapePointCensus.of(E=2),
    "circle": ShapePointCensus.of(B=4, A=1),
    "arc": ShapePointCensus.of(E=2, B=1),
    "cusp_curve": ShapePointCensus.of(E=2, C=1),
    # a figure-eight always has extremal tangents: three in each lobe, minus
    # the two cut off by the opening at the left tip
    "lemniscate": ShapePointCensus.of(E=2, B=5, X=1),
    "lemniscate_closed": ShapePointCensus.of(A=1, B=5, X=1),
    "t_junction": ShapePointCensus.of(E=3, T=1),
    "corner": ShapePointCensus.of(E=2, A=1),
    "dot": ShapePointCensus.of(D=1),
    "plus": ShapePointCensus.of(E=4, X=1),
}

# (shape, kind) pairs of the perturbation study
STUDY = (
    ("line", ShapePointKind.E),
    ("arc", ShapePointKind.B),
    ("lemniscate", ShapePointKind.X),
    ("cusp_curve", ShapePointKind.C),
    ("t_junction", ShapePointKind.T),
    ("dot", ShapePointKind.D),
    ("corner", ShapePointKind.A),
)


class BadSpec(ValueError):
    pass


# Edge-replicated smoothing pulls each end of a stroke about 1.2 raw samples
# inward. A closed stroke keeps its closure (and its A point) only while the
# two pulls together stay under delta_id, which bounds the raw spacing.
_MIN_CLOSED_SAMPLES = {"circle": 150, "lemniscate_closed": 300}


@dataclass(frozen=True)
class SyntheticSpec:
    shape: str
    samples: int = 200
    parameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise BadSpec(f"unknown shape {self.shape!r}")
        if self.shape == "dot":
            if self.samples < 1:
                raise BadSpec("a dot needs at least one sample")
        elif self.samples < 2:
            raise BadSpec("samples must be at least 2")
        scale = self.parameters.get("scale", 1.0)
        if not scale > 0:
            raise BadSpec("scale must be positive")
        gap = self.parameters.get("gap", 0.3)
        if self.shape == "lemniscate" and not 0 <= gap < math.pi / 4:
            raise BadSpec("lemniscate gap must lie in [0, pi/4)")
        key = "lemniscate_closed" if self.shape == "lemniscate" and gap == 0 else self.shape
        if self.samples < _MIN_CLOSED_SAMPLES.get(key, 0):
            raise BadSpec(f"{key} needs at least {_MIN_CLOSED_SAMPLES[key]} samples")

    @property
    def ground_truth(self) -> ShapePointCensus:
        if self.shape == "lemniscate" and self.parameters.get("gap", 0.3) == 0:
            return GROUND_TRUTH["lemniscate_closed"]
        return GROUND_TRUTH[self.shape]


def _seg(p0, p1, n):
    t = np.linspace(0.0, 1.0, n)[:, None]
    return (1 - t) * np.asarray(p0, float) + t * np.asarray(p1, float)


def _curves(spec: SyntheticSpec) -> list[np.ndarray]:
    n = spec.samples
    prm = spec.parameters
    if spec.shape == "line":
        return [_seg((0.0, 0.0), (0.6, 1.0), n)]
    if spec.shape == "circle":
        start = math.radians(prm.get("start_deg", 45.0))
        th = start + np.linspace(0.0, 2 * math.pi, n)
        return [np.column_stack([0.5 + 0.5 * np.cos(th), 0.5 + 0.5 * np.sin(th)])]
    if spec.shape == "arc":
        t = np.linspace(0.0, 1.0, n)
        return [np.column_stack([t, np.sin(math.pi * t)])]
    if spec.shape == "cusp_curve":
        t = np.linspace(-1.0, 1.0, n)
        # (t^2, t^3) has height 2
        return [np.column_stack([t**2, t**3]) / 2]
    if spec.shape == "lemniscate":
        gap = prm.get("gap", 0.3)
        u = np.linspace(-math.pi / 2 + gap, 3 * math.pi / 2 - gap, n)
        return [np.column_stack([np.sin(u), np.sin(2 * u) / 2])]
    if spec.shape == "t_junction":
        return [_seg((0.0, 1.0), (1.0, 1.0), n), _seg((0.5, 1.0), (0.5, 0.0), n)]
    if spec.shape == "corner":
        return [_seg((0.0, 1.0), (0.0, 0.0), n), _seg((0.0, 0.0), (1.0, 0.0), n)]
    if spec.shape == "plus":
        return [_seg((0.0, 0.5), (1.0, 0.5), n), _seg((0.5, 1.0), (0.5, 0.0), n)]
    if spec.shape == "dot":
        return [np.zeros((n, 2))]
    raise BadSpec(spec.shape)


def generate(spec: SyntheticSpec) -> Glyph:
    """Unnormalized glyph for ``spec``; its census is ``spec.ground_truth``."""
    scale = spec.parameters.get("scale", 1.0)
    offset = np.asarray(spec.parameters.get("offset", (0.0, 0.0)), float)
    strokes = tuple(Stroke(i, c * scale + offset) for i, c in enumerate(_curves(spec)))
    return Glyph(strokes, label=spec.shape)


def _smooth_noise(rng: np.random.Generator, tau: np.ndarray) -> np.ndarray:
    amp = rng.uniform(0.5, 1.0, 3)
    freq = rng.uniform(0.25, 1.0, 3)
    phase = rng.uniform(0.0, 2 * math.pi, 3)
    return (amp[:, None] * np.sin(2 * math.pi * freq[:, None] * tau + phase[:, None])).sum(axis=0)


def perturb(glyph: Glyph, magnitude: float, seed: int = 0) -> Glyph:
    """Add an independent smooth displacement to every stroke.

    Each coordinate of each stroke receives a sum of three random-phase,
    low-frequency sinusoids of normalized sample time, rescaled so that its
    largest absolute value is exactly ``magnitude``.
    """
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    if magnitude == 0:
        return glyph
    rng = np.random.default_rng(seed)
    strokes = []
    for s in sorted(glyph.strokes, key=lambda s: s.id):
        n = len(s)
        tau = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
        disp = []
        for _ in range(2):
            d = _smooth_noise(rng, tau)
            peak = np.abs(d).max()
            disp.append(d * (magnitude / peak) if peak > 0 else d)
        strokes.append(s.with_points(s.points + np.column_stack(disp)))
    return Glyph(tuple(strokes), label=glyph.label)


def trial_seed(base_seed: int, trial: int) -> np.random.SeedSequence:
    """Seed of one perturbation trial: ``SeedSequence(base_seed, spawn_key=(trial,))``."""
    return np.random.SeedSequence(base_seed, spawn_key=(trial,))


def random_glyph(seed: int, max_strokes: int = 3, samples: int = 120) -> Glyph:
    """A random 1..max_strokes glyph of smooth curves, polylines and dots."""
    rng = np.random.default_rng(seed)
    strokes = []
    for sid in range(int(rng.integers(1, max_strokes + 1))):
        style = rng.choice(["curve", "curve", "polyline", "dot"], p=[0.4, 0.3, 0.25, 0.05])
        if style == "dot":
            pts = np.repeat(rng.uniform(0, 1, (1, 2)), int(rng.integers(1, 6)), axis=0)
        elif style == "polyline":
            corners = rng.uniform(0, 1, (int(rng.integers(2, 5)), 2))
            per = max(samples // (len(corners) - 1), 2)
            pts = np.vstack([_seg(a, b, per)[:-1] for a, b in zip(corners[:-1], corners[1:])] + [corners[-1:]])
        else:
            tau = np.linspace(0.0, 1.0, samples)
            center = rng.uniform(0.2, 0.8, 2)
            cols = []
            for _ in range(2):
                f = rng.uniform(0.3, 1.6, 2)
                ph = rng.uniform(0, 2 * math.pi, 2)
                a = rng.uniform(0.1, 0.5, 2)
                cols.append((a[:, None] * np.sin(2 * math.pi * f[:, None] * tau + ph[:, None])).sum(0))
            pts = center + np.column_stack(cols)
        strokes.append(Stroke(sid, pts))
    return Glyph(tuple(strokes), label=f"random-{seed}")


# --------------------------------------------------------------------------
# brute-force oracle
# --------------------------------------------------------------------------

_ORDER = "DATXCBE"


def _path_lengths(pts):
    out = [0.0]
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        out.append(out[-1] + math.hypot(x1 - x0, y1 - y0))
    return out


def _same_place(pts_a, i, cum_a, pts_b, j, cum_b, same, delta):
    (xa, ya), (xb, yb) = pts_a[i], pts_b[j]
    if math.hypot(xa - xb, ya - yb) > delta:
        return False
    return (not same) or abs(cum_a[i] - cum_b[j]) > 2 * delta


def _orient(px, py, qx, qy, rx, ry):
    # orientation of r relative to the directed segment p -> q
    return (qx - px) * (ry - py) - (qy - py) * (rx - px)


def _far_from_ends(pts, i, delta):
    x, y = pts[i]
    return all(math.hypot(x - ex, y - ey) > delta for ex, ey in (pts[0], pts[-1]))


def _oracle_cusps(pts, theta, ratio, delta):
    n = len(pts)
    if n < 5:
        return []
    speed = []
    for i in range(n):
        lo, hi = max(i - 1, 0), min(i + 1, n - 1)
        span = hi - lo
        speed.append(math.hypot((pts[hi][0] - pts[lo][0]) / span, (pts[hi][1] - pts[lo][1]) / span))
    limit = ratio * (_path_lengths(pts)[-1] / (n - 1))
    found = []
    for i in range(2, n - 2):
        ux, uy = pts[i - 1][0] - pts[i - 2][0], pts[i - 1][1] - pts[i - 2][1]
        vx, vy = pts[i + 2][0] - pts[i + 1][0], pts[i + 2][1] - pts[i + 1][1]
        if math.hypot(ux, uy) == 0 or math.hypot(vx, vy) == 0:
            continue
        angle = math.degrees(math.atan2(abs(ux * vy - uy * vx), ux * vx + uy * vy))
        if not _far_from_ends(pts, i, delta):
            continue
        if angle > theta and speed[i] < limit and speed[i] <= speed[i - 1] and speed[i] <= speed[i + 1]:
            found.append((speed[i], i))
    kept = []
    for _, i in sorted(found):
        if all(abs(i - k) > 2 for k in kept):
            kept.append(i)
    return sorted(kept)


def _oracle_bumps(pts, eps_rel, delta):
    n = len(pts)
    if n < 3:
        return []
    eps = eps_rel * (_path_lengths(pts)[-1] / (n - 1))
    deriv = []
    for i in range(n):
        lo, hi = max(i - 1, 0), min(i + 1, n - 1)
        span = hi - lo
        deriv.append(((pts[hi][0] - pts[lo][0]) / span, (pts[hi][1] - pts[lo][1]) / span))

    def sign(v):
        return 1 if v > eps else (-1 if v < -eps else 0)

    hits = []
    for axis in (0, 1):
        prev = None
        for i in range(n):
            s = sign(deriv[i][axis])
            if s == 0:
                continue
            if prev is not None and sign(deriv[prev][axis]) != s:
                k = min(range(prev, i + 1), key=lambda m: (abs(deriv[m][axis]), m))
                if 0 < k < n - 1 and abs(deriv[k][1 - axis]) > eps and _far_from_ends(pts, k, delta):
                    hits.append(k)
            prev = i
    hits.sort()
    merged, last = [], None
    for k in hits:
        if last is None or k - last > 2:
            merged.append(k)
        last = k
    return merged


def brute_force_census(glyph: Glyph, cfg: PipelineConfig | None = None) -> ShapePointCensus:
    """Census of a preprocessed glyph by exhaustive scans."""
    cfg = cfg or PipelineConfig()
    delta = cfg.delta_id
    strokes = sorted(glyph.strokes, key=lambda s: s.id)
    pts = {s.id: [(float(x), float(y)) for x, y in s.points] for s in strokes}
    cum = {sid: _path_lengths(p) for sid, p in pts.items()}
    dots = [sid for sid in pts if cum[sid][-1] < cfg.delta_dot]
    live = [sid for sid in pts if sid not in dots]

    cands: dict[str, list[tuple[float, float]]] = {k: [] for k in _ORDER}
    for sid in dots:
        cands["D"].append(pts[sid][0])

    ends = [(sid, i) for sid in live for i in (0, len(pts[sid]) - 1)]

    def ident(a, b):
        return _same_place(pts[a[0]], a[1], cum[a[0]], pts[b[0]], b[1], cum[b[0]], a[0] == b[0], delta)

    pairs = []
    for x in range(len(ends)):
        for y in range(x + 1, len(ends)):
            a, b = ends[x], ends[y]
            if ident(a, b):
                (xa, ya), (xb, yb) = pts[a[0]][a[1]], pts[b[0]][b[1]]
                pairs.append((math.hypot(xa - xb, ya - yb), a, b))
    used = set()
    for _, a, b in sorted(pairs):
        if a in used or b in used:
            continue
        used |= {a, b}
        (xa, ya), (xb, yb) = pts[a[0]][a[1]], pts[b[0]][b[1]]
        cands["A"].append(((xa + xb) / 2, (ya + yb) / 2))

    for e in ends:
        if e in used:
            continue
        tee = any(
            ident(e, (sid, j)) for sid in live for j in range(1, len(pts[sid]) - 1)
        )
        (cands["T"] if tee else cands["E"]).append(pts[e[0]][e[1]])

    end_pos = [pts[s][i] for s, i in ends]
    crosses = []
    for ai, sa in enumerate(live):
        for sb in live[ai:]:
            pa, pb = pts[sa], pts[sb]
            for i in range(len(pa) - 1):
                for j in range(len(pb) - 1):
                    if sa == sb and j < i + 2:
                        continue
                    (ax0, ay0), (ax1, ay1) = pa[i], pa[i + 1]
                    (bx0, by0), (bx1, by1) = pb[j], pb[j + 1]
                    o1 = _orient(bx0, by0, bx1, by1, ax0, ay0)
                    o2 = _orient(bx0, by0, bx1, by1, ax1, ay1)
                    o3 = _orient(ax0, ay0, ax1, ay1, bx0, by0)
                    o4 = _orient(ax0, ay0, ax1, ay1, bx1, by1)
                    if (o1 >= 0) == (o2 >= 0) or (o3 >= 0) == (o4 >= 0):
                        continue
                    if max(abs(o1), abs(o2)) <= 1e-12 or max(abs(o3), abs(o4)) <= 1e-12:
                        continue
                    t = o1 / (o1 - o2)
                    p = (ax0 + t * (ax1 - ax0), ay0 + t * (ay1 - ay0))
                    if any(math.hypot(p[0] - q[0], p[1] - q[1]) <= delta for q in end_pos):
                        continue
                    if any(math.hypot(p[0] - q[0], p[1] - q[1]) <= delta for q in crosses):
                        continue
                    crosses.append(p)
    cands["X"] = crosses

    for sid in live:
        p = pts[sid]
        cands["C"].extend(p[i] for i in _oracle_cusps(p, cfg.theta_cusp, cfg.cusp_speed_ratio, delta))
        cands["B"].extend(p[i] for i in _oracle_bumps(p, cfg.eps_deriv, delta))

    accepted: list[tuple[str, tuple[float, float]]] = []
    for kind in _ORDER:
        blockers = list(accepted)
        for q in cands[kind]:
            if any(math.hypot(q[0] - r[0], q[1] - r[1]) <= delta for _, r in blockers):
                continue
            accepted.append((kind, q))
    counts: dict[str, int] = {}
    for kind, _ in accepted:
        counts[kind] = counts.get(kind, 0) + 1
    return ShapePointCensus.of(**counts)


# --------------------------------------------------------------------------
# perturbation study and suite
# --------------------------------------------------------------------------

def census_of(glyph: Glyph, cfg: PipelineConfig) -> ShapePointCensus:
    return classify_glyph(preprocess_glyph(glyph, cfg), cfg)[1]


def _survives(shape: str, kind: ShapePointKind, magnitude: float, cfg: PipelineConfig, seed) -> bool:
    spec = SyntheticSpec(shape, samples=8 if shape == "dot" else 200)
    glyph = perturb(generate(spec), magnitude, seed)
    return census_of(glyph, cfg)[kind] >= spec.ground_truth[kind]


def _study_chunk(args) -> int:
    shape, kind, magnitude, cfg, seed, trials = args
    return sum(_survives(shape, kind, magnitude, cfg, trial_seed(seed, t)) for t in trials)


@dataclass(frozen=True)
class SurvivalRow:
    shape: str
    kind: ShapePointKind
    magnitude: float
    survival_rate: float
    trials: int

    @property
    def passed(self) -> bool:
        if self.kind.stable:
            return self.survival_rate >= 0.95
        return self.survival_rate <= 0.05


def perturbation_study(
    cfg: PipelineConfig | None = None,
    trials: int = 1000,
    seed: int = 0,
    magnitude: float | None = None,
    workers: int = 1,
    pairs=STUDY,
) -> list[SurvivalRow]:
    """Survival rate of each studied kind under smooth perturbation.

    ``magnitude`` defaults to ``3 * delta_id``. A trial survives when the
    perturbed census still holds at least the ground-truth count of the kind.
    """
    cfg = cfg or PipelineConfig()
    magnitude = 3 * cfg.delta_id if magnitude is None else magnitude
    chunks = max(workers, 1) * 4
    jobs = []
    for shape, kind in pairs:
        for c in range(chunks):
            jobs.append((shape, kind, magnitude, cfg, seed, range(c, trials, chunks)))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            hits = list(pool.map(_study_chunk, jobs))
    else:
        hits = [_study_chunk(j) for j in jobs]
    rows = []
    for n, (shape, kind) in enumerate(pairs):
        survived = sum(hits[n * chunks : (n + 1) * chunks])
        rows.append(SurvivalRow(shape, kind, magnitude, survived / trials, trials))
    return rows


@dataclass
class SuiteReport:
    failures: list[str] = field(default_factory=list)
    survival: list[SurvivalRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def oracle_cases(random_count: int = 100) -> list[Glyph]:
    """Unprocessed glyphs used for oracle-equivalence checks."""
    glyphs = [generate(SyntheticSpec(s, samples=8 if s == "dot" else 200)) for s in SHAPES]
    glyphs += [random_glyph(seed) for seed in range(random_count)]
    return glyphs


def run_suite(
    cfg: PipelineConfig | None = None,
    trials: int = 1000,
    seed: int = 0,
    workers: int = 1,
    random_count: int = 100,
) -> SuiteReport:
    """Ground truth, oracle equivalence and perturbation persistence."""
    cfg = cfg or PipelineConfig()
    report = SuiteReport()
    for shape in SHAPES:
        spec = SyntheticSpec(shape, samples=8 if shape == "dot" else 200)
        got = census_of(generate(spec), cfg)
        if got != spec.ground_truth:
            report.failures.append(f"ground truth {shape}: expected {spec.ground_truth}, got {got}")
    for g in oracle_cases(random_count):
        pg = preprocess_glyph(g, cfg)
        fast, slow = classify_glyph(pg, cfg)[1], brute_force_census(pg, cfg)
        if fast != slow:
            report.failures.append(f"oracle mismatch {g.label}: detectors {fast}, brute force {slow}")
    report.survival = perturbation_study(cfg, trials, seed, workers=workers)
    for row in report.survival:
        if not row.passed:
            bound = ">= 0.95" if row.kind.stable else "<= 0.05"
            report.failures.append(
                f"perturbation {row.shape}/{row.kind.value}: survival {row.survival_rate:.3f}, need {bound}"
            )
    return report


# --------------------------------------------------------------------------
# synthetic datasets
# --------------------------------------------------------------------------

def word_from_shapes(
    shapes, script: str, transcription: str, word_id: str, unit: float = 100.0, seed: int = 0
) -> WordRecord:
    """Lay glyphs of the given shapes out left to right in device units."""
    strokes = []
    x = 0.0
    rng = np.random.default_rng(seed)
    for shape in shapes:
        g = generate(SyntheticSpec(shape, samples=8 if shape == "dot" else 200))
        xmin, ymin, xmax, _ = g.bbox()
        size = unit * rng.uniform(0.8, 1.2)
        for s in g.strokes:
            pts = (s.points - (xmin, ymin)) * size + (x, 0.0)
            strokes.append(Stroke(len(strokes), pts))
        x += (xmax - xmin) * size + 0.5 * unit
    return WordRecord(script, transcription, tuple(strokes), word_id=word_id)


_DEMO_WORDS = (
    ("w1", "ठाणे", ("line", "arc", "corner", "line")),
    ("w2", "आग्रा", ("circle", "t_junction", "line", "arc", "dot")),
    ("w3", "मुंबई", ("cusp_curve", "corner", "plus", "arc", "line")),
    ("w4", "भरूच", ("lemniscate", "t_junction", "arc", "line")),
    ("w5", "ऐजोल", ("arc", "circle", "corner", "dot")),
)


def demo_dataset() -> Dataset:
    """The bundled five-word synthetic dataset."""
    records = tuple(
        word_from_shapes(shapes, "synthetic", text, wid, seed=i)
        for i, (wid, text, shapes) in enumerate(_DEMO_WORDS)
    )
    return Dataset(records, "synthetic_words.json")


def mini_scripts(words: int = 4) -> Dataset:
    """Two synthetic scripts: one of stable shapes, one rich in T/C/A junctions."""
    stable = [("line", "arc", "line"), ("arc", "line", "arc"), ("line", "plus", "line"), ("arc", "arc", "line")]
    junction = [
        ("t_junction", "cusp_curve", "corner"),
        ("corner", "t_junction", "cusp_curve"),
        ("cusp_curve", "corner", "t_junction"),
        ("t_junction", "t_junction", "corner"),
    ]
    text = "कखग"
    records = []
    for i in range(words):
        records.append(word_from_shapes(stable[i % 4], "stable", text, f"s{i}", seed=i))
        records.append(word_from_shapes(junction[i % 4], "junction", text, f"j{i}", seed=100 + i))
    return Dataset(tuple(records), "mini_scripts")
