"""Shape point detection on preprocessed glyphs.

Detectors return candidates of a single kind. :func:`classify_glyph` runs
all of them and resolves overlaps with the fixed precedence
``D > A > T > X > C > B > E``: a candidate lying within ``delta_id`` of an
already accepted point of a higher kind is dropped.

Identification (two samples at one position) is relaxed to a tolerance
radius ``delta_id``. For two samples of the same stroke the path between
them must also be longer than ``2 * delta_id``, so that a stroke is never
identified with its own immediate neighbourhood.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .model import (
    Glyph,
    PipelineConfig,
    ShapePoint,
    ShapePointCensus,
    ShapePointKind as K,
    Stroke,
)
from .preprocess import arc_length

PRECEDENCE = (K.D, K.A, K.T, K.X, K.C, K.B, K.E)

# orientation values this small are rounding noise of collinear segments
COLLINEAR_TOL = 1e-12

Ref = tuple[int, int]  # (stroke id, sample index)


class TooFewSamples(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DerivativeSeries:
    dx: np.ndarray
    dy: np.ndarray

    @property
    def speed(self) -> np.ndarray:
        return np.hypot(self.dx, self.dy)


def differentiate(s: Stroke) -> DerivativeSeries:
    """Central differences inside the stroke, one-sided at its ends."""
    if len(s) < 2:
        raise TooFewSamples(f"stroke {s.id} has a single sample")
    return DerivativeSeries(np.gradient(s.x), np.gradient(s.y))


def mean_step(s: Stroke) -> float:
    """Average distance travelled per sample."""
    return arc_length(s.points) / max(len(s) - 1, 1)


def is_dot(s: Stroke, cfg: PipelineConfig) -> bool:
    return arc_length(s.points) < cfg.delta_dot


def _cum_length(s: Stroke) -> np.ndarray:
    steps = np.hypot(*np.diff(s.points, axis=0).T)
    return np.concatenate([[0.0], np.cumsum(steps)])


def _interior_mask(s: Stroke, cfg: PipelineConfig) -> np.ndarray:
    """Samples farther than ``delta_id`` from both terminals of their stroke."""
    d0 = np.hypot(*(s.points - s.points[0]).T)
    d1 = np.hypot(*(s.points - s.points[-1]).T)
    return (d0 > cfg.delta_id) & (d1 > cfg.delta_id)


def identify(a: tuple[Stroke, int], b: tuple[Stroke, int], cfg: PipelineConfig | None = None) -> bool:
    """True when the two samples are identified under the tolerance radius."""
    cfg = cfg or PipelineConfig()
    (sa, i), (sb, j) = a, b
    pa, pb = sa.points[i], sb.points[j]
    if float(np.hypot(*(pa - pb))) > cfg.delta_id:
        return False
    if sa.id != sb.id:
        return True
    cum = _cum_length(sa)
    return abs(cum[i] - cum[j]) > 2 * cfg.delta_id


class _GlyphGeometry:
    """Per-glyph arrays shared by the detectors."""

    def __init__(self, glyph: Glyph, cfg: PipelineConfig):
        self.cfg = cfg
        strokes = sorted(glyph.strokes, key=lambda s: s.id)
        self.dots = [s for s in strokes if is_dot(s, cfg)]
        self.lines = [s for s in strokes if not is_dot(s, cfg)]
        self.cum = {s.id: _cum_length(s) for s in self.lines}
        # terminal refs in deterministic order
        self.terminals: list[Ref] = []
        for s in self.lines:
            self.terminals.append((s.id, 0))
            self.terminals.append((s.id, len(s) - 1))
        self.by_id = {s.id: s for s in strokes}

    def pos(self, ref: Ref) -> np.ndarray:
        return self.by_id[ref[0]].points[ref[1]]

    def identified_with(self, ref: Ref, stroke: Stroke) -> tuple[np.ndarray, np.ndarray]:
        """Indices of ``stroke`` samples identified with ``ref`` and their distances."""
        p = self.pos(ref)
        d = np.hypot(stroke.points[:, 0] - p[0], stroke.points[:, 1] - p[1])
        ok = d <= self.cfg.delta_id
        if stroke.id == ref[0]:
            cum = self.cum[stroke.id]
            ok &= np.abs(cum - cum[ref[1]]) > 2 * self.cfg.delta_id
        idx = np.nonzero(ok)[0]
        return idx, d[idx]


def _point(kind: K, position, refs: Sequence[Ref]) -> ShapePoint:
    return ShapePoint(kind, (float(position[0]), float(position[1])), tuple(refs))


def _angle_pairs(geo: _GlyphGeometry) -> list[tuple[Ref, Ref, float]]:
    """Greedy nearest matching of identified terminal pairs."""
    pairs = []
    terms = geo.terminals
    for ai, a in enumerate(terms):
        for b in terms[ai + 1 :]:
            idx, dist = geo.identified_with(a, geo.by_id[b[0]])
            hit = np.nonzero(idx == b[1])[0]
            if len(hit):
                pairs.append((float(dist[hit[0]]), a, b))
    pairs.sort()
    used: set[Ref] = set()
    chosen = []
    for dist, a, b in pairs:
        if a in used or b in used:
            continue
        used.update((a, b))
        chosen.append((a, b, dist))
    return chosen


def _t_junctions(geo: _GlyphGeometry, taken: set[Ref]) -> list[tuple[Ref, Ref]]:
    found = []
    for term in geo.terminals:
        if term in taken:
            continue
        best = None
        for s in geo.lines:
            idx, dist = geo.identified_with(term, s)
            interior = (idx > 0) & (idx < len(s) - 1)
            for i, d in zip(idx[interior], dist[interior]):
                key = (float(d), s.id, int(i))
                if best is None or key < best:
                    best = key
        if best is not None:
            found.append((term, (best[1], best[2])))
    return found


def detect_dot_strokes(glyph: Glyph, cfg: PipelineConfig | None = None) -> list[ShapePoint]:
    cfg = cfg or PipelineConfig()
    return [
        _point(K.D, s.points[0], [(s.id, 0)])
        for s in sorted(glyph.strokes, key=lambda s: s.id)
        if is_dot(s, cfg)
    ]


def detect_angle_points(glyph: Glyph, cfg: PipelineConfig | None = None) -> list[ShapePoint]:
    cfg = cfg or PipelineConfig()
    geo = _GlyphGeometry(glyph, cfg)
    return [
        _point(K.A, (geo.pos(a) + geo.pos(b)) / 2, [a, b])
        for a, b, _ in _angle_pairs(geo)
    ]


def detect_t_points(glyph: Glyph, cfg: PipelineConfig | None = None) -> list[ShapePoint]:
    cfg = cfg or PipelineConfig()
    geo = _GlyphGeometry(glyph, cfg)
    taken = {r for a, b, _ in _angle_pairs(geo) for r in (a, b)}
    return [_point(K.T, geo.pos(term), [term, other]) for term, other in _t_junctions(geo, taken)]


def detect_end_points(glyph: Glyph, cfg: PipelineConfig | None = None) -> list[ShapePoint]:
    cfg = cfg or PipelineConfig()
    geo = _GlyphGeometry(glyph, cfg)
    taken = {r for a, b, _ in _angle_pairs(geo) for r in (a, b)}
    taken.update(term for term, _ in _t_junctions(geo, taken))
    return [_point(K.E, geo.pos(t), [t]) for t in geo.terminals if t not in taken]


def _segments(s: Stroke) -> tuple[np.ndarray, np.ndarray]:
    return s.points[:-1], s.points[1:]


def _side(v: np.ndarray) -> np.ndarray:
    return np.where(v >= 0, 1, -1)


def _crossings(a: Stroke, b: Stroke, same: bool):
    """All (i, j, point) where segment i of ``a`` crosses segment j of ``b``."""
    a0, a1 = _segments(a)
    b0, b1 = _segments(b)
    A0, A1 = a0[:, None, :], a1[:, None, :]
    B0, B1 = b0[None, :, :], b1[None, :, :]
    ex, ey = B1[..., 0] - B0[..., 0], B1[..., 1] - B0[..., 1]
    o1 = ex * (A0[..., 1] - B0[..., 1]) - ey * (A0[..., 0] - B0[..., 0])
    o2 = ex * (A1[..., 1] - B0[..., 1]) - ey * (A1[..., 0] - B0[..., 0])
    fx, fy = A1[..., 0] - A0[..., 0], A1[..., 1] - A0[..., 1]
    o3 = fx * (B0[..., 1] - A0[..., 1]) - fy * (B0[..., 0] - A0[..., 0])
    o4 = fx * (B1[..., 1] - A0[..., 1]) - fy * (B1[..., 0] - A0[..., 0])
    collinear = ((np.abs(o1) <= COLLINEAR_TOL) & (np.abs(o2) <= COLLINEAR_TOL)) | (
        (np.abs(o3) <= COLLINEAR_TOL) & (np.abs(o4) <= COLLINEAR_TOL)
    )
    hit = (_side(o1) != _side(o2)) & (_side(o3) != _side(o4)) & ~collinear
    if same:
        i, j = np.indices(hit.shape)
        hit &= j >= i + 2
    out = []
    for i, j in zip(*np.nonzero(hit)):
        t = o1[i, j] / (o1[i, j] - o2[i, j])
        out.append((int(i), int(j), a0[i] + t * (a1[i] - a0[i])))
    return out


def detect_cross_points(glyph: Glyph, cfg: PipelineConfig | None = None) -> list[ShapePoint]:
    cfg = cfg or PipelineConfig()
    geo = _GlyphGeometry(glyph, cfg)
    terms = np.array([geo.pos(t) for t in geo.terminals]).reshape(-1, 2)
    kept: list[ShapePoint] = []
    lines = geo.lines
    for ai, a in enumerate(lines):
        for b in lines[ai:]:
            for i, j, p in _crossings(a, b, same=a.id == b.id):
                if len(terms) and np.min(np.hypot(*(terms - p).T)) <= cfg.delta_id:
                    continue
                if any(np.hypot(p[0] - q.position[0], p[1] - q.position[1]) <= cfg.delta_id for q in kept):
                    continue
                kept.append(_point(K.X, p, [(a.id, i), (b.id, j)]))
    return kept


def _turn_degrees(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    dot = u[:, 0] * v[:, 0] + u[:, 1] * v[:, 1]
    return np.degrees(np.arctan2(np.abs(cross), dot))


def detect_cusp_points(
    s: Stroke, d: DerivativeSeries | None = None, cfg: PipelineConfig | None = None
) -> list[ShapePoint]:
    """Speed minima where the path reverses by more than ``theta_cusp``.

    The reversal is measured between the segment entering the window
    ``i-1 .. i+1`` and the segment leaving it.
    """
    cfg = cfg or PipelineConfig()
    n = len(s)
    if n < 5 or is_dot(s, cfg):
        return []
    d = d or differentiate(s)
    speed = d.speed
    limit = cfg.cusp_speed_ratio * mean_step(s)
    p = s.points
    i = np.arange(2, n - 2)
    d_in = p[i - 1] - p[i - 2]
    d_out = p[i + 2] - p[i + 1]
    degenerate = (np.hypot(*d_in.T) == 0) | (np.hypot(*d_out.T) == 0)
    turn = np.where(degenerate, 0.0, _turn_degrees(d_in, d_out))
    ok = (
        _interior_mask(s, cfg)[i]
        & (turn > cfg.theta_cusp)
        & (speed[i] < limit)
        & (speed[i] <= speed[i - 1])
        & (speed[i] <= speed[i + 1])
    )
    cands = sorted((float(speed[k]), int(k)) for k in i[ok])
    chosen: list[int] = []
    for _, k in cands:
        if all(abs(k - c) > 2 for c in chosen):
            chosen.append(k)
    return [_point(K.C, p[k], [(s.id, k)]) for k in sorted(chosen)]


def _zero_crossings(c: np.ndarray, other: np.ndarray, eps: float) -> list[int]:
    sign = np.where(c > eps, 1, np.where(c < -eps, -1, 0))
    nz = np.nonzero(sign)[0]
    n = len(c)
    found = []
    for a, b in zip(nz[:-1], nz[1:]):
        if sign[a] == sign[b]:
            continue
        window = np.abs(c[a : b + 1])
        k = int(a + np.argmin(window))
        if 0 < k < n - 1 and abs(other[k]) > eps:
            found.append(k)
    return found


def detect_bump_points(
    s: Stroke, d: DerivativeSeries | None = None, cfg: PipelineConfig | None = None
) -> list[ShapePoint]:
    """Interior samples where X'(t) or Y'(t) changes sign while the other does not vanish.

    Derivatives inside ``eps_deriv * mean step`` count as zero, so a sign
    change must pass through that dead band. Crossings within two samples of
    each other are reported once, at the earliest index. Samples within
    ``delta_id`` of either terminal of the stroke are not interior and never bump.
    """
    cfg = cfg or PipelineConfig()
    if len(s) < 3 or is_dot(s, cfg):
        return []
    d = d or differentiate(s)
    eps = cfg.eps_deriv * mean_step(s)
    interior = _interior_mask(s, cfg)
    idx = sorted(
        k
        for k in _zero_crossings(d.dx, d.dy, eps) + _zero_crossings(d.dy, d.dx, eps)
        if interior[k]
    )
    merged: list[int] = []
    last = None
    for k in idx:
        if last is None or k - last > 2:
            merged.append(k)
        last = k
    return [_point(K.B, s.points[k], [(s.id, k)]) for k in merged]


def candidates(glyph: Glyph, cfg: PipelineConfig | None = None) -> dict[K, list[ShapePoint]]:
    """Unarbitrated detections of every kind."""
    cfg = cfg or PipelineConfig()
    geo = _GlyphGeometry(glyph, cfg)
    pairs = _angle_pairs(geo)
    taken = {r for a, b, _ in pairs for r in (a, b)}
    tees = _t_junctions(geo, taken)
    taken.update(term for term, _ in tees)

    out: dict[K, list[ShapePoint]] = {k: [] for k in PRECEDENCE}
    out[K.D] = detect_dot_strokes(glyph, cfg)
    out[K.A] = [_point(K.A, (geo.pos(a) + geo.pos(b)) / 2, [a, b]) for a, b, _ in pairs]
    out[K.T] = [_point(K.T, geo.pos(t), [t, o]) for t, o in tees]
    out[K.E] = [_point(K.E, geo.pos(t), [t]) for t in geo.terminals if t not in taken]
    out[K.X] = detect_cross_points(glyph, cfg)
    for s in geo.lines:
        d = differentiate(s)
        out[K.C].extend(detect_cusp_points(s, d, cfg))
        out[K.B].extend(detect_bump_points(s, d, cfg))
    return out


def arbitrate(cands: dict[K, list[ShapePoint]], delta: float) -> list[ShapePoint]:
    accepted: list[ShapePoint] = []
    for kind in PRECEDENCE:
        higher = list(accepted)
        for p in cands.get(kind, []):
            px, py = p.position
            if any(np.hypot(px - q.position[0], py - q.position[1]) <= delta for q in higher):
                continue
            accepted.append(p)
    return sorted(accepted, key=lambda p: p.sort_key)


def classify_glyph(
    glyph: Glyph, cfg: PipelineConfig | None = None
) -> tuple[list[ShapePoint], ShapePointCensus]:
    """Detect, arbitrate and count the shape points of a preprocessed glyph."""
    cfg = cfg or PipelineConfig()
    points = arbitrate(candidates(glyph, cfg), cfg.delta_id)
    return points, ShapePointCensus.from_points(points)
