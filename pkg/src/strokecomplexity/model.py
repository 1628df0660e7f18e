"""Core value types shared by every stage of the pipeline.

Coordinates are stored as read-only ``(n, 2)`` float arrays. Time is the
ordinal sample index, so a stroke's ``t`` is always ``0 .. n-1``.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np


class InvariantViolation(ValueError):
    """A value breaks one of the structural invariants of its type."""


class Sample(NamedTuple):
    x: float
    y: float
    t: int


def _frozen_points(points) -> np.ndarray:
    arr = np.array(points, dtype=float)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvariantViolation(f"stroke points must have shape (n, 2), got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Stroke:
    """One pen-down to pen-up trace."""

    id: int
    points: np.ndarray

    def __post_init__(self):
        pts = _frozen_points(self.points)
        if len(pts) == 0:
            raise InvariantViolation(f"stroke {self.id} has no samples")
        if not np.all(np.isfinite(pts)):
            raise InvariantViolation(f"stroke {self.id} has non-finite coordinates")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, Stroke):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.id, self.points.tobytes()))

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.points))

    @property
    def interval(self) -> tuple[int, int]:
        """First and last sample index, ``(t0, t1)``."""
        return 0, len(self.points) - 1

    @property
    def samples(self) -> Iterator[Sample]:
        for i, (x, y) in enumerate(self.points):
            yield Sample(float(x), float(y), i)

    @property
    def y_span(self) -> float:
        return float(self.y.max() - self.y.min())

    @property
    def x_span(self) -> float:
        return float(self.x.max() - self.x.min())

    def with_points(self, points) -> Stroke:
        return Stroke(self.id, points)


def main_stroke_id(strokes: Sequence[Stroke]) -> int:
    """Id of the stroke with the largest y-span; ties go to the lowest id."""
    best = min(strokes, key=lambda s: (-s.y_span, s.id))
    return best.id


@dataclass(frozen=True)
class Glyph:
    """A segmented character: its strokes plus normalization metadata."""

    strokes: tuple[Stroke, ...]
    main_stroke_id: int | None = None
    scale_factor: float = 1.0
    label: str | None = None

    def __post_init__(self):
        strokes = tuple(self.strokes)
        if not strokes:
            raise InvariantViolation("glyph has no strokes")
        object.__setattr__(self, "strokes", strokes)
        if self.main_stroke_id is None:
            object.__setattr__(self, "main_stroke_id", main_stroke_id(strokes))
        elif self.main_stroke_id not in {s.id for s in strokes}:
            raise InvariantViolation(f"main stroke {self.main_stroke_id} not in glyph")
        if not (self.scale_factor > 0 and math.isfinite(self.scale_factor)):
            raise InvariantViolation(f"scale_factor must be positive, got {self.scale_factor}")

    @property
    def main_stroke(self) -> Stroke:
        return self.stroke(self.main_stroke_id)

    def stroke(self, stroke_id: int) -> Stroke:
        for s in self.strokes:
            if s.id == stroke_id:
                return s
        raise KeyError(stroke_id)

    def bbox(self) -> tuple[float, float, float, float]:
        pts = np.vstack([s.points for s in self.strokes])
        xmin, ymin = pts.min(axis=0)
        xmax, ymax = pts.max(axis=0)
        return float(xmin), float(ymin), float(xmax), float(ymax)


@dataclass(frozen=True)
class WordRecord:
    """Strokes of one written word with its transcription and script id."""

    script: str
    transcription: str
    strokes: tuple[Stroke, ...]
    word_id: str = ""
    glyphs: tuple[Glyph, ...] | None = None
    # stroke-id groups supplied by the input file; bypasses segmentation
    glyph_groups: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "strokes", tuple(self.strokes))
        if self.glyphs is not None:
            object.__setattr__(self, "glyphs", tuple(self.glyphs))
        if self.glyph_groups is not None:
            object.__setattr__(
                self, "glyph_groups", tuple(tuple(g) for g in self.glyph_groups)
            )

    def with_glyphs(self, glyphs: Iterable[Glyph]) -> WordRecord:
        return replace(self, glyphs=tuple(glyphs))


class ShapePointKind(enum.Enum):
    """Shape point types, valued by their one-letter code."""

    I = "I"  # noqa: E741  interior; conceptual only, never counted
    E = "E"
    B = "B"
    X = "X"
    C = "C"
    T = "T"
    D = "D"
    A = "A"

    @property
    def codimension(self) -> int:
        return _CODIMENSION[self]

    @property
    def stable(self) -> bool:
        return self.codimension == 0

    @property
    def arity(self) -> int:
        """Number of (stroke, sample) references that locate a point of this kind."""
        return 2 if self in (ShapePointKind.X, ShapePointKind.T, ShapePointKind.A) else 1


_CODIMENSION = {
    ShapePointKind.I: 0,
    ShapePointKind.E: 0,
    ShapePointKind.B: 0,
    ShapePointKind.X: 0,
    ShapePointKind.C: 1,
    ShapePointKind.T: 1,
    ShapePointKind.D: 1,
    ShapePointKind.A: 2,
}

# the seven kinds that are enumerated and counted
COUNTED_KINDS = tuple(k for k in ShapePointKind if k is not ShapePointKind.I)
STABLE_KINDS = tuple(k for k in COUNTED_KINDS if k.stable)
UNSTABLE_KINDS = tuple(k for k in COUNTED_KINDS if not k.stable)


def codimension_of(kind: ShapePointKind | str) -> int:
    return ShapePointKind(kind).codimension


@dataclass(frozen=True)
class ShapePoint:
    kind: ShapePointKind
    position: tuple[float, float]
    provenance: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.kind is ShapePointKind.I:
            raise InvariantViolation("interior points are not enumerated")
        if len(self.provenance) != self.kind.arity:
            raise InvariantViolation(
                f"{self.kind.value} point needs {self.kind.arity} provenance entries, "
                f"got {len(self.provenance)}"
            )

    @property
    def sort_key(self):
        return self.provenance[0] + (self.kind.value,)


@dataclass(frozen=True)
class ShapePointCensus:
    """Per-kind counts N_i over the seven counted kinds."""

    counts: Mapping[ShapePointKind, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.counts).items():
            kind = ShapePointKind(k)
            if kind is ShapePointKind.I:
                raise InvariantViolation("interior points are not counted")
            if int(v) != v or v < 0:
                raise InvariantViolation(f"count for {kind.value} must be a non-negative int")
            if v:
                clean[kind] = int(v)
        object.__setattr__(self, "counts", clean)

    @classmethod
    def of(cls, **counts: int) -> ShapePointCensus:
        """``ShapePointCensus.of(B=4, A=1)``."""
        return cls({ShapePointKind(k): v for k, v in counts.items()})

    @classmethod
    def from_points(cls, points: Iterable[ShapePoint]) -> ShapePointCensus:
        counts: dict[ShapePointKind, int] = {}
        for p in points:
            counts[p.kind] = counts.get(p.kind, 0) + 1
        return cls(counts)

    def __getitem__(self, kind: ShapePointKind | str) -> int:
        return self.counts.get(ShapePointKind(kind), 0)

    def __add__(self, other: ShapePointCensus) -> ShapePointCensus:
        return ShapePointCensus({k: self[k] + other[k] for k in COUNTED_KINDS})

    def __eq__(self, other):
        if not isinstance(other, ShapePointCensus):
            return NotImplemented
        return all(self[k] == other[k] for k in COUNTED_KINDS)

    def __hash__(self):
        return hash(tuple(self[k] for k in COUNTED_KINDS))

    def as_dict(self) -> dict[str, int]:
        return {k.value: self[k] for k in COUNTED_KINDS}

    def __repr__(self):
        inner = ", ".join(f"{k}:{v}" for k, v in self.as_dict().items() if v)
        return f"ShapePointCensus({{{inner}}})"

    @property
    def stable_total(self) -> int:
        return sum(self[k] for k in STABLE_KINDS)

    @property
    def unstable_total(self) -> int:
        return sum(self[k] for k in UNSTABLE_KINDS)


@dataclass(frozen=True)
class PipelineConfig:
    """Preprocessing and detection parameters.

    ``eps_deriv`` is relative: the vanishing-derivative threshold for a
    stroke is ``eps_deriv`` times that stroke's mean per-sample speed.
    ``cusp_speed_ratio`` bounds the speed at a cusp candidate relative to the
    same mean; arc-length resampling leaves up to half a step of speed at a
    tip that falls between samples.
    """

    sigma_s: float = 3.0
    kernel_window: int = 21
    mu: float = 11.0
    resample_n: int = 64
    eps_deriv: float = 0.05
    delta_id: float = 0.05
    delta_dot: float = 0.02
    theta_cusp: float = 120.0
    cusp_speed_ratio: float = 0.75
    c3_kinds: str = "ctda"

    def __post_init__(self):
        if self.kernel_window < 1 or self.kernel_window % 2 == 0:
            raise InvariantViolation("kernel_window must be an odd positive integer")
        if self.resample_n < 2:
            raise InvariantViolation("resample_n must be at least 2")
        for name in ("sigma_s", "eps_deriv", "delta_dot", "cusp_speed_ratio"):
            if not getattr(self, name) > 0:
                raise InvariantViolation(f"{name} must be positive")
        # delta_id = 0 is accepted so degenerate-config probes can run
        if self.delta_id < 0:
            raise InvariantViolation("delta_id must be non-negative")
        if not 90.0 < self.theta_cusp < 180.0:
            raise InvariantViolation("theta_cusp must lie in (90, 180) degrees")
        if self.c3_kinds not in ("ctda", "ctd"):
            raise InvariantViolation("c3_kinds must be 'ctda' or 'ctd'")

    def updated(self, **changes) -> PipelineConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})
