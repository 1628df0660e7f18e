"""Shape-point analysis and complexity measures for handwritten strokes."""

from importlib.resources import files

from .ingest import Dataset, count_unicodes, load_dataset, parse_dataset
from .metrics import compute_row, net_shape_complexity, stability_index, summarize_script
from .model import (
    Glyph,
    PipelineConfig,
    ShapePoint,
    ShapePointCensus,
    ShapePointKind,
    Stroke,
    WordRecord,
)
from .preprocess import preprocess_glyph, preprocess_word
from .shapepoints import classify_glyph

__version__ = "0.1.0"


def bundled_words_path():
    """Path of the bundled five-word synthetic dataset."""
    return files(__name__) / "data" / "synthetic_words.json"


__all__ = [
    "Dataset",
    "Glyph",
    "PipelineConfig",
    "ShapePoint",
    "ShapePointCensus",
    "ShapePointKind",
    "Stroke",
    "WordRecord",
    "bundled_words_path",
    "classify_glyph",
    "compute_row",
    "count_unicodes",
    "load_dataset",
    "net_shape_complexity",
    "parse_dataset",
    "preprocess_glyph",
    "preprocess_word",
    "stability_index",
    "summarize_script",
]
