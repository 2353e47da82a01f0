"""Star-convex polygon toolkit for cell/nucleus instance detection.

Pipeline: label images are encoded into per-pixel object probabilities and
radial boundary distances; dense maps (ground truth or predicted) are
decoded back into instances by greedy polygon non-maximum suppression;
detections render to label images and are scored with AP over a sweep of
IoU thresholds. A synthetic touching-half-ellipse dataset generator and
bit-exact file formats round out the toolkit.
"""

from .model import (
    DenseMaps,
    DetectionSet,
    LabelImage,
    RadialGeometry,
    ScoreRow,
    ScoreTable,
    StarPolygon,
    relabel_dense,
)
from .encoder import background_distance, encode, object_probabilities, star_distances
from .detector import Candidate, NmsParams, collect_candidates, detect, greedy_nms
from .renderer import render_labels
from .metrics import (
    DEFAULT_TAUS,
    MatchResult,
    OverlapMatrix,
    ap_sweep,
    match_at,
    overlap_matrix,
    score_table_csv,
)
from .toygen import ToyConfig, generate_dataset, generate_image, generate_pair

__version__ = "0.1.0"

__all__ = [
    "LabelImage", "RadialGeometry", "DenseMaps", "StarPolygon", "DetectionSet",
    "ScoreRow", "ScoreTable", "relabel_dense",
    "background_distance", "object_probabilities", "star_distances", "encode",
    "Candidate", "NmsParams", "collect_candidates", "greedy_nms", "detect",
    "render_labels",
    "OverlapMatrix", "MatchResult", "overlap_matrix", "match_at", "ap_sweep",
    "score_table_csv", "DEFAULT_TAUS",
    "ToyConfig", "generate_pair", "generate_image", "generate_dataset",
    "__version__",
]
