"""Turn a detection set into a label image for metric evaluation and export.

Detections are painted in order of increasing probability, each writing its
1-based rank (1 = most probable), so pixels contested by overlapping
polygons end up with the more confident detection. Polygons are clipped to
the image; detections left with zero pixels are dropped and the remaining
IDs re-densified, preserving the probability ranking.
"""

from __future__ import annotations

import numpy as np

from . import geometry
from .model import DetectionSet, LabelImage

__all__ = ["render_labels"]


def render_labels(
    dets: DetectionSet, height: int | None = None, width: int | None = None
) -> LabelImage:
    h = dets.height if height is None else height
    w = dets.width if width is None else width
    out = np.zeros((h, w), dtype=np.int32)
    for rank in range(len(dets.detections), 0, -1):
        ring = geometry.vertices(dets.detections[rank - 1])
        mask = geometry.rasterize(ring, h, w)
        out[mask] = rank
    present = np.unique(out)
    present = present[present > 0]
    if present.size and (present.size != present[-1]):
        lut = np.zeros(int(present[-1]) + 1, dtype=np.int32)
        lut[present] = np.arange(1, present.size + 1, dtype=np.int32)
        out = lut[out]
    return LabelImage(out)
