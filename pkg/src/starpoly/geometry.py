"""Polygon math: vertex rings, areas, exact clipping, IoU, rasterization.

A vertex ring is an (n, 2) float array of (row, col) points, n >= 3, in the
angular order produced from a star polygon. Clipping goes through GEOS
(shapely), whose overlay is numerically robust on valid inputs; rings that
come out non-simple (possible when some radii are exactly 0) are repaired
with make_valid before use. Rasterization fills pixels whose center is
inside under the even-odd rule with a half-open (top-left) tie convention,
so polygons sharing an edge never claim the same pixel twice.
"""

from __future__ import annotations

import math

import numpy as np
import shapely

from .model import RadialGeometry, StarPolygon

__all__ = [
    "vertices",
    "star_vertices",
    "area",
    "ring_areas",
    "bounding_boxes",
    "as_geos",
    "clip_intersection",
    "intersection_area",
    "polygon_iou",
    "rasterize",
]


def vertices(poly: StarPolygon) -> np.ndarray:
    """Vertex ring of one star polygon: center + r_k * (sin phi_k, cos phi_k)."""
    center = np.asarray(poly.center, dtype=np.float64)
    return center + poly.radii[:, None] * poly.geometry.directions


def star_vertices(
    centers: np.ndarray, radii: np.ndarray, geom: RadialGeometry
) -> np.ndarray:
    """Vertex rings for a batch: (m, 2) centers + (m, n) radii -> (m, n, 2)."""
    centers = np.asarray(centers, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    return centers[:, None, :] + radii[:, :, None] * geom.directions[None, :, :]


def ring_areas(rings: np.ndarray) -> np.ndarray:
    """Absolute shoelace area per ring; rings shaped (..., n, 2)."""
    y = rings[..., 0]
    x = rings[..., 1]
    y2 = np.roll(y, -1, axis=-1)
    x2 = np.roll(x, -1, axis=-1)
    return 0.5 * np.abs(np.sum(x * y2 - x2 * y, axis=-1))


def area(ring: np.ndarray) -> float:
    """Absolute shoelace area of one ring."""
    return float(ring_areas(np.asarray(ring, dtype=np.float64)))


def bounding_boxes(rings: np.ndarray) -> np.ndarray:
    """Axis-aligned boxes (i_min, j_min, i_max, j_max) per ring, (m, 4)."""
    lo = rings.min(axis=-2)
    hi = rings.max(axis=-2)
    return np.concatenate([lo, hi], axis=-1)


def as_geos(rings: np.ndarray) -> np.ndarray:
    """GEOS polygons for a uniform batch of rings, (m, n, 2) -> (m,).

    Rings that come out non-simple (possible when some radii are exactly 0)
    are repaired with make_valid so that downstream area/intersection calls
    keep well-defined even-odd semantics instead of raising.
    """
    rings = np.asarray(rings, dtype=np.float64)
    squeeze = rings.ndim == 2
    if squeeze:
        rings = rings[None]
    polys = shapely.polygons(rings)
    bad = ~shapely.is_valid(polys)
    if bad.any():
        polys[bad] = shapely.make_valid(polys[bad])
    return polys[0] if squeeze else polys


def clip_intersection(a: np.ndarray, b: np.ndarray) -> list[np.ndarray]:
    """Intersection of two simple polygons as zero or more disjoint rings.

    Degenerate input (zero shoelace area) yields an empty list. The output
    rings' total area equals the true intersection area; lower-dimensional
    contact (shared edges or points) is dropped.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if area(a) == 0.0 or area(b) == 0.0:
        return []
    inter = shapely.intersection(as_geos(a), as_geos(b))
    if inter.geom_type in ("MultiPolygon", "GeometryCollection"):
        parts = list(shapely.get_parts(inter))
    else:
        parts = [inter]
    rings = []
    for part in parts:
        if part.geom_type == "Polygon" and not part.is_empty:
            ring = np.asarray(part.exterior.coords, dtype=np.float64)[:-1]
            if ring.shape[0] >= 3:
                rings.append(ring)
    return rings


def intersection_area(a: np.ndarray, b: np.ndarray) -> float:
    """Area of the intersection of two simple polygons (square pixels)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    # disjoint bounding boxes prove zero overlap without clipping
    if (
        a[:, 0].min() > b[:, 0].max()
        or b[:, 0].min() > a[:, 0].max()
        or a[:, 1].min() > b[:, 1].max()
        or b[:, 1].min() > a[:, 1].max()
    ):
        return 0.0
    if area(a) == 0.0 or area(b) == 0.0:
        return 0.0
    return float(shapely.area(shapely.intersection(as_geos(a), as_geos(b))))


def polygon_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two rings; 0 when both areas are 0."""
    inter = intersection_area(a, b)
    union = area(a) + area(b) - inter
    return inter / union if union > 0.0 else 0.0


def _crossings(ring: np.ndarray):
    """Non-horizontal edges as endpoint arrays (horizontal edges never cross)."""
    y0 = ring[:, 0]
    x0 = ring[:, 1]
    y1 = np.roll(y0, -1)
    x1 = np.roll(x0, -1)
    keep = y0 != y1
    return y0[keep], y1[keep], x0[keep], x1[keep]


def rasterize(ring: np.ndarray, height: int, width: int) -> np.ndarray:
    """Pixel mask of one ring on an (height, width) grid.

    Pixel (i, j) is set iff its center point (i, j) lies inside the polygon
    under the even-odd rule, with edges half-open in y (ymin <= y < ymax) and
    spans half-open in x ([left, right) on pixel centers). Clipped to image
    bounds; degenerate rings give an empty mask.
    """
    ring = np.asarray(ring, dtype=np.float64)
    mask = np.zeros((height, width), dtype=bool)
    y0, y1, x0, x1 = _crossings(ring)
    if y0.size == 0:
        return mask
    ymin = np.minimum(y0, y1)
    ymax = np.maximum(y0, y1)
    row_lo = max(0, math.ceil(ymin.min()))
    row_hi = min(height - 1, math.ceil(ymax.max()) - 1)
    inv = (x1 - x0) / (y1 - y0)
    for y in range(row_lo, row_hi + 1):
        sel = (ymin <= y) & (y < ymax)
        if not sel.any():
            continue
        xc = np.sort(x0[sel] + (y - y0[sel]) * inv[sel])
        for t in range(0, xc.size - 1, 2):
            lo = max(0, math.ceil(xc[t]))
            hi = min(width - 1, math.ceil(xc[t + 1]) - 1)
            if lo <= hi:
                mask[y, lo : hi + 1] = True
    return mask
