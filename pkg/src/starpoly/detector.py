"""Decode dense maps into final instances via greedy polygon NMS.

Candidates are the per-pixel polygons at every location whose object
probability clears the threshold, visited best-first; a candidate survives
iff its overlap with every already-accepted detection stays at or below the
overlap threshold. Overlap uses exact polygon clipping; a bounding-box/grid
prefilter only skips clipping where disjoint boxes prove zero overlap, so
results are bit-identical with the prefilter on or off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import shapely

from . import geometry
from .model import DenseMaps, DetectionSet, StarPolygon

__all__ = ["NmsParams", "Candidate", "collect_candidates", "greedy_nms", "detect"]

MEASURES = ("iou", "ios")  # intersection over union / over the smaller area


@dataclass(frozen=True)
class NmsParams:
    prob_thresh: float = 0.5
    overlap_thresh: float = 0.4
    measure: str = "iou"
    min_area: float = 1.0  # drops degenerate polygons from near-zero radii
    grid_cell: int = 64  # prefilter cell size in pixels, semantics-free

    def __post_init__(self) -> None:
        if not 0.0 < self.prob_thresh < 1.0:
            raise ValueError(f"prob_thresh must be in (0, 1), got {self.prob_thresh}")
        if not 0.0 <= self.overlap_thresh < 1.0:
            raise ValueError(
                f"overlap_thresh must be in [0, 1), got {self.overlap_thresh}"
            )
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}, got {self.measure!r}")
        if self.min_area < 0.0:
            raise ValueError(f"min_area must be >= 0, got {self.min_area}")
        if self.grid_cell < 1:
            raise ValueError(f"grid_cell must be >= 1, got {self.grid_cell}")


@dataclass(frozen=True)
class Candidate:
    """A star polygon with its cached ring, area, and bounding box."""

    poly: StarPolygon
    ring: np.ndarray  # (n, 2) vertex ring
    area: float
    bbox: tuple[float, float, float, float]  # (i_min, j_min, i_max, j_max)


def collect_candidates(maps: DenseMaps, params: NmsParams) -> list[Candidate]:
    """Thresholded per-pixel polygon proposals, best-first.

    One candidate per pixel with prob > prob_thresh and polygon area >=
    min_area, sorted by descending probability with ties broken by (row, col)
    ascending, so the ordering is fully deterministic.
    """
    ii, jj = np.nonzero(maps.prob > params.prob_thresh)
    if ii.size == 0:
        return []
    probs = maps.prob[ii, jj].astype(np.float64)
    radii = maps.dist[:, ii, jj].T.astype(np.float64)
    rings = geometry.star_vertices(np.stack([ii, jj], axis=1), radii, maps.geometry)
    areas = geometry.ring_areas(rings)
    keep = areas >= params.min_area
    ii, jj, probs, radii = ii[keep], jj[keep], probs[keep], radii[keep]
    rings, areas = rings[keep], areas[keep]
    boxes = geometry.bounding_boxes(rings)
    order = np.lexsort((jj, ii, -probs))
    out = []
    for t in order:
        poly = StarPolygon(
            center=(int(ii[t]), int(jj[t])),
            prob=probs[t],
            radii=radii[t],
            geometry=maps.geometry,
        )
        out.append(
            Candidate(poly=poly, ring=rings[t], area=float(areas[t]), bbox=tuple(boxes[t]))
        )
    return out


def _boxes_touch(a, b) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


def _candidate_geos(cands: list[Candidate]) -> np.ndarray:
    """GEOS polygons for every candidate, built in one vectorized pass."""
    if not cands:
        return np.empty(0, dtype=object)
    sizes = {c.ring.shape for c in cands}
    if len(sizes) == 1:
        return np.atleast_1d(geometry.as_geos(np.stack([c.ring for c in cands])))
    return np.array([geometry.as_geos(c.ring) for c in cands], dtype=object)


def _grid_range(bbox, cell: int):
    return (
        math.floor(bbox[0] / cell),
        math.floor(bbox[1] / cell),
        math.floor(bbox[2] / cell),
        math.floor(bbox[3] / cell),
    )


def greedy_nms(
    cands: list[Candidate],
    params: NmsParams,
    height: int,
    width: int,
    use_grid: bool = True,
) -> DetectionSet:
    """Greedy suppression over a best-first candidate list.

    Acceptance order is the input order (already probability-descending), so
    the scan is inherently sequential; only the overlap checks of a single
    candidate against the accepted set are batched.
    """
    geos = _candidate_geos(cands)
    accepted: list[Candidate] = []
    acc_geoms: list = []
    acc_areas: list[float] = []
    grid: dict[tuple[int, int], list[int]] = {}
    for c, cand in enumerate(cands):
        geom = None
        if accepted:
            if use_grid:
                gi0, gj0, gi1, gj1 = _grid_range(cand.bbox, params.grid_cell)
                seen: set[int] = set()
                for gi in range(gi0, gi1 + 1):
                    for gj in range(gj0, gj1 + 1):
                        seen.update(grid.get((gi, gj), ()))
                pool = sorted(seen)
            else:
                pool = range(len(accepted))
            near = [t for t in pool if _boxes_touch(cand.bbox, accepted[t].bbox)]
            if near:
                geom = geos[c]
                inters = shapely.area(
                    shapely.intersection(geom, np.array([acc_geoms[t] for t in near]))
                )
                suppressed = False
                for inter, t in zip(inters, near):
                    if params.measure == "iou":
                        denom = cand.area + acc_areas[t] - inter
                    else:
                        denom = min(cand.area, acc_areas[t])
                    overlap = inter / denom if denom > 0.0 else 0.0
                    if overlap > params.overlap_thresh:
                        suppressed = True
                        break
                if suppressed:
                    continue
        idx = len(accepted)
        accepted.append(cand)
        acc_geoms.append(geom if geom is not None else geos[c])
        acc_areas.append(cand.area)
        gi0, gj0, gi1, gj1 = _grid_range(cand.bbox, params.grid_cell)
        for gi in range(gi0, gi1 + 1):
            for gj in range(gj0, gj1 + 1):
                grid.setdefault((gi, gj), []).append(idx)
    return DetectionSet(
        height=height,
        width=width,
        detections=tuple(c.poly for c in accepted),
        prob_thresh=params.prob_thresh,
        nms_thresh=params.overlap_thresh,
        measure=params.measure,
    )


def detect(maps: DenseMaps, params: NmsParams | None = None) -> DetectionSet:
    """collect_candidates followed by greedy_nms."""
    if params is None:
        params = NmsParams()
    cands = collect_candidates(maps, params)
    return greedy_nms(cands, params, maps.height, maps.width)
