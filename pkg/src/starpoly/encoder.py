"""Encode a label image into training/decoding targets.

Two per-pixel quantities are produced: an object probability defined as the
Euclidean distance to the nearest background pixel, normalized per object so
each object's deepest pixel scores exactly 1; and, for each radial direction,
the distance marched along that direction until the ray leaves the pixel's
object. Pixels outside the image count as background for both quantities.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .model import DenseMaps, LabelImage, RadialGeometry

__all__ = ["background_distance", "object_probabilities", "star_distances", "encode"]


def background_distance(labels: LabelImage) -> np.ndarray:
    """Exact Euclidean distance to the nearest background pixel, float64.

    Background means a zero pixel or any position outside the image, so
    border foreground pixels are at distance 1. Distances are computed from
    the exact nearest-background offsets (integer feature transform), not an
    approximation.
    """
    mask = labels.labels > 0
    padded = np.pad(mask, 1)
    nearest = ndimage.distance_transform_edt(
        padded, return_distances=False, return_indices=True
    )
    ii, jj = np.indices(padded.shape)
    sq = (ii - nearest[0]) ** 2 + (jj - nearest[1]) ** 2
    return np.sqrt(sq[1:-1, 1:-1].astype(np.float64))


def object_probabilities(labels: LabelImage) -> np.ndarray:
    """Per-object max-normalized background distance, (H, W) float32 in [0, 1]."""
    d = background_distance(labels)
    lab = labels.labels
    k = labels.n_objects
    if k:
        peaks = np.asarray(
            ndimage.maximum(d, labels=lab, index=np.arange(1, k + 1)), dtype=np.float64
        )
        fg = lab > 0
        d[fg] /= peaks[lab[fg] - 1]
    return d.astype(np.float32)


def star_distances(labels: LabelImage, geom: RadialGeometry) -> np.ndarray:
    """March each radial direction until the ray exits the pixel's object.

    For foreground pixel p with ID L and direction k, positions
    p + m * (sin phi_k, cos phi_k) are probed for m = 1, 2, ... at the
    nearest-integer pixel (round half up per coordinate); the distance is the
    first m whose probe lies outside the image or on an ID != L. Background
    pixels get 0 in every plane; foreground distances are therefore >= 1.

    Returns (n_rays, H, W) float32.
    """
    lab = labels.labels
    h, w = lab.shape
    out = np.zeros((geom.n_rays, h, w), dtype=np.float32)
    fi, fj = np.nonzero(lab > 0)
    if fi.size == 0:
        return out
    fid = lab[fi, fj]
    max_steps = int(np.ceil(np.hypot(h, w))) + 1
    for k, (di, dj) in enumerate(geom.directions):
        radii = np.zeros(fi.size, dtype=np.float32)
        active = np.arange(fi.size)
        for m in range(1, max_steps + 1):
            pi = np.floor(fi[active] + m * di + 0.5).astype(np.int64)
            pj = np.floor(fj[active] + m * dj + 0.5).astype(np.int64)
            inside = (pi >= 0) & (pi < h) & (pj >= 0) & (pj < w)
            same = np.zeros(active.size, dtype=bool)
            idx = np.nonzero(inside)[0]
            same[idx] = lab[pi[idx], pj[idx]] == fid[active[idx]]
            radii[active[~same]] = m
            active = active[same]
            if active.size == 0:
                break
        out[k, fi, fj] = radii
    return out


def encode(labels: LabelImage, geom: RadialGeometry | None = None) -> DenseMaps:
    """Full encoding: probability plane plus one distance plane per direction."""
    if geom is None:
        geom = RadialGeometry()
    return DenseMaps(
        prob=object_probabilities(labels),
        dist=star_distances(labels, geom),
        geometry=geom,
    )
