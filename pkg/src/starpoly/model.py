"""Core domain types shared by every stage of the pipeline.

Coordinate convention, used everywhere: image coordinates are (row, col)
with row index i increasing downward and column index j increasing
rightward. Radial direction k corresponds to the unit step
(sin(phi_k), cos(phi_k)) in (row, col), with phi_k = 2*pi*k / n_rays.
All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "LabelImage",
    "RadialGeometry",
    "DenseMaps",
    "StarPolygon",
    "DetectionSet",
    "ScoreRow",
    "ScoreTable",
    "relabel_dense",
]


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LabelImage:
    """Instance-ID raster: 0 = background, positive IDs are dense 1..K."""

    labels: np.ndarray  # (H, W) int32

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.labels, dtype=np.int32)
        if arr.ndim != 2:
            raise ValueError(f"label raster must be 2-D, got shape {arr.shape}")
        if arr.size and arr.min() < 0:
            raise ValueError("label raster contains negative instance IDs")
        k = int(arr.max()) if arr.size else 0
        if k:
            present = np.bincount(arr.ravel(), minlength=k + 1)[1:] > 0
            if not present.all():
                missing = int(np.nonzero(~present)[0][0]) + 1
                raise ValueError(
                    f"instance IDs must be dense 1..{k}; ID {missing} is absent "
                    "(use relabel_dense to remap)"
                )
        object.__setattr__(self, "labels", _readonly(arr))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def n_objects(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0


@dataclass(frozen=True)
class RadialGeometry:
    """A fan of n_rays equidistant radial directions starting at angle 0."""

    n_rays: int = 32

    def __post_init__(self) -> None:
        if self.n_rays < 3:
            raise ValueError(f"need at least 3 radial directions, got {self.n_rays}")

    @cached_property
    def angles(self) -> np.ndarray:
        """phi_k = 2*pi*k / n_rays, strictly increasing, phi_0 = 0."""
        return _readonly(2.0 * np.pi * np.arange(self.n_rays) / self.n_rays)

    @cached_property
    def directions(self) -> np.ndarray:
        """Unit steps (sin phi_k, cos phi_k) in (row, col), shape (n_rays, 2)."""
        return _readonly(np.stack([np.sin(self.angles), np.cos(self.angles)], axis=1))


@dataclass(frozen=True)
class DenseMaps:
    """Per-pixel object probability plane plus n_rays radial-distance planes."""

    prob: np.ndarray  # (H, W) float32 in [0, 1]
    dist: np.ndarray  # (n_rays, H, W) float32 >= 0, pixel units
    geometry: RadialGeometry

    def __post_init__(self) -> None:
        prob = np.ascontiguousarray(self.prob, dtype=np.float32)
        dist = np.ascontiguousarray(self.dist, dtype=np.float32)
        if prob.ndim != 2:
            raise ValueError(f"probability plane must be 2-D, got shape {prob.shape}")
        if dist.ndim != 3 or dist.shape[0] != self.geometry.n_rays:
            raise ValueError(
                f"expected {self.geometry.n_rays} distance planes, got shape {dist.shape}"
            )
        if dist.shape[1:] != prob.shape:
            raise ValueError(
                f"plane dimensions differ: prob {prob.shape} vs dist {dist.shape[1:]}"
            )
        if prob.size:
            if not np.isfinite(prob).all() or prob.min() < 0.0 or prob.max() > 1.0:
                raise ValueError("probability values must be finite and within [0, 1]")
            if not np.isfinite(dist).all() or dist.min() < 0.0:
                raise ValueError("distance values must be finite and >= 0")
        object.__setattr__(self, "prob", _readonly(prob))
        object.__setattr__(self, "dist", _readonly(dist))

    @property
    def height(self) -> int:
        return self.prob.shape[0]

    @property
    def width(self) -> int:
        return self.prob.shape[1]


@dataclass(frozen=True)
class StarPolygon:
    """One candidate instance: a center pixel with per-direction radii.

    Vertex k sits at center + radii[k] * (sin phi_k, cos phi_k). Because the
    vertices are in strictly increasing angular order around the center, the
    ring is a simple polygon whenever all radii are positive, and it then
    contains its own center.
    """

    center: tuple[int, int]  # (i, j) pixel
    prob: float
    radii: np.ndarray  # (n_rays,) float
    geometry: RadialGeometry

    def __post_init__(self) -> None:
        radii = np.ascontiguousarray(self.radii, dtype=np.float64)
        if radii.shape != (self.geometry.n_rays,):
            raise ValueError(
                f"expected {self.geometry.n_rays} radii, got shape {radii.shape}"
            )
        if radii.size and (not np.isfinite(radii).all() or radii.min() < 0.0):
            raise ValueError("radii must be finite and >= 0")
        object.__setattr__(self, "center", (int(self.center[0]), int(self.center[1])))
        object.__setattr__(self, "prob", float(self.prob))
        object.__setattr__(self, "radii", _readonly(radii))


@dataclass(frozen=True)
class DetectionSet:
    """Non-maximum-suppression survivors for one image, best-first."""

    height: int
    width: int
    detections: tuple[StarPolygon, ...]
    prob_thresh: float
    nms_thresh: float
    measure: str = "iou"

    def __post_init__(self) -> None:
        object.__setattr__(self, "detections", tuple(self.detections))
        probs = [d.prob for d in self.detections]
        if any(a < b for a, b in zip(probs, probs[1:])):
            raise ValueError("detections must be ordered by non-increasing probability")

    def __len__(self) -> int:
        return len(self.detections)


@dataclass(frozen=True)
class ScoreRow:
    """Detection counts and score at one IoU threshold."""

    tau: float
    tp: int
    fp: int
    fn: int
    ap: float


@dataclass(frozen=True)
class ScoreTable:
    """AP over a sweep of IoU thresholds, plus the aggregation mode used."""

    rows: tuple[ScoreRow, ...]
    aggregation: str = "dataset"  # 'dataset' (summed counts) or 'image' (mean per-image AP)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))

    def ap_at(self, tau: float) -> float:
        for row in self.rows:
            if abs(row.tau - tau) < 1e-9:
                return row.ap
        raise KeyError(f"no row for tau={tau}")


def relabel_dense(labels: np.ndarray) -> LabelImage:
    """Remap positive IDs to 1..K in first-occurrence (row-major) order.

    Zero is preserved as background. Idempotent: a raster whose IDs are
    already dense 1..K in first-occurrence order comes back unchanged.
    """
    arr = np.asarray(labels)
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.issubdtype(arr.dtype, np.floating) or not np.equal(np.mod(arr, 1), 0).all():
            raise ValueError("label raster must contain integers")
        arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise ValueError("label raster contains negative instance IDs")
    flat = arr.ravel()
    ids, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    remap = np.zeros(ids.size, dtype=np.int32)
    pos = np.nonzero(ids > 0)[0]
    # rank positive IDs by where they first appear in row-major order
    order = pos[np.argsort(first[pos], kind="stable")]
    remap[order] = np.arange(1, order.size + 1, dtype=np.int32)
    return LabelImage(remap[inverse].reshape(arr.shape))
