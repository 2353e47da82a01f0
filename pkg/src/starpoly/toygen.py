"""Synthetic dataset of touching half-ellipse pairs with blur and noise.

Each pair is one full ellipse cut along its major axis into two instances
that touch along the long flat side but share no pixel. Pairs are either
axis-aligned (the halves' bounding boxes barely overlap) or oblique (the
boxes are nearly identical), which makes the bounding-box-overlap histogram
bimodal by construction: the dataset exists to punish detectors that reason
in axis-aligned boxes. Generation is reproducible: image k draws from an RNG
stream seeded by (seed, k), so parallel generation equals sequential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy import ndimage

from .model import LabelImage

__all__ = ["ToyConfig", "PairGeometry", "sample_pair", "pair_masks", "generate_pair",
           "generate_image", "generate_dataset", "train_test_split", "mask_bbox_iou"]

# The sampler constrains b <= ASPECT_CAP * a (and therefore a >= 8 / ASPECT_CAP
# given the semi-minor floor): rounder oblique pairs at shallow angles would
# otherwise fall into the designed bounding-box-overlap gap between the two
# placement modes. Sampled values stay inside the configured ranges.
ASPECT_CAP = 0.6

_PLACEMENT_ATTEMPTS = 100
_MARGIN_PX = 2


@dataclass(frozen=True)
class ToyConfig:
    size: int = 256
    count: int = 1000
    pairs: tuple[int, int] = (4, 8)  # pairs per image, inclusive
    semi_major: tuple[float, float] = (12.0, 32.0)
    semi_minor: tuple[float, float] = (8.0, 22.0)
    oblique_angles: tuple[float, float] = (30.0, 60.0)  # degrees; mirrored band +90
    blur_sigma: tuple[float, float] = (1.0, 2.0)
    noise_std: tuple[float, float] = (0.03, 0.08)  # of the unit dynamic range
    foreground: tuple[float, float] = (0.5, 0.9)
    background: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.size < 64:
            raise ValueError(f"image size must be >= 64, got {self.size}")
        for name in ("pairs", "semi_major", "semi_minor", "oblique_angles",
                     "blur_sigma", "noise_std", "foreground"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise ValueError(f"empty range for {name}: {lo}..{hi}")
        if self.count < 0:
            raise ValueError("count must be >= 0")


@dataclass(frozen=True)
class PairGeometry:
    """One placed ellipse: orientation, semi-axes, center, and its mode.

    The split line is the major axis, so the two halves share their long flat
    side and are separated along the minor direction; that is what makes the
    bounding boxes of an oblique pair nearly identical. theta = 0 points the
    major axis down the +row direction (halves then sit left/right).
    """

    theta: float  # major-axis direction in degrees from the +row axis
    a: float  # semi-major axis, pixels
    b: float  # semi-minor axis, pixels
    center: tuple[float, float]  # (row, col)
    axis_aligned: bool


def sample_pair(rng: np.random.Generator, config: ToyConfig) -> PairGeometry:
    """Draw one pair: mode, orientation, axes, then a center the ellipse fits at.

    Raises ValueError when the sampled ellipse cannot fit the image with the
    placement margin; callers doing rejection sampling treat that as a failed
    attempt.
    """
    axis_aligned = rng.uniform() < 0.5
    if axis_aligned:
        theta = 90.0 * rng.integers(0, 2)
    else:
        lo, hi = config.oblique_angles
        theta = rng.uniform(lo, hi) + 90.0 * rng.integers(0, 2)
    a_lo = max(config.semi_major[0], config.semi_minor[0] / ASPECT_CAP)
    a = rng.uniform(a_lo, max(a_lo, config.semi_major[1]))
    b = rng.uniform(config.semi_minor[0], min(config.semi_minor[1], ASPECT_CAP * a))
    ri, rj = _extent(a, b, theta)
    h = w = config.size
    lo_i, hi_i = ri + _MARGIN_PX, h - 1 - ri - _MARGIN_PX
    lo_j, hi_j = rj + _MARGIN_PX, w - 1 - rj - _MARGIN_PX
    if lo_i > hi_i or lo_j > hi_j:
        raise ValueError(
            f"ellipse with extent ({ri:.1f}, {rj:.1f}) cannot fit a {h}x{w} image"
        )
    center = (rng.uniform(lo_i, hi_i), rng.uniform(lo_j, hi_j))
    return PairGeometry(theta=float(theta), a=a, b=b, center=center,
                        axis_aligned=bool(axis_aligned))


def pair_masks(pair: PairGeometry, size: int):
    """Rasterize the pair: two pixel-disjoint halves whose union is the ellipse.

    The cut runs along the major axis; pixels exactly on the split line go to
    the first half (half-open rule), so each boundary pixel belongs to exactly
    one instance and the halves touch without sharing pixels.
    """
    t = math.radians(pair.theta)
    ii, jj = np.ogrid[:size, :size]
    di = ii - pair.center[0]
    dj = jj - pair.center[1]
    u = di * math.cos(t) + dj * math.sin(t)  # along the major axis
    v = dj * math.cos(t) - di * math.sin(t)  # along the minor axis
    inside = (u / pair.a) ** 2 + (v / pair.b) ** 2 <= 1.0
    return inside & (v >= 0), inside & (v < 0)


def generate_pair(rng: np.random.Generator, config: ToyConfig):
    """One touching half-ellipse pair somewhere in an empty image, as two masks."""
    return pair_masks(sample_pair(rng, config), config.size)


def _extent(a, b, theta_deg):
    """Half-extent of the ellipse bounding box along (rows, cols)."""
    t = math.radians(theta_deg)
    ri = math.hypot(a * math.cos(t), b * math.sin(t))
    rj = math.hypot(a * math.sin(t), b * math.cos(t))
    return ri, rj


def generate_image(config: ToyConfig, index: int):
    """Render image `index`: (intensity array in [0, 1], LabelImage)."""
    rng = np.random.default_rng([config.seed, index])
    h = w = config.size
    labels = np.zeros((h, w), dtype=np.int32)
    blocked = np.zeros((h, w), dtype=bool)  # occupied + margin
    struct = np.ones((3, 3), dtype=bool)
    fg_values: list[float] = []
    n_pairs = int(rng.integers(config.pairs[0], config.pairs[1] + 1))
    for _ in range(n_pairs):
        for _attempt in range(_PLACEMENT_ATTEMPTS):
            try:
                pair = sample_pair(rng, config)
            except ValueError:
                continue
            half_a, half_b = pair_masks(pair, config.size)
            union = half_a | half_b
            if (union & blocked).any():
                continue
            labels[half_a] = len(fg_values) + 1
            labels[half_b] = len(fg_values) + 2
            fg_values.append(float(rng.uniform(*config.foreground)))
            fg_values.append(float(rng.uniform(*config.foreground)))
            blocked |= ndimage.binary_dilation(union, structure=struct,
                                               iterations=_MARGIN_PX)
            break
    img = np.full((h, w), config.background, dtype=np.float64)
    for inst, fg in enumerate(fg_values, start=1):
        img[labels == inst] = config.background + fg
    sigma = rng.uniform(*config.blur_sigma)
    img = ndimage.gaussian_filter(img, sigma)
    img += rng.uniform(*config.noise_std) * rng.standard_normal((h, w))
    np.clip(img, 0.0, 1.0, out=img)
    return img, LabelImage(labels)


def generate_dataset(config: ToyConfig) -> Iterator[tuple[np.ndarray, LabelImage]]:
    """All images of the configured dataset, in index order."""
    for index in range(config.count):
        yield generate_image(config, index)


def train_test_split(count: int) -> tuple[range, range]:
    """Deterministic 90/10 split by index: first 90% train, rest test."""
    n_train = (count * 9) // 10
    return range(n_train), range(n_train, count)


def mask_bbox_iou(a: np.ndarray, b: np.ndarray) -> float:
    """IoU of the axis-aligned bounding boxes of two non-empty masks."""
    boxes = []
    for m in (a, b):
        ii, jj = np.nonzero(m)
        boxes.append((ii.min(), jj.min(), ii.max() + 1, jj.max() + 1))
    (ai0, aj0, ai1, aj1), (bi0, bj0, bi1, bj1) = boxes
    ih = max(0, min(ai1, bi1) - max(ai0, bi0))
    iw = max(0, min(aj1, bj1) - max(aj0, bj0))
    inter = ih * iw
    union = (ai1 - ai0) * (aj1 - aj0) + (bi1 - bi0) * (bj1 - bj0) - inter
    return inter / union
