"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately re-derive results from first principles
(exhaustive scans, per-pixel loops, naive marching) and stay independent of
the production code paths they are used to check.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from starpoly import geometry
from starpoly.model import LabelImage, RadialGeometry, relabel_dense


# --- random inputs -----------------------------------------------------------

def random_label_image(rng: np.random.Generator, h: int = 64, w: int = 64,
                       max_objects: int = 6) -> LabelImage:
    """Scattered disk/rectangle blobs; later blobs may overwrite earlier ones."""
    lab = np.zeros((h, w), np.int64)
    ii, jj = np.indices((h, w))
    for ident in range(1, int(rng.integers(1, max_objects + 1)) + 1):
        ci, cj = rng.uniform(2, h - 2), rng.uniform(2, w - 2)
        if rng.uniform() < 0.7:
            r = rng.uniform(1.5, min(h, w) / 6)
            blob = ((ii - ci) ** 2 + (jj - cj) ** 2) <= r * r
        else:
            ri, rj = rng.uniform(1, h / 6), rng.uniform(1, w / 6)
            blob = (np.abs(ii - ci) <= ri) & (np.abs(jj - cj) <= rj)
        lab[blob] = ident
    return relabel_dense(lab)


def random_dense_maps(rng: np.random.Generator, h: int = 24, w: int = 24,
                      n: int = 8):
    """Sparse random probability plane plus random distance planes."""
    from starpoly.model import DenseMaps

    prob = rng.uniform(0.0, 1.0, (h, w))
    prob *= rng.uniform(0.0, 1.0, (h, w)) > 0.6
    dist = rng.uniform(0.0, 6.0, (n, h, w))
    return DenseMaps(prob.astype(np.float32), dist.astype(np.float32),
                     RadialGeometry(n))


def random_star_ring(rng: np.random.Generator, n: int = 32,
                     base: tuple[float, float] = (9.0, 18.0),
                     center=(0.0, 0.0)) -> np.ndarray:
    """Plausible cell-like star polygon: smoothed radial noise around a base."""
    scale = rng.uniform(*base)
    bumps = rng.uniform(0.55, 1.45, n)
    kernel = np.ones(5) / 5
    bumps = np.convolve(np.r_[bumps[-2:], bumps, bumps[:2]], kernel, mode="valid")
    radii = scale * bumps
    geom = RadialGeometry(n)
    return np.asarray(center, float) + radii[:, None] * geom.directions


def disk_label_image(radius: float, size: int | None = None,
                     center=None) -> LabelImage:
    size = size or int(2 * radius + 9)
    ci, cj = center or (size // 2, size // 2)
    ii, jj = np.indices((size, size))
    lab = (((ii - ci) ** 2 + (jj - cj) ** 2) <= radius * radius).astype(np.int32)
    return LabelImage(lab)


# --- oracles -------------------------------------------------------------------

def brute_background_distance(labels: LabelImage) -> np.ndarray:
    """O(N*B) scan: min distance from each foreground pixel to any background
    position, where positions outside the image count as background."""
    lab = labels.labels
    h, w = lab.shape
    big = np.pad(lab == 0, 1, constant_values=True)
    ys, xs = np.nonzero(big)
    out = np.zeros((h, w), np.float64)
    ii, jj = np.nonzero(lab > 0)
    for i, j in zip(ii, jj):
        sq = ((ys - (i + 1)) ** 2 + (xs - (j + 1)) ** 2).min()
        out[i, j] = math.sqrt(float(sq))
    return out


def brute_star_distances(labels: LabelImage, geom: RadialGeometry) -> np.ndarray:
    """Per-pixel, per-direction naive marching with round-half-up lookups."""
    lab = labels.labels
    h, w = lab.shape
    out = np.zeros((geom.n_rays, h, w), np.float32)
    sin = np.sin(geom.angles)
    cos = np.cos(geom.angles)
    for i in range(h):
        for j in range(w):
            ident = lab[i, j]
            if ident == 0:
                continue
            for k in range(geom.n_rays):
                m = 0
                while True:
                    m += 1
                    pi = math.floor(i + m * sin[k] + 0.5)
                    pj = math.floor(j + m * cos[k] + 0.5)
                    if not (0 <= pi < h and 0 <= pj < w) or lab[pi, pj] != ident:
                        out[k, i, j] = m
                        break
    return out


def discrete_star_convex(lab: np.ndarray, i: int, j: int) -> bool:
    """Is the rasterized object star-convex about pixel (i, j)?

    Walks the segment from (i, j) to every same-ID pixel in unit steps with
    the same round-half-up lookups the ray marcher uses; the object is
    star-convex about the pixel iff no sample leaves the ID. Tip pixels of
    slanted shapes typically fail this because of staircase notches.
    """
    ident = lab[i, j]
    ii, jj = np.nonzero(lab == ident)
    for qi, qj in zip(ii, jj):
        d = math.hypot(qi - i, qj - j)
        for m in range(1, int(d) + 1):
            t = m / d
            pi = math.floor(i + t * (qi - i) + 0.5)
            pj = math.floor(j + t * (qj - j) + 0.5)
            if lab[pi, pj] != ident:
                return False
    return True


def brute_point_inside(ring: np.ndarray, y: float, x: float) -> bool:
    """Even-odd containment: parity of crossings strictly right of the point.

    Uses the same half-open edge rule and the same inverse-slope expression
    as the production rasterizer, so agreement is expected to be exact.
    """
    count = 0
    m = len(ring)
    for t in range(m):
        y0, x0 = ring[t]
        y1, x1 = ring[(t + 1) % m]
        if y0 == y1:
            continue
        if min(y0, y1) <= y < max(y0, y1):
            if x0 + (y - y0) * ((x1 - x0) / (y1 - y0)) > x:
                count += 1
    return count % 2 == 1


def brute_rasterize(ring: np.ndarray, h: int, w: int) -> np.ndarray:
    out = np.zeros((h, w), bool)
    for i in range(h):
        for j in range(w):
            out[i, j] = brute_point_inside(ring, float(i), float(j))
    return out


def supersampled_intersection(a: np.ndarray, b: np.ndarray, factor: int = 4) -> float:
    """Deterministic area estimate: count subpixel centers inside both rings."""
    lo = np.maximum(a.min(0), b.min(0))
    hi = np.minimum(a.max(0), b.max(0))
    if (hi <= lo).any():
        return 0.0
    step = 1.0 / factor
    ys = np.arange(lo[0] + step / 2, hi[0], step)
    xs = np.arange(lo[1] + step / 2, hi[1], step)
    if ys.size == 0 or xs.size == 0:
        return 0.0
    yy, xx = np.meshgrid(ys, xs, indexing="ij")

    def inside(ring):
        acc = np.zeros(yy.shape, bool)
        m = len(ring)
        for t in range(m):
            y0, x0 = ring[t]
            y1, x1 = ring[(t + 1) % m]
            if y0 == y1:
                continue
            cross = (min(y0, y1) <= yy) & (yy < max(y0, y1))
            acc ^= cross & (x0 + (yy - y0) * (x1 - x0) / (y1 - y0) > xx)
        return acc

    return float((inside(a) & inside(b)).sum()) * step * step


def brute_greedy_nms(cands, params):
    """Reference suppression: no prefilter, scalar clipping for every pair."""
    accepted = []
    for cand in cands:
        ok = True
        for other in accepted:
            inter = geometry.intersection_area(cand.ring, other.ring)
            if params.measure == "iou":
                denom = cand.area + other.area - inter
            else:
                denom = min(cand.area, other.area)
            overlap = inter / denom if denom > 0.0 else 0.0
            if overlap > params.overlap_thresh:
                ok = False
                break
        if ok:
            accepted.append(cand)
    return accepted


def exhaustive_max_matching(iou: np.ndarray, tau: float) -> int:
    """Size of a maximum one-to-one matching among pairs with IoU > tau.

    Augmenting-path bipartite matching: exact for any threshold, independent
    of the greedy strategy under test.
    """
    adj = [[g for g in range(iou.shape[1]) if iou[p, g] > tau]
           for p in range(iou.shape[0])]
    match_g: dict[int, int] = {}

    def try_augment(p: int, visited: set[int]) -> bool:
        for g in adj[p]:
            if g in visited:
                continue
            visited.add(g)
            if g not in match_g or try_augment(match_g[g], visited):
                match_g[g] = p
                return True
        return False

    return sum(try_augment(p, set()) for p in range(iou.shape[0]))


# --- toy fixtures ---------------------------------------------------------------

@pytest.fixture(scope="session")
def toy_images_small():
    """A handful of default-config toy images for mid-weight tests."""
    from starpoly.toygen import ToyConfig, generate_image

    config = ToyConfig(count=4, seed=11)
    return [generate_image(config, idx) for idx in range(config.count)]
