import numpy as np

from starpoly import geometry
from starpoly.detector import NmsParams, detect
from starpoly.encoder import encode
from starpoly.model import DetectionSet, RadialGeometry, StarPolygon
from starpoly.renderer import render_labels

from conftest import brute_point_inside, random_label_image


def star(center, prob, radius, n=8):
    geom = RadialGeometry(n)
    return StarPolygon(center=center, prob=prob, radii=np.full(n, float(radius)),
                       geometry=geom)


class TestRenderLabels:
    def test_empty_set(self):
        out = render_labels(DetectionSet(12, 9, (), 0.5, 0.4))
        assert out.labels.shape == (12, 9)
        assert out.n_objects == 0

    def test_single_detection_matches_rasterize(self):
        poly = star((10, 10), 0.9, 6.0, n=16)
        dets = DetectionSet(24, 24, (poly,), 0.5, 0.4)
        out = render_labels(dets)
        mask = geometry.rasterize(geometry.vertices(poly), 24, 24)
        assert np.array_equal(out.labels > 0, mask)
        assert out.n_objects == 1

    def test_overlap_resolved_by_probability(self):
        a = star((10, 10), 0.9, 6.0)
        b = star((10, 14), 0.7, 6.0)
        dets = DetectionSet(24, 24, (a, b), 0.5, 0.4)
        out = render_labels(dets)
        ring_a = geometry.vertices(a)
        ring_b = geometry.vertices(b)
        # per-pixel oracle: argmax probability among containing polygons
        for i in range(24):
            for j in range(24):
                in_a = brute_point_inside(ring_a, float(i), float(j))
                in_b = brute_point_inside(ring_b, float(i), float(j))
                want = 1 if in_a else (2 if in_b else 0)
                assert out.labels[i, j] == want

    def test_zero_pixel_detections_dropped_and_ids_dense(self):
        big = star((8, 8), 0.9, 7.0)
        hidden = star((8, 8), 0.5, 1.5)  # fully painted over by big
        edge = star((15, 15), 0.3, 1.5)
        dets = DetectionSet(16, 16, (big, hidden, edge), 0.2, 0.9)
        out = render_labels(dets)
        ids = np.unique(out.labels)
        assert ids[0] == 0
        assert list(ids[1:]) == list(range(1, out.n_objects + 1))
        # the most probable detection keeps rank 1
        assert out.labels[8, 8] == 1

    def test_every_nonzero_pixel_inside_some_polygon(self):
        rng = np.random.default_rng(2)
        labels = random_label_image(rng, 48, 48)
        dets = detect(encode(labels, RadialGeometry(16)), NmsParams())
        out = render_labels(dets)
        rings = [geometry.vertices(d) for d in dets.detections]
        masks = [geometry.rasterize(r, 48, 48) for r in rings]
        covered = np.zeros((48, 48), bool)
        for m in masks:
            covered |= m
        assert not (out.labels > 0)[~covered].any()

    def test_pixel_count_bounded_by_own_rasterization(self):
        a = star((10, 10), 0.9, 6.0)
        b = star((10, 14), 0.7, 6.0)
        dets = DetectionSet(24, 24, (a, b), 0.5, 0.4)
        out = render_labels(dets)
        for rank, poly in enumerate(dets.detections, start=1):
            own = geometry.rasterize(geometry.vertices(poly), 24, 24).sum()
            assert (out.labels == rank).sum() <= own

    def test_explicit_dims_override(self):
        poly = star((3, 3), 0.8, 2.0)
        out = render_labels(DetectionSet(8, 8, (poly,), 0.5, 0.4), height=5, width=20)
        assert out.labels.shape == (5, 20)
