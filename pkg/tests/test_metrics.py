import numpy as np
import pytest

from starpoly.metrics import (
    DEFAULT_TAUS,
    ap_sweep,
    match_at,
    overlap_matrix,
    read_score_csv,
    score_table_csv,
)
from starpoly.model import LabelImage, ScoreRow, ScoreTable, relabel_dense

from conftest import exhaustive_max_matching, random_label_image


def square_pair(shift: int):
    """One 10x10 square object, prediction shifted right by `shift` pixels."""
    gt = np.zeros((24, 40), np.int32)
    gt[5:15, 5:15] = 1
    pred = np.zeros((24, 40), np.int32)
    pred[5:15, 5 + shift : 15 + shift] = 1
    return LabelImage(pred), LabelImage(gt)


class TestOverlapMatrix:
    def test_perfect_prediction_is_diagonal(self):
        rng = np.random.default_rng(1)
        lab = random_label_image(rng)
        m = overlap_matrix(lab, lab)
        iou = m.iou()
        assert np.allclose(np.diag(iou), 1.0)
        off = iou - np.diag(np.diag(iou))
        assert (off < 1.0).all()

    def test_background_only_prediction(self):
        rng = np.random.default_rng(2)
        gt = random_label_image(rng)
        pred = LabelImage(np.zeros(gt.labels.shape, np.int32))
        m = overlap_matrix(pred, gt)
        assert m.n_pred == 0 and m.n_gt == gt.n_objects
        r = match_at(m, 0.5)
        assert (r.tp, r.fp, r.fn) == (0, 0, gt.n_objects)

    def test_shifted_square_iou_third(self):
        pred, gt = square_pair(5)
        m = overlap_matrix(pred, gt)
        assert m.iou()[0, 0] == pytest.approx(1 / 3)
        assert m.counts[0, 0] == 50
        assert m.pred_areas[0] == m.gt_areas[0] == 100

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            overlap_matrix(
                LabelImage(np.zeros((4, 4), np.int32)),
                LabelImage(np.zeros((5, 4), np.int32)),
            )


class TestMatchAt:
    def test_perfect_prediction_all_taus(self):
        rng = np.random.default_rng(3)
        lab = random_label_image(rng)
        m = overlap_matrix(lab, lab)
        for tau in (0.0, 0.5, 0.9, 0.99):
            r = match_at(m, tau)
            assert (r.tp, r.fp, r.fn) == (lab.n_objects, 0, 0)

    def test_shifted_square_threshold_behavior(self):
        pred, gt = square_pair(5)
        m = overlap_matrix(pred, gt)
        assert match_at(m, 0.3).tp == 1
        assert match_at(m, 0.5).tp == 0

    def test_matched_pairs_exceed_tau_and_are_one_to_one(self):
        rng = np.random.default_rng(4)
        pred = random_label_image(rng, 32, 32)
        gt = random_label_image(rng, 32, 32)
        r = match_at(overlap_matrix(pred, gt), 0.2)
        preds = [p for p, _, _ in r.pairs]
        gts = [g for _, g, _ in r.pairs]
        assert len(set(preds)) == len(preds) and len(set(gts)) == len(gts)
        assert all(v > 0.2 for _, _, v in r.pairs)

    def test_greedy_equals_exhaustive_at_half_and_above(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            pred = random_label_image(rng, 16, 16, max_objects=6)
            gt = random_label_image(rng, 16, 16, max_objects=6)
            m = overlap_matrix(pred, gt)
            for tau in (0.5, 0.7, 0.9):
                assert match_at(m, tau).tp == exhaustive_max_matching(m.iou(), tau)

    def test_count_identities(self):
        rng = np.random.default_rng(6)
        pred = random_label_image(rng)
        gt = random_label_image(rng)
        m = overlap_matrix(pred, gt)
        for tau in DEFAULT_TAUS:
            r = match_at(m, tau)
            assert r.tp + r.fp == m.n_pred
            assert r.tp + r.fn == m.n_gt


class TestApSweep:
    def test_ap_formula_spot_check(self):
        # 9 TP, 1 FP, 0 FN -> 0.9
        gt = np.zeros((12, 120), np.int32)
        pred = np.zeros((12, 120), np.int32)
        for k in range(9):
            gt[2:9, 2 + 12 * k : 9 + 12 * k] = k + 1
            pred[2:9, 2 + 12 * k : 9 + 12 * k] = k + 1
        pred[10:12, 110:118] = 10  # unmatched extra prediction
        table = ap_sweep([(LabelImage(pred), LabelImage(gt))], taus=(0.5,))
        row = table.rows[0]
        assert (row.tp, row.fp, row.fn) == (9, 1, 0)
        assert f"{row.ap:.4f}" == "0.9000"

    def test_two_image_aggregations_coincide_here(self):
        one = np.zeros((8, 8), np.int32)
        one[2:6, 2:6] = 1
        empty = np.zeros((8, 8), np.int32)
        pairs = [
            (LabelImage(one), LabelImage(one)),  # TP=1
            (LabelImage(empty), LabelImage(one)),  # FN=1
        ]
        for agg in ("dataset", "image"):
            table = ap_sweep(pairs, taus=(0.5,), aggregation=agg)
            assert table.rows[0].ap == pytest.approx(0.5)
            assert table.aggregation == agg

    def test_default_tau_grid(self):
        assert DEFAULT_TAUS == (0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90)
        table = ap_sweep([square_pair(0)])
        assert tuple(r.tau for r in table.rows) == DEFAULT_TAUS

    def test_ap_non_increasing_in_tau(self):
        rng = np.random.default_rng(7)
        pairs = [
            (random_label_image(rng, 48, 48), random_label_image(rng, 48, 48))
            for _ in range(4)
        ]
        # evaluate predictions against perturbed copies of themselves too
        pairs += [(a, a) for a, _ in pairs[:2]]
        table = ap_sweep(pairs)
        aps = [r.ap for r in table.rows]
        assert all(x >= y for x, y in zip(aps, aps[1:]))

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(8)
        pred = random_label_image(rng)
        gt = random_label_image(rng)
        # permute instance IDs of the prediction
        perm = rng.permutation(pred.n_objects) + 1
        lut = np.zeros(pred.n_objects + 1, np.int64)
        lut[1:] = perm
        permuted = relabel_dense(lut[pred.labels])
        t1 = ap_sweep([(pred, gt)])
        t2 = ap_sweep([(permuted, gt)])
        assert [(r.tp, r.fp, r.fn, r.ap) for r in t1.rows] == [
            (r.tp, r.fp, r.fn, r.ap) for r in t2.rows
        ]

    def test_empty_pair_list_rejected(self):
        with pytest.raises(ValueError):
            ap_sweep([])


class TestScoreCsv:
    def test_format(self):
        table = ScoreTable(
            rows=(ScoreRow(tau=0.5, tp=9, fp=1, fn=0, ap=0.9),), aggregation="dataset"
        )
        text = score_table_csv(table)
        assert text.splitlines()[0] == "tau,tp,fp,fn,ap"
        assert text.splitlines()[1] == "0.50000,9,1,0,0.90000"

    def test_round_trip(self):
        pred, gt = square_pair(3)
        table = ap_sweep([(pred, gt)])
        back = read_score_csv(score_table_csv(table))
        for a, b in zip(table.rows, back.rows):
            assert (a.tp, a.fp, a.fn) == (b.tp, b.fp, b.fn)
            assert b.tau == pytest.approx(a.tau, abs=1e-5)
            assert b.ap == pytest.approx(a.ap, abs=1e-5)

    def test_bad_header_rejected(self):
        with pytest.raises(ValueError):
            read_score_csv("nope\n1,2,3,4,5\n")
