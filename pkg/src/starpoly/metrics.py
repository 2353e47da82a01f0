"""Detection scoring: IoU matching of instances and AP over a threshold sweep.

A predicted object counts as a true positive at threshold tau iff it is
matched one-to-one with a ground-truth object at IoU strictly greater than
tau; unmatched predictions are false positives, unmatched ground truth
false negatives, and AP_tau = TP / (TP + FP + FN). Matching is greedy over
pairs in IoU-descending order with deterministic tie-breaks; for tau >= 0.5
this equals the optimal matching because no object can exceed 0.5 IoU with
two partners.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import LabelImage, ScoreRow, ScoreTable

__all__ = [
    "DEFAULT_TAUS",
    "OverlapMatrix",
    "MatchResult",
    "overlap_matrix",
    "match_at",
    "ap_sweep",
    "score_table_csv",
    "read_score_csv",
]

DEFAULT_TAUS: tuple[float, ...] = tuple(round(0.50 + 0.05 * k, 2) for k in range(9))

AGGREGATIONS = ("dataset", "image")


@dataclass(frozen=True)
class OverlapMatrix:
    """Pairwise pixel-intersection counts plus per-object pixel areas."""

    counts: np.ndarray  # (K_pred, K_gt) int64
    pred_areas: np.ndarray  # (K_pred,) int64
    gt_areas: np.ndarray  # (K_gt,) int64

    @property
    def n_pred(self) -> int:
        return self.pred_areas.size

    @property
    def n_gt(self) -> int:
        return self.gt_areas.size

    def iou(self) -> np.ndarray:
        """IoU(p, g) = inter / (area_p + area_g - inter), shape (K_pred, K_gt)."""
        union = self.pred_areas[:, None] + self.gt_areas[None, :] - self.counts
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(union > 0, self.counts / union, 0.0)
        return out


@dataclass(frozen=True)
class MatchResult:
    tau: float
    pairs: tuple[tuple[int, int, float], ...]  # (pred ID, gt ID, IoU), 1-based IDs
    tp: int
    fp: int
    fn: int


def overlap_matrix(pred: LabelImage, gt: LabelImage) -> OverlapMatrix:
    """Single-pass co-occurrence counts of (pred ID, gt ID) over all pixels."""
    if pred.labels.shape != gt.labels.shape:
        raise ValueError(
            f"dimension mismatch: pred {pred.labels.shape} vs gt {gt.labels.shape}"
        )
    kp, kg = pred.n_objects, gt.n_objects
    p = pred.labels.ravel().astype(np.int64)
    g = gt.labels.ravel().astype(np.int64)
    pair = p * (kg + 1) + g
    counts = np.bincount(pair, minlength=(kp + 1) * (kg + 1)).reshape(kp + 1, kg + 1)
    return OverlapMatrix(
        counts=counts[1:, 1:],
        pred_areas=np.bincount(p, minlength=kp + 1)[1:],
        gt_areas=np.bincount(g, minlength=kg + 1)[1:],
    )


def match_at(matrix: OverlapMatrix, tau: float) -> MatchResult:
    """One-to-one matching of pairs with IoU > tau, greedy in IoU order.

    Pairs are visited by descending IoU, ties broken by (pred ID, gt ID)
    ascending. Below tau = 0.5 the greedy result can be suboptimal; at or
    above it is provably maximal.
    """
    iou = matrix.iou()
    cand_p, cand_g = np.nonzero(iou > tau)
    vals = iou[cand_p, cand_g]
    order = np.lexsort((cand_g, cand_p, -vals))
    used_p = np.zeros(matrix.n_pred, dtype=bool)
    used_g = np.zeros(matrix.n_gt, dtype=bool)
    pairs = []
    for t in order:
        p, g = cand_p[t], cand_g[t]
        if used_p[p] or used_g[g]:
            continue
        used_p[p] = used_g[g] = True
        pairs.append((int(p) + 1, int(g) + 1, float(vals[t])))
    tp = len(pairs)
    return MatchResult(
        tau=tau, pairs=tuple(pairs), tp=tp, fp=matrix.n_pred - tp, fn=matrix.n_gt - tp
    )


def _ap(tp: int, fp: int, fn: int) -> float:
    total = tp + fp + fn
    # nothing predicted and nothing to find counts as a perfect (empty) result
    return tp / total if total else 1.0


def ap_sweep(
    pairs: Iterable[tuple[LabelImage, LabelImage]],
    taus: Sequence[float] = DEFAULT_TAUS,
    aggregation: str = "dataset",
) -> ScoreTable:
    """Score (pred, gt) image pairs across a threshold sweep.

    'dataset' aggregation sums TP/FP/FN over all images per tau and applies
    the AP formula once; 'image' averages per-image AP values. The count
    columns hold the summed counts in both modes.
    """
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")
    matrices = [overlap_matrix(pred, gt) for pred, gt in pairs]
    if not matrices:
        raise ValueError("need at least one (pred, gt) image pair")
    rows = []
    for tau in taus:
        results = [match_at(m, tau) for m in matrices]
        tp = sum(r.tp for r in results)
        fp = sum(r.fp for r in results)
        fn = sum(r.fn for r in results)
        if aggregation == "dataset":
            ap = _ap(tp, fp, fn)
        else:
            ap = float(np.mean([_ap(r.tp, r.fp, r.fn) for r in results]))
        rows.append(ScoreRow(tau=float(tau), tp=tp, fp=fp, fn=fn, ap=ap))
    return ScoreTable(rows=tuple(rows), aggregation=aggregation)


def score_table_csv(table: ScoreTable) -> str:
    """CSV rendering: header tau,tp,fp,fn,ap with floats at 5 decimals."""
    buf = io.StringIO()
    buf.write("tau,tp,fp,fn,ap\n")
    for row in table.rows:
        buf.write(f"{row.tau:.5f},{row.tp},{row.fp},{row.fn},{row.ap:.5f}\n")
    return buf.getvalue()


def read_score_csv(text: str) -> ScoreTable:
    """Parse the CSV produced by score_table_csv (aggregation not recorded)."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0].strip() != "tau,tp,fp,fn,ap":
        raise ValueError("expected header 'tau,tp,fp,fn,ap'")
    rows = []
    for ln in lines[1:]:
        tau, tp, fp, fn, ap = ln.split(",")
        rows.append(
            ScoreRow(tau=float(tau), tp=int(tp), fp=int(fp), fn=int(fn), ap=float(ap))
        )
    return ScoreTable(rows=tuple(rows))
