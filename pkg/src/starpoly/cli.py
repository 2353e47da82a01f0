"""Command-line pipeline: toygen / encode / decode / eval / roundtrip / plot.

Batch model: commands take directories in and write directories out, pairing
files by name. Per-image work runs on a process pool capped by the
STARPOLY_THREADS environment variable (0 or unset = all cores); results are
independent of the pool size, and all outputs are written atomically.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import charts, fileio, metrics, toygen
from .detector import NmsParams, collect_candidates, greedy_nms
from .encoder import encode
from .model import LabelImage, RadialGeometry
from .renderer import render_labels

__all__ = ["main"]


def _workers() -> int:
    raw = os.environ.get("STARPOLY_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise SystemExit(f"STARPOLY_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise SystemExit(f"STARPOLY_THREADS must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


def _pmap(fn, jobs):
    """Order-preserving parallel map; falls back to serial for one worker."""
    if not jobs:
        return []
    n = min(_workers(), len(jobs))
    if n <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * n))))


def _print_table(tag: str, table) -> None:
    print(f"{tag} (aggregation: {table.aggregation})")
    print("  tau      tp      fp      fn       ap")
    for row in table.rows:
        print(f"  {row.tau:.2f} {row.tp:7d} {row.fp:7d} {row.fn:7d}  {row.ap:.5f}")


def _parse_taus(text: str) -> tuple[float, ...]:
    if ":" in text:
        lo, step, hi = (float(v) for v in text.split(":"))
        count = int(round((hi - lo) / step)) + 1
        taus = tuple(round(lo + k * step, 6) for k in range(count))
    else:
        taus = tuple(float(v) for v in text.split(","))
    if not taus or any(not 0.0 <= t < 1.0 for t in taus):
        raise argparse.ArgumentTypeError(f"--taus values must lie in [0, 1): {text}")
    return taus


def _parse_pairs(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--pairs expects MIN:MAX, got {text!r}")
    return lo, hi


def _parse_rays_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--rays expects an integer list, got {text!r}")


# --- per-file workers (top level so they pickle) -----------------------------

def _toygen_one(job) -> int:
    config, index, out = job
    img, labels = toygen.generate_image(config, index)
    fileio.write_image_png(img, fileio.dataset_file(out, "image", index))
    fileio.write_label_png(labels, fileio.dataset_file(out, "label", index))
    return labels.n_objects


def _encode_one(job) -> int:
    label_path, out_path, rays = job
    labels = fileio.read_label_png(label_path)
    fileio.write_dense_maps(encode(labels, RadialGeometry(rays)), out_path)
    return labels.n_objects


def _decode_one(job) -> int:
    maps_path, out_dir, params, dump, seed, index = job
    maps = fileio.read_dense_maps(maps_path)
    cands = collect_candidates(maps, params)
    dets = greedy_nms(cands, params, maps.height, maps.width)
    stem = Path(maps_path).stem
    out = Path(out_dir)
    (out / "detections").mkdir(parents=True, exist_ok=True)
    (out / "labels").mkdir(parents=True, exist_ok=True)
    fileio.write_detections(dets, out / "detections" / f"{stem}.json")
    fileio.write_label_png(render_labels(dets), out / "labels" / f"{stem}.png")
    if dump:
        rng = np.random.default_rng([seed, index])
        chosen = rng.choice(len(cands), size=min(dump, len(cands)), replace=False)
        sampled = [cands[int(t)].poly for t in sorted(chosen)]
        svg = charts.candidate_overlay_svg(
            maps.height, maps.width, sampled, list(dets.detections)
        )
        (out / "candidates").mkdir(parents=True, exist_ok=True)
        fileio.atomic_write_text(out / "candidates" / f"{stem}.svg", svg)
    return len(dets)


def _roundtrip_one(job):
    label_path, rays, params = job
    gt = fileio.read_label_png(label_path)
    maps = encode(gt, RadialGeometry(rays))
    cands = collect_candidates(maps, params)
    dets = greedy_nms(cands, params, maps.height, maps.width)
    return render_labels(dets).labels, gt.labels


# --- subcommands --------------------------------------------------------------

def cmd_toygen(args) -> int:
    config = toygen.ToyConfig(
        size=args.size, count=args.count, pairs=args.pairs, seed=args.seed
    )
    out = Path(args.out)
    for sub in ("images", "labels"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    counts = _pmap(_toygen_one, [(config, i, str(out)) for i in range(config.count)])
    print(
        f"toygen: wrote {config.count} image/label pairs to {out} "
        f"({sum(counts)} instances, seed {config.seed})"
    )
    return 0


def cmd_encode(args) -> int:
    files = fileio.list_indexed(args.labels, ".png")
    if not files:
        raise SystemExit(f"encode: no label PNGs in {args.labels}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(str(p), str(out / f"{p.stem}.sdt"), args.rays) for p in files]
    counts = _pmap(_encode_one, jobs)
    print(
        f"encode: wrote {len(files)} map files ({args.rays} rays, "
        f"{sum(counts)} instances) to {out}"
    )
    return 0


def _nms_params(args) -> NmsParams:
    return NmsParams(
        prob_thresh=args.prob_thresh,
        overlap_thresh=args.nms_thresh,
        measure=args.measure,
    )


def cmd_decode(args) -> int:
    files = fileio.list_indexed(args.maps, ".sdt")
    if not files:
        raise SystemExit(f"decode: no SDT files in {args.maps}")
    params = _nms_params(args)
    jobs = [
        (str(p), args.out, params, args.dump_candidates, args.seed, k)
        for k, p in enumerate(files)
    ]
    counts = _pmap(_decode_one, jobs)
    print(
        f"decode: {len(files)} images -> {sum(counts)} detections "
        f"(prob>{params.prob_thresh}, overlap<={params.overlap_thresh}, "
        f"{params.measure})"
    )
    return 0


def _label_pairs(pred_dir, gt_dir):
    pred = {p.stem: p for p in fileio.list_indexed(pred_dir, ".png")}
    gt = {p.stem: p for p in fileio.list_indexed(gt_dir, ".png")}
    stems = sorted(set(pred) & set(gt))
    if not stems:
        raise SystemExit(f"eval: no matching label PNGs between {pred_dir} and {gt_dir}")
    return [(pred[s], gt[s]) for s in stems]


def cmd_eval(args) -> int:
    pairs = _label_pairs(args.pred, args.gt)
    loaded = [
        (fileio.read_label_png(p), fileio.read_label_png(g)) for p, g in pairs
    ]
    table = metrics.ap_sweep(loaded, taus=args.taus, aggregation=args.agg)
    _print_table(f"eval: {len(pairs)} image pairs", table)
    fileio.atomic_write_text(args.out, metrics.score_table_csv(table))
    print(f"eval: wrote {args.out}")
    return 0


def cmd_roundtrip(args) -> int:
    files = fileio.list_indexed(args.labels, ".png")
    if not files:
        raise SystemExit(f"roundtrip: no label PNGs in {args.labels}")
    params = _nms_params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series = []
    for rays in args.rays:
        results = _pmap(_roundtrip_one, [(str(p), rays, params) for p in files])
        pairs = [(LabelImage(pred), LabelImage(gt)) for pred, gt in results]
        table = metrics.ap_sweep(pairs, taus=args.taus, aggregation=args.agg)
        _print_table(f"roundtrip: {len(files)} images, {rays} rays", table)
        csv_path = out / f"roundtrip_rays{rays}.csv"
        fileio.atomic_write_text(csv_path, metrics.score_table_csv(table))
        print(f"roundtrip: wrote {csv_path}")
        series.append((f"{rays} rays", table))
    svg_path = out / "roundtrip_ap.svg"
    fileio.atomic_write_text(
        svg_path, charts.ap_curve_svg(series, title="encode/decode round trip")
    )
    print(f"roundtrip: wrote {svg_path}")
    return 0


def cmd_plot(args) -> int:
    series = []
    for path in args.scores:
        table = metrics.read_score_csv(Path(path).read_text())
        series.append((Path(path).stem, table))
    fileio.atomic_write_text(args.out, charts.ap_curve_svg(series))
    print(f"plot: wrote {args.out} ({len(series)} series)")
    return 0


def _add_decode_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prob-thresh", type=float, default=0.5,
                   help="object probability threshold for candidates")
    p.add_argument("--nms-thresh", type=float, default=0.4,
                   help="maximum allowed pairwise overlap of survivors")
    p.add_argument("--measure", choices=["iou", "ios"], default="iou",
                   help="overlap measure: IoU or intersection over the smaller area")


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--taus", type=_parse_taus, default=metrics.DEFAULT_TAUS,
                   help="IoU thresholds: comma list or LO:STEP:HI (default 0.50:0.05:0.90)")
    p.add_argument("--agg", choices=["dataset", "image"], default="dataset",
                   help="sum counts over the dataset, or average per-image AP")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starpoly",
        description="Star-convex polygon instance detection toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toygen", help="generate the synthetic half-ellipse dataset")
    p.add_argument("--out", required=True, help="dataset directory to create")
    p.add_argument("--count", type=int, default=1000, help="number of images")
    p.add_argument("--size", type=int, default=256, help="square image size in pixels")
    p.add_argument("--seed", type=int, default=0, help="dataset RNG seed")
    p.add_argument("--pairs", type=_parse_pairs, default=(4, 8),
                   help="pairs per image as MIN:MAX")
    p.set_defaults(func=cmd_toygen)

    p = sub.add_parser("encode", help="label PNGs -> dense-map SDT files")
    p.add_argument("--labels", required=True, help="directory of label PNGs")
    p.add_argument("--out", required=True, help="directory for SDT files")
    p.add_argument("--rays", type=int, default=32, help="number of radial directions")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="dense-map SDT files -> detections + label PNGs")
    p.add_argument("--maps", required=True, help="directory of SDT files")
    p.add_argument("--out", required=True, help="output directory")
    _add_decode_flags(p)
    p.add_argument("--dump-candidates", type=int, default=0, metavar="N",
                   help="also write an SVG overlay of N random candidates + survivors")
    p.add_argument("--seed", type=int, default=0, help="seed for candidate sampling")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="score predicted labels against ground truth")
    p.add_argument("--pred", required=True, help="directory of predicted label PNGs")
    p.add_argument("--gt", required=True, help="directory of ground-truth label PNGs")
    _add_eval_flags(p)
    p.add_argument("--out", default="scores.csv", help="CSV output path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("roundtrip",
                       help="encode -> decode -> eval against the same labels, in memory")
    p.add_argument("--labels", required=True, help="directory of label PNGs")
    p.add_argument("--rays", type=_parse_rays_list, default=(32,),
                   help="radial direction counts, comma-separated (one curve each)")
    _add_decode_flags(p)
    _add_eval_flags(p)
    p.add_argument("--out", default=".", help="directory for CSV/SVG outputs")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("plot", help="multi-series AP-vs-threshold SVG from score CSVs")
    p.add_argument("--scores", nargs="+", required=True, help="score CSV files")
    p.add_argument("--out", required=True, help="SVG output path")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        raise SystemExit(f"{args.command}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
