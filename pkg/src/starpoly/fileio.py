"""File formats: 16-bit label PNGs, the SDT tensor container, detection JSON.

These formats are the boundary between this toolkit and any predictor: a
trainer only needs to read label/intensity PNGs and read/write SDT tensors
to plug into the decode/eval pipeline. All round trips are lossless (bitwise
for SDT, value-exact for JSON and PNG); readers reject malformed or
truncated files deterministically, reporting the failing byte offset or
field.

Dataset directory layout: images/NNNN.png (8-bit intensity),
labels/NNNN.png (16-bit instance IDs), maps/NNNN.sdt, detections/NNNN.json,
with zero-padded 4-digit indices.
"""

from __future__ import annotations

import io
import json
import os
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .model import DenseMaps, DetectionSet, LabelImage, RadialGeometry, StarPolygon, relabel_dense

__all__ = [
    "FormatError",
    "read_label_png", "write_label_png",
    "read_image_png", "write_image_png",
    "read_sdt", "write_sdt",
    "read_dense_maps", "write_dense_maps",
    "detections_to_json", "detections_from_json",
    "read_detections", "write_detections",
    "atomic_write_bytes", "atomic_write_text",
    "dataset_file", "list_indexed",
]

SDT_MAGIC = b"SDT1"
_SDT_DTYPES = {1: np.dtype("<f4"), 2: np.dtype("<u2"), 3: np.dtype("<i4")}
_SDT_CODES = {v: k for k, v in _SDT_DTYPES.items()}

MAX_LABEL_ID = 0xFFFF  # 16-bit PNG payload


class FormatError(ValueError):
    """A file does not conform to one of the formats defined here."""


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    """Write via a sibling temp file + rename, so readers never see partials."""
    path = Path(path)
    tmp = path.with_name(f"{path.name}.tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode())


# --- label / intensity PNGs -------------------------------------------------

def write_label_png(labels: LabelImage, path: str | os.PathLike) -> None:
    arr = labels.labels
    if labels.n_objects > MAX_LABEL_ID:
        raise FormatError(
            f"cannot store instance ID {labels.n_objects} in a 16-bit PNG"
        )
    buf = io.BytesIO()
    Image.fromarray(arr.astype(np.uint16)).save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def read_label_png(path: str | os.PathLike) -> LabelImage:
    """Read a grayscale PNG as labels; IDs are re-densified on load."""
    with Image.open(path) as im:
        if im.format != "PNG":
            raise FormatError(f"{path}: expected a PNG file, got {im.format}")
        if im.mode not in ("I;16", "I", "L"):
            raise FormatError(
                f"{path}: expected a grayscale PNG, got mode {im.mode}"
            )
        arr = np.asarray(im)
    return relabel_dense(arr.astype(np.int64))


def write_image_png(img: np.ndarray, path: str | os.PathLike) -> None:
    """Store an intensity image in [0, 1] as 8-bit grayscale."""
    q = np.rint(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0)
    buf = io.BytesIO()
    Image.fromarray(q.astype(np.uint8)).save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def read_image_png(path: str | os.PathLike) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode not in ("L", "I;16", "I"):
            raise FormatError(f"{path}: expected a grayscale PNG, got mode {im.mode}")
        arr = np.asarray(im, dtype=np.float64)
        scale = 65535.0 if im.mode in ("I;16", "I") else 255.0
    return arr / scale


# --- SDT tensor container ---------------------------------------------------

def write_sdt(arr: np.ndarray, path: str | os.PathLike) -> None:
    """Little-endian container: magic, dtype code u8, ndim u8, u32 dims, raw data."""
    arr = np.ascontiguousarray(arr)
    dtype = arr.dtype.newbyteorder("<")
    if dtype not in _SDT_CODES:
        raise FormatError(
            f"unsupported dtype {arr.dtype}; use float32, uint16 or int32"
        )
    header = SDT_MAGIC + struct.pack("<BB", _SDT_CODES[dtype], arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    atomic_write_bytes(path, header + arr.astype(dtype, copy=False).tobytes())


def read_sdt(path: str | os.PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != SDT_MAGIC:
        raise FormatError(f"{path}: bad magic at byte 0: {data[:4]!r}")
    if len(data) < 6:
        raise FormatError(f"{path}: truncated header at byte {len(data)}")
    code, ndim = struct.unpack_from("<BB", data, 4)
    if code not in _SDT_DTYPES:
        raise FormatError(f"{path}: unknown dtype code {code} at byte 4")
    end = 6 + 4 * ndim
    if len(data) < end:
        raise FormatError(f"{path}: truncated dims at byte {len(data)}")
    dims = struct.unpack_from(f"<{ndim}I", data, 6)
    dtype = _SDT_DTYPES[code]
    expected = end + int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    if len(data) != expected:
        raise FormatError(
            f"{path}: size mismatch at byte {min(len(data), expected)}: "
            f"expected {expected} bytes, found {len(data)}"
        )
    return np.frombuffer(data, dtype=dtype, offset=end).reshape(dims).copy()


def write_dense_maps(maps: DenseMaps, path: str | os.PathLike) -> None:
    """One float32 tensor (1 + n_rays, H, W): plane 0 prob, then distances."""
    stack = np.concatenate([maps.prob[None], maps.dist], axis=0)
    write_sdt(stack.astype(np.float32), path)


def read_dense_maps(path: str | os.PathLike) -> DenseMaps:
    arr = read_sdt(path)
    if arr.ndim != 3:
        raise FormatError(f"{path}: dense maps need 3 dims, got {arr.ndim}")
    if arr.dtype != np.dtype("<f4"):
        raise FormatError(f"{path}: dense maps must be float32, got {arr.dtype}")
    if arr.shape[0] < 4:
        raise FormatError(
            f"{path}: need a probability plane plus >= 3 distance planes, "
            f"got {arr.shape[0]}"
        )
    try:
        return DenseMaps(
            prob=arr[0],
            dist=arr[1:],
            geometry=RadialGeometry(arr.shape[0] - 1),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# --- detection JSON ---------------------------------------------------------

def detections_to_json(dets: DetectionSet) -> str:
    n_rays = dets.detections[0].geometry.n_rays if dets.detections else None
    doc = {
        "height": dets.height,
        "width": dets.width,
        "n_rays": n_rays,
        "params": {
            "prob_thresh": dets.prob_thresh,
            "nms_thresh": dets.nms_thresh,
            "measure": dets.measure,
        },
        "detections": [
            {
                "center": [d.center[0], d.center[1]],
                "prob": d.prob,
                "radii": d.radii.tolist(),
            }
            for d in dets.detections
        ],
    }
    return json.dumps(doc, indent=1)


def _field(doc: dict, name: str, kind, where: str = "document"):
    if name not in doc:
        raise FormatError(f"missing field '{name}' in {where}")
    value = doc[name]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise FormatError(f"field '{name}' in {where} has wrong type {type(value).__name__}")
    return value


def detections_from_json(text: str) -> DetectionSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("top-level JSON value must be an object")
    height = _field(doc, "height", int)
    width = _field(doc, "width", int)
    params = _field(doc, "params", dict)
    entries = _field(doc, "detections", list)
    n_rays = doc.get("n_rays")
    if entries and not isinstance(n_rays, int):
        raise FormatError("missing field 'n_rays' in document")
    geom = RadialGeometry(n_rays) if entries else None
    polys = []
    for idx, entry in enumerate(entries):
        where = f"detections[{idx}]"
        if not isinstance(entry, dict):
            raise FormatError(f"{where} must be an object")
        center = _field(entry, "center", list, where)
        radii = _field(entry, "radii", list, where)
        if len(center) != 2:
            raise FormatError(f"field 'center' in {where} must have 2 entries")
        if len(radii) != n_rays:
            raise FormatError(
                f"field 'radii' in {where} has {len(radii)} entries, expected {n_rays}"
            )
        try:
            polys.append(
                StarPolygon(
                    center=(center[0], center[1]),
                    prob=_field(entry, "prob", float, where),
                    radii=np.asarray(radii, dtype=np.float64),
                    geometry=geom,
                )
            )
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{where}: {exc}") from exc
    try:
        return DetectionSet(
            height=height,
            width=width,
            detections=tuple(polys),
            prob_thresh=_field(params, "prob_thresh", float, "params"),
            nms_thresh=_field(params, "nms_thresh", float, "params"),
            measure=_field(params, "measure", str, "params"),
        )
    except ValueError as exc:
        raise FormatError(f"field 'detections': {exc}") from exc


def write_detections(dets: DetectionSet, path: str | os.PathLike) -> None:
    atomic_write_text(path, detections_to_json(dets))


def read_detections(path: str | os.PathLike) -> DetectionSet:
    return detections_from_json(Path(path).read_text())


# --- dataset layout ---------------------------------------------------------

_KINDS = {
    "image": ("images", ".png"),
    "label": ("labels", ".png"),
    "maps": ("maps", ".sdt"),
    "detections": ("detections", ".json"),
}


def dataset_file(root: str | os.PathLike, kind: str, index: int) -> Path:
    sub, ext = _KINDS[kind]
    return Path(root) / sub / f"{index:04d}{ext}"


def list_indexed(directory: str | os.PathLike, suffix: str) -> list[Path]:
    """All files with the given suffix, sorted by name for determinism."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    return sorted(p for p in directory.iterdir() if p.suffix == suffix and p.is_file())
