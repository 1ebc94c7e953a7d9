"""Readers and writers for images, depth maps, flow fields, masks and
instance label maps.  All multi-byte payloads are little-endian."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .geometry import FlowField
from .warp import InstanceSet

FLO_MAGIC = 202021.25
FLO_INVALID = 1e9
FLO_INVALID_THRESHOLD = 1e8
KITTI_ZERO = 2**15
KITTI_SCALE = 64.0


class FormatError(ValueError):
    """A file does not follow the layout its reader expects."""


@dataclass(frozen=True)
class SamplePaths:
    image0: Path
    image1: Path
    flow: Path
    flow_kitti: Path
    collision_mask: Path
    hole_mask: Path
    hole_mask_prime: Path
    depth: Path

    @classmethod
    def for_sample(cls, out_dir, stem: str, motion_index: int, width: int = 2) -> "SamplePaths":
        prefix = Path(out_dir) / f"{stem}_m{motion_index:0{width}d}"
        return cls(
            image0=prefix.with_name(prefix.name + "_img0.png"),
            image1=prefix.with_name(prefix.name + "_img1.png"),
            flow=prefix.with_name(prefix.name + "_flow.flo"),
            flow_kitti=prefix.with_name(prefix.name + "_flow_kitti.png"),
            collision_mask=prefix.with_name(prefix.name + "_collision.png"),
            hole_mask=prefix.with_name(prefix.name + "_hole.png"),
            hole_mask_prime=prefix.with_name(prefix.name + "_hole_prime.png"),
            depth=prefix.with_name(prefix.name + "_depth.pfm"),
        )


def _imread(path) -> np.ndarray:
    data = np.fromfile(str(path), dtype=np.uint8) if Path(path).exists() else None
    if data is None:
        raise OSError(f"{path}: no such file")
    img = cv2.imdecode(data, cv2.IMREAD_UNCHANGED)
    if img is None:
        raise OSError(f"{path}: unreadable image")
    return img


def _imwrite(path, img: np.ndarray):
    ok, buf = cv2.imencode(Path(path).suffix or ".png", img)
    if not ok:
        raise OSError(f"{path}: could not encode image")
    buf.tofile(str(path))


# --- 8-bit images ------------------------------------------------------------


def read_image(path) -> np.ndarray:
    """8-bit grey ``(H, W)`` or RGB ``(H, W, 3)`` image, top-left origin."""
    img = _imread(path)
    if img.dtype != np.uint8:
        raise FormatError(f"{path}: unsupported {img.dtype} image, expected 8-bit")
    if img.ndim == 3:
        if img.shape[2] == 1:
            return img[..., 0]
        if img.shape[2] != 3:
            raise FormatError(f"{path}: unsupported {img.shape[2]}-channel image")
        return np.ascontiguousarray(img[..., ::-1])
    return img


def write_image(path, image: np.ndarray):
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise FormatError(f"{path}: can only write 8-bit images, got {image.dtype}")
    if image.ndim == 3:
        if image.shape[2] != 3:
            raise FormatError(f"{path}: can only write 1- or 3-channel images")
        image = np.ascontiguousarray(image[..., ::-1])
    _imwrite(path, image)


# --- depth -------------------------------------------------------------------


def read_pfm(path) -> np.ndarray:
    """Single-channel PFM as a float32 ``(H, W)`` array with the top row first.

    PFM stores scanlines bottom-to-top; the sign of the scale field selects
    the byte order (negative = little-endian).
    """
    with open(path, "rb") as f:
        header = f.readline().strip()
        if header != b"Pf":
            raise FormatError(f"{path}: expected a single-channel 'Pf' PFM, got {header!r}")
        dims = f.readline()
        while dims.startswith(b"#"):
            dims = f.readline()
        m = re.match(rb"^\s*(\d+)\s+(\d+)\s*$", dims)
        if not m:
            raise FormatError(f"{path}: malformed PFM dimensions {dims!r}")
        width, height = int(m.group(1)), int(m.group(2))
        try:
            scale = float(f.readline().strip())
        except ValueError as exc:
            raise FormatError(f"{path}: malformed PFM scale") from exc
        if scale == 0:
            raise FormatError(f"{path}: PFM scale must be non-zero")
        dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
        data = np.frombuffer(f.read(), dtype=dtype)
    if data.size != width * height:
        raise FormatError(f"{path}: expected {width * height} floats, found {data.size}")
    return np.flipud(data.reshape(height, width)).astype(np.float32)


def write_pfm(path, data: np.ndarray, little_endian: bool = True):
    data = np.asarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise FormatError("PFM writer only supports single-channel maps")
    dtype = np.dtype("<f4") if little_endian else np.dtype(">f4")
    height, width = data.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{width} {height}\n".encode())
        f.write(b"-1.0\n" if little_endian else b"1.0\n")
        f.write(np.flipud(data).astype(dtype).tobytes())


def read_depth(path, encoding: str = "pfm", scale: float = 256.0) -> np.ndarray:
    """Load a positive depth map stored as PFM or as a 16-bit PNG of ``depth * scale``."""
    if encoding == "pfm":
        depth = read_pfm(path).astype(np.float64)
    elif encoding == "png16":
        raw = _imread(path)
        if raw.dtype != np.uint16 or raw.ndim != 2:
            raise FormatError(f"{path}: expected a single-channel 16-bit PNG")
        depth = raw.astype(np.float64) / scale
    else:
        raise ValueError(f"unknown depth encoding {encoding!r}")
    bad = int(np.count_nonzero(~(np.isfinite(depth) & (depth > 0))))
    if bad:
        raise ValueError(f"{path}: {bad} non-positive or non-finite depth pixels")
    return depth


def write_depth_png16(path, depth: np.ndarray, scale: float = 256.0):
    stored = np.floor(np.asarray(depth, dtype=np.float64) * scale + 0.5)
    if stored.min() < 0 or stored.max() > 65535:
        raise FormatError(f"{path}: depth does not fit 16 bits at scale {scale}")
    _imwrite(path, stored.astype(np.uint16))


# --- flow --------------------------------------------------------------------


def write_flo(path, flow: FlowField):
    """Middlebury ``.flo``; invalid pixels are stored as the 1e9 sentinel."""
    uv = flow.uv.astype("<f4")
    uv[~flow.valid] = FLO_INVALID
    with open(path, "wb") as f:
        f.write(np.array([FLO_MAGIC], dtype="<f4").tobytes())
        f.write(np.array([flow.width, flow.height], dtype="<i4").tobytes())
        f.write(uv.tobytes())


def read_flo(path) -> FlowField:
    with open(path, "rb") as f:
        buf = f.read()
    if len(buf) < 12:
        raise FormatError(f"{path}: truncated .flo header")
    magic = np.frombuffer(buf, dtype="<f4", count=1)[0]
    if magic != np.float32(FLO_MAGIC):
        raise FormatError(f"{path}: bad .flo magic {magic}")
    width, height = (int(x) for x in np.frombuffer(buf, dtype="<i4", count=2, offset=4))
    if width < 0 or height < 0 or len(buf) != 12 + 8 * width * height:
        raise FormatError(f"{path}: .flo payload does not match {width}x{height}")
    uv = np.frombuffer(buf, dtype="<f4", offset=12).reshape(height, width, 2).astype(np.float64)
    valid = np.all(np.abs(uv) <= FLO_INVALID_THRESHOLD, axis=-1) & np.all(np.isfinite(uv), axis=-1)
    uv[~valid] = 0.0
    return FlowField(uv, valid)


def encode_kitti(flow: FlowField) -> np.ndarray:
    """``(H, W, 3)`` uint16 array of ``(u, v, valid)`` in KITTI's 1/64 px fixed point."""
    uv = np.where(flow.valid[..., None], flow.uv, 0.0)
    # values must stay strictly inside the representable +-512 px window
    bad = flow.valid & np.any(np.abs(uv) >= 512.0, axis=-1)
    if bad.any():
        y, x = np.argwhere(bad)[0]
        raise FormatError(f"flow at pixel (x={x}, y={y}) = {tuple(uv[y, x])} exceeds the KITTI range")
    stored = np.floor(uv * KITTI_SCALE + KITTI_ZERO + 0.5)
    stored = np.clip(stored, 0, 65535)
    stored[~flow.valid] = 0
    return np.dstack([stored, flow.valid]).astype(np.uint16)


def decode_kitti(stored: np.ndarray) -> FlowField:
    stored = np.asarray(stored)
    valid = stored[..., 2] > 0
    uv = (stored[..., :2].astype(np.float64) - KITTI_ZERO) / KITTI_SCALE
    uv[~valid] = 0.0
    return FlowField(uv, valid)


def write_kitti_flow(path, flow: FlowField):
    _imwrite(path, encode_kitti(flow)[..., ::-1])


def read_kitti_flow(path) -> FlowField:
    raw = _imread(path)
    if raw.dtype != np.uint16 or raw.ndim != 3 or raw.shape[2] != 3:
        raise FormatError(f"{path}: expected a 3-channel 16-bit KITTI flow PNG")
    return decode_kitti(raw[..., ::-1])


# --- masks and labels ------------------------------------------------------------


def write_mask(path, mask: np.ndarray):
    _imwrite(path, np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8))


def read_mask(path) -> np.ndarray:
    raw = _imread(path)
    if raw.dtype != np.uint8 or raw.ndim != 2:
        raise FormatError(f"{path}: expected a single-channel 8-bit mask")
    if not np.all((raw == 0) | (raw == 255)):
        raise FormatError(f"{path}: mask values must be 0 or 255")
    return raw == 255


def compact_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel non-zero ids to ``1..N`` in order of first (row-major) appearance."""
    labels = np.asarray(labels)
    ids, first = np.unique(labels.ravel(), return_index=True)
    keep = ids != 0
    ids, first = ids[keep], first[keep]
    out = np.zeros(labels.shape, dtype=np.int32)
    for new_id, old_id in enumerate(ids[np.argsort(first)], start=1):
        out[labels == old_id] = new_id
    return out


def read_instances(path) -> InstanceSet:
    raw = _imread(path)
    if raw.ndim != 2 or raw.dtype not in (np.uint8, np.uint16):
        raise FormatError(f"{path}: expected a single-channel 8- or 16-bit label image")
    return InstanceSet(compact_labels(raw))
