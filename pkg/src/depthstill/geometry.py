"""Pinhole camera model, rigid motions and depth-driven flow.

Conventions: pixel coordinates are integer pixel corners, ``u`` grows to the
right and ``v`` downwards, the camera looks along +Z.  Depth maps are
``(H, W)`` float arrays; flow fields carry an ``(H, W, 2)`` array of
``(u, v)`` displacements plus a boolean validity map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

EPS = 1e-6
_MIN_DEPTH, _MAX_DEPTH = 1.0, 100.0


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be >= 1, got {self.width}x{self.height}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError(f"principal point ({self.cx}, {self.cy}) outside the image")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def inverse(self) -> np.ndarray:
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )


@dataclass(frozen=True)
class EulerAngles:
    """Rotation angles in radians about the camera x, y and z axes."""

    rx: float
    ry: float
    rz: float

    def __add__(self, other: "EulerAngles") -> "EulerAngles":
        return EulerAngles(self.rx + other.rx, self.ry + other.ry, self.rz + other.rz)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.rx, self.ry, self.rz)


@dataclass(frozen=True)
class RigidMotion:
    """Point transform ``X' = rotation @ X + translation``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64)
        trans = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if rot.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {rot.shape}")
        if not np.allclose(rot.T @ rot, np.eye(3), atol=1e-6) or abs(np.linalg.det(rot) - 1.0) > 1e-6:
            raise ValueError("rotation is not a proper orthonormal matrix")
        rot.setflags(write=False)
        trans.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    @classmethod
    def identity(cls) -> "RigidMotion":
        return cls()

    @classmethod
    def from_euler(cls, angles: EulerAngles, translation: Iterable[float]) -> "RigidMotion":
        return cls(rotation_from_euler(angles), np.asarray(list(translation), dtype=np.float64))

    @property
    def matrix(self) -> np.ndarray:
        """4x4 homogeneous form."""
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.rotation, np.eye(3)) and not np.any(self.translation))


@dataclass
class FlowField:
    """Dense displacement field with a per-pixel validity map."""

    uv: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.uv = np.asarray(self.uv, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.uv.ndim != 3 or self.uv.shape[2] != 2:
            raise ValueError(f"flow must have shape (H, W, 2), got {self.uv.shape}")
        if self.valid.shape != self.uv.shape[:2]:
            raise ValueError("validity map does not match flow dimensions")

    @classmethod
    def zeros(cls, height: int, width: int) -> "FlowField":
        return cls(np.zeros((height, width, 2)), np.ones((height, width), dtype=bool))

    @property
    def u(self) -> np.ndarray:
        return self.uv[..., 0]

    @property
    def v(self) -> np.ndarray:
        return self.uv[..., 1]

    @property
    def height(self) -> int:
        return self.uv.shape[0]

    @property
    def width(self) -> int:
        return self.uv.shape[1]


def intrinsics_from_dims(width: int, height: int, focal_scale: float = 0.58) -> CameraIntrinsics:
    """Virtual camera with focals ``focal_scale * (W, H)`` and centre ``(W, H) / 2``."""
    if width < 1 or height < 1:
        raise ValueError(f"image dimensions must be >= 1, got {width}x{height}")
    if not focal_scale > 0:
        raise ValueError(f"focal_scale must be positive, got {focal_scale}")
    return CameraIntrinsics(
        fx=focal_scale * width,
        fy=focal_scale * height,
        cx=0.5 * width,
        cy=0.5 * height,
        width=int(width),
        height=int(height),
    )


def rotation_from_euler(angles: EulerAngles) -> np.ndarray:
    """Fixed-axis XYZ rotation, i.e. ``Rz @ Ry @ Rx``."""
    rx, ry, rz = angles.as_tuple()
    if not all(math.isfinite(a) for a in (rx, ry, rz)):
        raise ValueError(f"non-finite Euler angles {angles}")
    cx, sx = math.cos(rx), math.sin(rx)
    cy, sy = math.cos(ry), math.sin(ry)
    cz, sz = math.cos(rz), math.sin(rz)
    rot_x = np.array([[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]])
    rot_y = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rot_z = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])
    return rot_z @ rot_y @ rot_x


def normalize_depth(raw, mode: str = "metric") -> np.ndarray:
    """Rescale a depth (or inverse depth) map affinely into ``[1, 100]``.

    Args:
        raw: array-like of depth values.
        mode: ``"metric"`` for depth, ``"inverse"`` for disparity-like maps,
            which are inverted (``1 / max(d, eps)``) before rescaling.

    Returns:
        float64 array of the same shape. A constant map becomes 50.5 everywhere.
    """
    depth = np.asarray(raw, dtype=np.float64)
    if depth.size == 0:
        raise ValueError("empty depth map")
    if not np.all(np.isfinite(depth)):
        raise ValueError(f"depth map contains {int(np.count_nonzero(~np.isfinite(depth)))} non-finite values")
    if mode == "inverse":
        depth = 1.0 / np.maximum(depth, EPS)
    elif mode == "metric":
        bad = int(np.count_nonzero(depth <= 0))
        if bad:
            raise ValueError(f"metric depth map contains {bad} non-positive values")
    else:
        raise ValueError(f"unknown depth mode {mode!r}")

    lo, hi = depth.min(), depth.max()
    if hi <= lo:
        return np.full(depth.shape, 0.5 * (_MIN_DEPTH + _MAX_DEPTH))
    out = _MIN_DEPTH + (_MAX_DEPTH - _MIN_DEPTH) * ((depth - lo) / (hi - lo))
    return np.clip(out, _MIN_DEPTH, _MAX_DEPTH)


def flow_from_depth(depth: np.ndarray, K: CameraIntrinsics, T: RigidMotion) -> tuple[FlowField, np.ndarray]:
    """Reproject every pixel through ``depth`` and ``T`` and return its flow.

    Each pixel is back-projected with ``K^-1``, moved with ``X' = R X + t``
    and projected again with ``K``.  Returns the flow field and the depth of
    every moved point (``Z'``); pixels with ``Z' <= EPS`` are invalid and carry
    zero flow.
    """
    depth = np.asarray(depth, dtype=np.float64)
    if depth.shape != (K.height, K.width):
        raise ValueError(f"depth shape {depth.shape} does not match intrinsics {K.height}x{K.width}")

    vs, us = np.mgrid[0 : K.height, 0 : K.width].astype(np.float64)
    xn = (us - K.cx) / K.fx
    yn = (vs - K.cy) / K.fy
    pts = np.stack([xn * depth, yn * depth, depth], axis=-1)

    # Row-by-row sums keep the identity rotation exact (x*1 + y*0 + z*0 == x).
    R, t = T.rotation, T.translation
    moved = np.empty_like(pts)
    for i in range(3):
        moved[..., i] = pts[..., 0] * R[i, 0] + pts[..., 1] * R[i, 1] + pts[..., 2] * R[i, 2] + t[i]
    z_after = moved[..., 2]

    valid = z_after > EPS
    safe_z = np.where(valid, z_after, 1.0)
    # (X' - xn Z') / Z' equals X'/Z' - xn but vanishes exactly for the identity.
    uv = np.empty(depth.shape + (2,))
    uv[..., 0] = K.fx * (moved[..., 0] - xn * z_after) / safe_z
    uv[..., 1] = K.fy * (moved[..., 1] - yn * z_after) / safe_z
    uv[~valid] = 0.0
    return FlowField(uv, valid), z_after
