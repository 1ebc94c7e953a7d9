"""Seeded sampling of virtual camera and object motions, plus the generation
config and its ``key = value`` text format."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import EulerAngles, RigidMotion

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class MotionRanges:
    """Symmetric bounds: translations in depth units, angles in radians."""

    trans_range: float
    rot_range: float

    def __post_init__(self):
        if not (self.trans_range >= 0 and self.rot_range >= 0):
            raise ValueError(f"motion ranges must be >= 0, got {self}")


CAMERA_RANGES = MotionRanges(0.2, math.pi / 18)
OBJECT_RANGES = MotionRanges(0.1, math.pi / 36)


@dataclass(frozen=True)
class GenerationConfig:
    camera_ranges: MotionRanges = CAMERA_RANGES
    object_ranges: MotionRanges = OBJECT_RANGES
    n_objects: int = 2
    motions_per_image: int = 1
    base_seed: int = 0
    focal_scale: float = 0.58
    depth_mode: str = "metric"
    depth_encoding: str = "pfm"
    depth_scale: float = 256.0
    bilateral_kernel: int = 5
    bilateral_iterations: int = 2
    bilateral_sigma_space: float = 1.0
    bilateral_sigma_value: float = 5.0
    dilation_kernel: int = 3
    inpaint_radius: int = 3
    flow_format: str = "flo"

    def __post_init__(self):
        if self.n_objects < 0 or self.motions_per_image < 0:
            raise ValueError("counts must be >= 0")
        if not 0 <= self.base_seed <= _MASK64:
            raise ValueError("base_seed must fit in 64 unsigned bits")
        if self.depth_mode not in ("metric", "inverse"):
            raise ValueError(f"depth_mode must be metric or inverse, got {self.depth_mode!r}")
        if self.depth_encoding not in ("pfm", "png16"):
            raise ValueError(f"depth_encoding must be pfm or png16, got {self.depth_encoding!r}")
        if self.flow_format not in ("flo", "kitti", "both"):
            raise ValueError(f"flow_format must be flo, kitti or both, got {self.flow_format!r}")


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def task_seed(base_seed: int, image_index: int, motion_index: int) -> int:
    """64-bit seed of one (image, motion) task.

    Chained splitmix64 finalizers; each stage is a bijection, so for a fixed
    prefix distinct indices never collide.
    """
    if image_index < 0 or motion_index < 0:
        raise ValueError("indices must be >= 0")
    x = splitmix64(base_seed & _MASK64)
    x = splitmix64((x + image_index) & _MASK64)
    return splitmix64((x + motion_index) & _MASK64)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; the bitstream is fixed by numpy's PCG64 definition."""
    return np.random.Generator(np.random.PCG64(seed))


def sample_motion(rng: np.random.Generator, ranges: MotionRanges) -> tuple[EulerAngles, np.ndarray]:
    """Six uniform draws, in the order tx, ty, tz, rx, ry, rz."""
    t = [rng.uniform(-ranges.trans_range, ranges.trans_range) for _ in range(3)]
    r = [rng.uniform(-ranges.rot_range, ranges.rot_range) for _ in range(3)]
    return EulerAngles(*r), np.array(t)


def sample_object_motion(
    rng: np.random.Generator,
    camera: tuple[EulerAngles, np.ndarray],
    ranges: MotionRanges,
) -> RigidMotion:
    """Camera motion plus an independently sampled delta, added per parameter."""
    angles, trans = camera
    d_angles, d_trans = sample_motion(rng, ranges)
    return RigidMotion.from_euler(angles + d_angles, np.asarray(trans) + d_trans)


# --- config file -----------------------------------------------------------

_RANGE_KEYS = {
    "camera_trans_range": ("camera_ranges", "trans_range"),
    "camera_rot_range": ("camera_ranges", "rot_range"),
    "object_trans_range": ("object_ranges", "trans_range"),
    "object_rot_range": ("object_ranges", "rot_range"),
}


class ConfigError(ValueError):
    pass


def config_to_text(config: GenerationConfig) -> str:
    lines = []
    for key, (group, attr) in _RANGE_KEYS.items():
        lines.append(f"{key} = {getattr(getattr(config, group), attr)!r}")
    for f in dataclasses.fields(config):
        if f.name in ("camera_ranges", "object_ranges"):
            continue
        lines.append(f"{f.name} = {getattr(config, f.name)}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> GenerationConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, unknown keys are errors."""
    scalar_types = {f.name: f.type for f in dataclasses.fields(GenerationConfig)}
    defaults = GenerationConfig()
    ranges = {
        "camera_ranges": dataclasses.asdict(defaults.camera_ranges),
        "object_ranges": dataclasses.asdict(defaults.object_ranges),
    }
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _RANGE_KEYS:
                group, attr = _RANGE_KEYS[key]
                ranges[group][attr] = float(value)
            elif key in scalar_types and key not in ranges:
                kind = scalar_types[key]
                values[key] = int(value, 0) if kind == "int" else float(value) if kind == "float" else value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    try:
        return GenerationConfig(
            camera_ranges=MotionRanges(**ranges["camera_ranges"]),
            object_ranges=MotionRanges(**ranges["object_ranges"]),
            **values,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def read_config(path) -> GenerationConfig:
    return config_from_text(Path(path).read_text())


def write_config(path, config: GenerationConfig):
    Path(path).write_text(config_to_text(config))
