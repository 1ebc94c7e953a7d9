"""Forward warping with z-buffering, stretch-aware hole masks and the full
single-sample synthesis pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import CameraIntrinsics, FlowField, RigidMotion, flow_from_depth
from .imageproc import dilate, inpaint


@dataclass
class InstanceSet:
    """Per-pixel object labels; 0 is background, objects are ``1..count``."""

    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 2:
            raise ValueError("instance labels must be a 2-D map")
        if self.labels.size and self.labels.min() < 0:
            raise ValueError("instance labels must be non-negative")

    @property
    def count(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0

    def ids(self) -> np.ndarray:
        ids = np.unique(self.labels)
        return ids[ids != 0]


@dataclass
class WarpResult:
    """Output of :func:`forward_warp`.

    ``hole`` is True where at least one source pixel landed, ``collision``
    where two or more did.  ``zbuffer`` holds the winning depth per target
    pixel and ``inf`` where nothing landed.
    """

    image1: np.ndarray
    collision: np.ndarray
    hole: np.ndarray
    zbuffer: np.ndarray
    source_index: np.ndarray  # winning row-major source index, -1 for holes


@dataclass
class SynthesisParams:
    dilation_kernel: int = 3
    inpaint_radius: int = 3


@dataclass
class Sample:
    image1: np.ndarray
    flow: FlowField
    collision: np.ndarray
    hole: np.ndarray
    hole_prime: np.ndarray
    z_after: np.ndarray


def select_largest_instances(instances: InstanceSet, n: int) -> InstanceSet:
    """Keep the ``n`` largest objects, renumbered ``1..n`` by decreasing size.

    Ties go to the lower original label.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    labels = instances.labels
    out = np.zeros(labels.shape, dtype=np.int32)
    if n == 0 or not labels.size:
        return InstanceSet(out)
    counts = np.bincount(labels.ravel().astype(np.int64))
    ids = np.nonzero(counts)[0]
    ids = ids[ids != 0]
    order = np.lexsort((ids, -counts[ids]))
    for new_id, old_id in enumerate(ids[order][:n], start=1):
        out[labels == old_id] = new_id
    return InstanceSet(out)


def composite_instance_flow(
    depth: np.ndarray,
    K: CameraIntrinsics,
    T_bg: RigidMotion,
    instances: Optional[InstanceSet] = None,
    instance_motions: Sequence[tuple[int, RigidMotion]] = (),
) -> tuple[FlowField, np.ndarray]:
    """Flow where background pixels follow ``T_bg`` and every object label its own motion."""
    flow, z_after = flow_from_depth(depth, K, T_bg)
    if not instance_motions:
        return flow, z_after
    if instances is None:
        raise ValueError("instance motions given without an instance map")
    if instances.labels.shape != np.shape(depth):
        raise ValueError("instance map does not match depth dimensions")

    present = set(int(i) for i in instances.ids())
    uv, valid, z_after = flow.uv.copy(), flow.valid.copy(), z_after.copy()
    for label, motion in instance_motions:
        if label == 0 or int(label) not in present:
            raise ValueError(f"motion references unknown instance label {label}")
        sel = instances.labels == label
        obj_flow, obj_z = flow_from_depth(depth, K, motion)
        uv[sel] = obj_flow.uv[sel]
        valid[sel] = obj_flow.valid[sel]
        z_after[sel] = obj_z[sel]
    return FlowField(uv, valid), z_after


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def splat_targets(flow: FlowField) -> tuple[np.ndarray, np.ndarray]:
    """Row-major source and target indices of every valid, in-bounds splat."""
    h, w = flow.valid.shape
    vs, us = np.mgrid[0:h, 0:w]
    tx = round_half_away(us + flow.u)
    ty = round_half_away(vs + flow.v)
    keep = flow.valid & (tx >= 0) & (tx < w) & (ty >= 0) & (ty < h)
    src = np.flatnonzero(keep)
    tgt = (ty[keep].astype(np.int64) * w + tx[keep].astype(np.int64)).ravel()
    return src, tgt


def forward_warp(image0: np.ndarray, flow: FlowField, z_after: np.ndarray) -> WarpResult:
    """Push every valid pixel of ``image0`` to ``round(p + flow)``.

    Where several sources land on the same target the one with the smallest
    ``z_after`` wins; equal depths go to the smaller row-major source index.
    """
    image0 = np.asarray(image0)
    h, w = image0.shape[:2]
    z_after = np.asarray(z_after, dtype=np.float64)
    if flow.valid.shape != (h, w) or z_after.shape != (h, w):
        raise ValueError("image, flow and depth dimensions disagree")

    src, tgt = splat_targets(flow)
    z = z_after.ravel()[src]
    counts = np.bincount(tgt, minlength=h * w)

    order = np.lexsort((src, z, tgt))
    tgt_sorted = tgt[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = tgt_sorted[1:] != tgt_sorted[:-1]
    winners = order[first]

    source_index = np.full(h * w, -1, dtype=np.int64)
    source_index[tgt[winners]] = src[winners]
    zbuffer = np.full(h * w, np.inf)
    zbuffer[tgt[winners]] = z[winners]

    flat0 = image0.reshape(h * w, -1)
    image1 = np.zeros_like(flat0)
    image1[tgt[winners]] = flat0[src[winners]]

    return WarpResult(
        image1=image1.reshape(image0.shape),
        collision=(counts >= 2).reshape(h, w),
        hole=(counts >= 1).reshape(h, w),
        zbuffer=zbuffer.reshape(h, w),
        source_index=source_index.reshape(h, w),
    )


def hole_masks(warp: WarpResult, dilation_kernel: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(H, H')`` where ``H' = H & (dilate(M) == M)``.

    Pixels that only become colliding after dilation are likely stretch
    gaps filled by background, so they join the inpainting region.
    """
    grown = dilate(warp.collision, dilation_kernel)
    agree = grown == warp.collision
    return warp.hole, warp.hole & agree


def synthesize_pair(
    image0: np.ndarray,
    depth: np.ndarray,
    K: CameraIntrinsics,
    T_bg: RigidMotion,
    instances: Optional[InstanceSet] = None,
    instance_motions: Sequence[tuple[int, RigidMotion]] = (),
    params: Optional[SynthesisParams] = None,
) -> Sample:
    """Render the novel view, its flow labels and masks for one virtual motion."""
    params = params or SynthesisParams()
    flow, z_after = composite_instance_flow(depth, K, T_bg, instances, instance_motions)
    warped = forward_warp(image0, flow, z_after)
    hole, hole_prime = hole_masks(warped, params.dilation_kernel)
    if hole_prime.any():
        image1 = inpaint(warped.image1, hole_prime, params.inpaint_radius)
    else:
        # nothing survived the warp; leave the empty canvas
        image1 = warped.image1
    return Sample(
        image1=image1,
        flow=flow,
        collision=warped.collision,
        hole=hole,
        hole_prime=hole_prime,
        z_after=z_after,
    )


def bilinear_sample(image: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample ``image`` at float coordinates; coordinates are clamped to the image."""
    h, w = image.shape[:2]
    img = image.astype(np.float64).reshape(h, w, -1)
    x = np.clip(x, 0, w - 1)
    y = np.clip(y, 0, h - 1)
    x0 = np.minimum(np.floor(x).astype(np.int64), w - 2) if w > 1 else np.zeros(x.shape, np.int64)
    y0 = np.minimum(np.floor(y).astype(np.int64), h - 2) if h > 1 else np.zeros(y.shape, np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    ax = (x - x0)[..., None]
    ay = (y - y0)[..., None]
    top = img[y0, x0] * (1 - ax) + img[y0, x1] * ax
    bottom = img[y1, x0] * (1 - ax) + img[y1, x1] * ax
    return top * (1 - ay) + bottom * ay


def photometric_residuals(
    image0: np.ndarray,
    image1: np.ndarray,
    flow: FlowField,
    collision: np.ndarray,
    hole_prime: np.ndarray,
) -> np.ndarray:
    """Absolute ``|I1(p + F(p)) - I0(p)|`` per channel, with ``I1`` sampled bilinearly.

    Only sources whose splat target is covered (``hole_prime``) and
    collision-free are kept; returns an ``(n, channels)`` array.
    """
    h, w = image0.shape[:2]
    src, tgt = splat_targets(flow)
    keep = hole_prime.ravel()[tgt] & ~collision.ravel()[tgt]
    src = src[keep]
    vs, us = np.divmod(src, w)
    x = us + flow.u.ravel()[src]
    y = vs + flow.v.ravel()[src]
    sampled = bilinear_sample(image1, x, y)
    ref = image0.astype(np.float64).reshape(h * w, -1)[src]
    return np.abs(sampled - ref)
