"""Batch generation, verification and evaluation over image directories.

Every (image, motion) pair is an independent task with its own seed, so the
output tree depends only on the inputs and the config, never on how many
worker processes ran.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import formats
from .geometry import RigidMotion, intrinsics_from_dims, normalize_depth
from .imageproc import bilateral_filter_depth, dilate
from .metrics import FlowErrorReport, endpoint_errors, report_from_errors
from .sampler import (
    GenerationConfig,
    config_from_text,
    config_to_text,
    make_rng,
    sample_motion,
    sample_object_motion,
    task_seed,
)
from .warp import SynthesisParams, photometric_residuals, select_largest_instances, synthesize_pair

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".tif", ".tiff")
MANIFEST_NAME = "manifest.json"
SUMMARY_NAME = "summary.json"
PHOTOMETRIC_TOLERANCE = 10.0


@dataclass(frozen=True)
class ManifestEntry:
    stem: str
    image_path: str
    depth_path: Optional[str]
    instance_path: Optional[str]
    image_index: int
    motion_index: int
    seed: int

    @property
    def name(self) -> str:
        return f"{self.stem}_m{self.motion_index:02d}"


@dataclass
class JobManifest:
    config: GenerationConfig
    entries: list

    def to_json(self) -> str:
        payload = {
            "config": config_to_text(self.config),
            "entries": [asdict(e) for e in self.entries],
        }
        return json.dumps(payload, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "JobManifest":
        payload = json.loads(text)
        return cls(
            config=config_from_text(payload["config"]),
            entries=[ManifestEntry(**e) for e in payload["entries"]],
        )

    @classmethod
    def load(cls, path) -> "JobManifest":
        return cls.from_json(Path(path).read_text())


def _find_by_stem(directory: Optional[Path], stem: str, suffixes) -> Optional[Path]:
    if directory is None:
        return None
    for suffix in suffixes:
        candidate = directory / f"{stem}{suffix}"
        if candidate.exists():
            return candidate
    return None


def plan(images_dir, depths_dir, config: GenerationConfig, instances_dir=None) -> JobManifest:
    """Build the manifest: one entry per image (sorted by name) and motion index."""
    images_dir, depths_dir = Path(images_dir), Path(depths_dir)
    instances_dir = Path(instances_dir) if instances_dir else None
    depth_suffixes = (".pfm",) if config.depth_encoding == "pfm" else (".png",)
    images = sorted(p for p in images_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    entries = []
    for image_index, image_path in enumerate(images):
        depth_path = _find_by_stem(depths_dir, image_path.stem, depth_suffixes)
        inst_path = _find_by_stem(instances_dir, image_path.stem, (".png",))
        for k in range(config.motions_per_image):
            entries.append(
                ManifestEntry(
                    stem=image_path.stem,
                    image_path=str(image_path.resolve()),
                    depth_path=str(depth_path.resolve()) if depth_path else None,
                    instance_path=str(inst_path.resolve()) if inst_path else None,
                    image_index=image_index,
                    motion_index=k,
                    seed=task_seed(config.base_seed, image_index, k),
                )
            )
    return JobManifest(config, entries)


def prepare_depth(raw: np.ndarray, config: GenerationConfig) -> np.ndarray:
    depth = normalize_depth(raw, config.depth_mode)
    return bilateral_filter_depth(
        depth,
        kernel=config.bilateral_kernel,
        sigma_space=config.bilateral_sigma_space,
        sigma_value=config.bilateral_sigma_value,
        iterations=config.bilateral_iterations,
    )


def sample_motions(seed: int, config: GenerationConfig, n_instances: int):
    """Camera motion and one motion per kept instance, all drawn from one task generator."""
    rng = make_rng(seed)
    camera = sample_motion(rng, config.camera_ranges)
    T_bg = RigidMotion.from_euler(*camera)
    objects = [(label, sample_object_motion(rng, camera, config.object_ranges)) for label in range(1, n_instances + 1)]
    return T_bg, objects


def run_entry(entry: ManifestEntry, config: GenerationConfig, out_dir) -> dict:
    """Generate and write one sample; returns its statistics."""
    if entry.depth_path is None:
        raise FileNotFoundError(f"no depth map for {entry.stem}")
    image0 = formats.read_image(entry.image_path)
    raw_depth = formats.read_depth(entry.depth_path, config.depth_encoding, config.depth_scale)
    if raw_depth.shape != image0.shape[:2]:
        raise ValueError(f"depth {raw_depth.shape} does not match image {image0.shape[:2]}")
    depth = prepare_depth(raw_depth, config)
    h, w = depth.shape
    K = intrinsics_from_dims(w, h, config.focal_scale)

    instances = None
    if entry.instance_path is not None:
        instances = select_largest_instances(formats.read_instances(entry.instance_path), config.n_objects)
    T_bg, objects = sample_motions(entry.seed, config, instances.count if instances is not None else 0)

    sample = synthesize_pair(
        image0,
        depth,
        K,
        T_bg,
        instances,
        objects,
        SynthesisParams(config.dilation_kernel, config.inpaint_radius),
    )

    paths = formats.SamplePaths.for_sample(out_dir, entry.stem, entry.motion_index)
    formats.write_image(paths.image0, image0)
    formats.write_image(paths.image1, sample.image1)
    if config.flow_format in ("flo", "both"):
        formats.write_flo(paths.flow, sample.flow)
    if config.flow_format in ("kitti", "both"):
        formats.write_kitti_flow(paths.flow_kitti, sample.flow)
    formats.write_mask(paths.collision_mask, sample.collision)
    formats.write_mask(paths.hole_mask, sample.hole)
    formats.write_mask(paths.hole_mask_prime, sample.hole_prime)
    formats.write_pfm(paths.depth, depth)
    return {
        "hole_fraction": float(np.mean(~sample.hole)),
        "collision_fraction": float(np.mean(sample.collision)),
    }


def _run_safe(args):
    entry, config, out_dir = args
    try:
        return entry.name, run_entry(entry, config, out_dir), None
    except Exception as exc:  # one bad input must not stop the batch
        return entry.name, None, f"{type(exc).__name__}: {exc}"


def generate(manifest: JobManifest, out_dir, jobs: int = 1) -> dict:
    """Write the manifest, run every entry and write ``summary.json``.

    ``wall_time`` is returned but kept out of the written summary so that
    repeated runs yield identical trees.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / MANIFEST_NAME).write_text(manifest.to_json())

    start = time.perf_counter()
    tasks = [(e, manifest.config, str(out_dir)) for e in manifest.entries]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_safe, tasks, chunksize=1))
    else:
        results = [_run_safe(t) for t in tasks]
    wall = time.perf_counter() - start

    stats = [r for _, r, err in results if err is None]
    failures = {name: err for name, _, err in results if err is not None}
    for name, err in failures.items():
        log.error("%s: %s", name, err)
    summary = {
        "samples": len(stats),
        "failed": len(failures),
        "failures": failures,
        "mean_hole_fraction": float(np.mean([s["hole_fraction"] for s in stats])) if stats else 0.0,
        "mean_collision_fraction": float(np.mean([s["collision_fraction"] for s in stats])) if stats else 0.0,
    }
    (out_dir / SUMMARY_NAME).write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return dict(summary, wall_time=wall)


# --- verification ----------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    sample: str
    check: str
    passed: bool
    detail: str = ""

    def __str__(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.sample} {self.check} {self.detail}".rstrip()


def _read_flow(paths: formats.SamplePaths, config: GenerationConfig):
    if config.flow_format in ("flo", "both"):
        return formats.read_flo(paths.flow)
    return formats.read_kitti_flow(paths.flow_kitti)


def verify_sample(entry: ManifestEntry, config: GenerationConfig, out_dir) -> list:
    name = entry.name
    paths = formats.SamplePaths.for_sample(out_dir, entry.stem, entry.motion_index)
    try:
        image0 = formats.read_image(paths.image0)
        image1 = formats.read_image(paths.image1)
        flow = _read_flow(paths, config)
        collision = formats.read_mask(paths.collision_mask)
        hole = formats.read_mask(paths.hole_mask)
        hole_prime = formats.read_mask(paths.hole_mask_prime)
    except (OSError, ValueError) as exc:
        return [CheckResult(name, "readable", False, f"{type(exc).__name__}: {exc}")]

    results = [CheckResult(name, "readable", True)]
    shape = image0.shape[:2]
    shapes_ok = all(a.shape[:2] == shape for a in (image1, flow.valid, collision, hole, hole_prime))
    results.append(CheckResult(name, "dimensions", shapes_ok))
    if not shapes_ok:
        return results

    expected = hole & (dilate(collision, config.dilation_kernel) == collision)
    algebra_ok = bool(np.all(hole_prime <= hole) and np.array_equal(hole_prime, expected) and np.all(collision <= hole))
    results.append(CheckResult(name, "mask_algebra", algebra_ok))

    flow_ok = bool(np.all(np.isfinite(flow.uv[flow.valid])))
    results.append(CheckResult(name, "flow_validity", flow_ok, f"valid={np.mean(flow.valid):.4f}"))

    res = photometric_residuals(image0, image1, flow, collision, hole_prime)
    if res.size == 0:
        results.append(CheckResult(name, "photometric", False, "no comparable pixels"))
    else:
        med = float(np.max(np.median(res, axis=0)))
        results.append(
            CheckResult(name, "photometric", med <= PHOTOMETRIC_TOLERANCE, f"median_abs={med:.3f}")
        )
    return results


def verify(out_dir) -> list:
    out_dir = Path(out_dir)
    manifest = JobManifest.load(out_dir / MANIFEST_NAME)
    summary_path = out_dir / SUMMARY_NAME
    failed = {}
    if summary_path.exists():
        failed = json.loads(summary_path.read_text()).get("failures", {})
    results = []
    for entry in manifest.entries:
        if entry.name in failed:
            results.append(CheckResult(entry.name, "generated", False, failed[entry.name]))
            continue
        results.extend(verify_sample(entry, manifest.config, out_dir))
    return results


# --- evaluation --------------------------------------------------------------------


def _read_any_flow(path: Path):
    if path.suffix == ".flo":
        return formats.read_flo(path)
    return formats.read_kitti_flow(path)


def evaluate_dirs(pred_dir, gt_dir) -> tuple[dict, FlowErrorReport, list]:
    """Evaluate every ``.flo`` / KITTI ``.png`` in ``gt_dir`` against the same name in ``pred_dir``.

    Returns per-file reports, one report pooled over all pixels, and the
    names missing from ``pred_dir``.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    per_file, errs, mags, missing = {}, [], [], []
    gt_files = sorted(p for p in gt_dir.iterdir() if p.suffix == ".flo" or p.name.endswith("_flow_kitti.png"))
    for gt_path in gt_files:
        pred_path = pred_dir / gt_path.name
        if not pred_path.exists():
            missing.append(gt_path.name)
            continue
        err, mag = endpoint_errors(_read_any_flow(pred_path), _read_any_flow(gt_path))
        if err.size:
            per_file[gt_path.name] = report_from_errors(err, mag)
        errs.append(err)
        mags.append(mag)
    total = report_from_errors(
        np.concatenate(errs) if errs else np.zeros(0), np.concatenate(mags) if mags else np.zeros(0)
    )
    return per_file, total, missing
