"""Optical-flow training data from single images and depth maps."""

from .geometry import (
    CameraIntrinsics,
    EulerAngles,
    FlowField,
    RigidMotion,
    flow_from_depth,
    intrinsics_from_dims,
    normalize_depth,
    rotation_from_euler,
)
from .imageproc import bilateral_filter_depth, dilate, inpaint
from .metrics import FlowErrorReport, evaluate
from .sampler import GenerationConfig, MotionRanges, sample_motion, sample_object_motion, task_seed
from .warp import (
    InstanceSet,
    SynthesisParams,
    WarpResult,
    composite_instance_flow,
    forward_warp,
    hole_masks,
    select_largest_instances,
    synthesize_pair,
)

__version__ = "0.1.0"

__all__ = [
    "CameraIntrinsics",
    "EulerAngles",
    "FlowErrorReport",
    "FlowField",
    "GenerationConfig",
    "InstanceSet",
    "MotionRanges",
    "RigidMotion",
    "SynthesisParams",
    "WarpResult",
    "bilateral_filter_depth",
    "composite_instance_flow",
    "dilate",
    "evaluate",
    "flow_from_depth",
    "forward_warp",
    "hole_masks",
    "inpaint",
    "intrinsics_from_dims",
    "normalize_depth",
    "rotation_from_euler",
    "sample_motion",
    "sample_object_motion",
    "select_largest_instances",
    "synthesize_pair",
    "task_seed",
]
