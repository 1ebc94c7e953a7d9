"""End-point error and outlier rates for optical flow."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .geometry import FlowField

ABS_THRESHOLD = 3.0
REL_THRESHOLD = 0.05
_EPS = 1e-9


class EmptyEvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class FlowErrorReport:
    epe: float
    rate_gt3: float
    fl: float
    n_valid: int

    def to_line(self) -> str:
        return f"epe={self.epe:.6f} gt3={self.rate_gt3:.6f} fl={self.fl:.6f} n={self.n_valid:d}"

    @classmethod
    def from_line(cls, line: str) -> "FlowErrorReport":
        m = re.fullmatch(r"\s*epe=(\S+) gt3=(\S+) fl=(\S+) n=(\d+)\s*", line)
        if not m:
            raise ValueError(f"not a report line: {line!r}")
        return cls(float(m.group(1)), float(m.group(2)), float(m.group(3)), int(m.group(4)))


def endpoint_errors(pred: FlowField, gt: FlowField) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel end-point error and ground-truth magnitude over pixels valid in ``gt``."""
    if pred.uv.shape != gt.uv.shape:
        raise ValueError(f"flow shapes differ: {pred.uv.shape} vs {gt.uv.shape}")
    diff = pred.uv[gt.valid] - gt.uv[gt.valid]
    err = np.sqrt(np.sum(diff * diff, axis=-1))
    mag = np.sqrt(np.sum(gt.uv[gt.valid] ** 2, axis=-1))
    return err, mag


def report_from_errors(err: np.ndarray, mag: np.ndarray) -> FlowErrorReport:
    n = int(err.size)
    if n == 0:
        raise EmptyEvaluationError("no valid ground-truth pixels to evaluate")
    outlier = err > ABS_THRESHOLD
    fl = outlier & (err / np.maximum(mag, _EPS) > REL_THRESHOLD)
    # numpy reductions over contiguous float arrays use pairwise summation
    return FlowErrorReport(
        epe=float(np.sum(err) / n),
        rate_gt3=float(np.count_nonzero(outlier) / n),
        fl=float(np.count_nonzero(fl) / n),
        n_valid=n,
    )


def evaluate(pred: FlowField, gt: FlowField) -> FlowErrorReport:
    """EPE, the >3 px rate and KITTI Fl (>3 px and >5 %) over all valid ground-truth pixels."""
    return report_from_errors(*endpoint_errors(pred, gt))
