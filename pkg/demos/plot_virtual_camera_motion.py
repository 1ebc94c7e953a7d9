"""
Flow from a virtual camera motion
=================================

Back-project every pixel of a still image through a depth map, move the
camera by a random roto-translation and read off the ground-truth flow.
The novel view is rendered by forward warping.
"""

import matplotlib.pyplot as plt
import numpy as np
from skimage import data

from depthstill import (
    RigidMotion,
    bilateral_filter_depth,
    intrinsics_from_dims,
    normalize_depth,
    sample_motion,
    synthesize_pair,
)
from depthstill.sampler import CAMERA_RANGES, make_rng


def flow_to_rgb(uv):
    """Hue encodes direction, saturation encodes magnitude."""
    import matplotlib.colors as mcolors

    angle = (np.arctan2(-uv[..., 1], -uv[..., 0]) / np.pi + 1) / 2
    mag = np.hypot(uv[..., 0], uv[..., 1])
    hsv = np.dstack([angle, np.clip(mag / (mag.max() + 1e-9), 0, 1), np.ones_like(angle)])
    return mcolors.hsv_to_rgb(hsv)


# a photograph and a hand-made depth: a receding floor with the subject in front
image = data.astronaut()
h, w = image.shape[:2]
rows = np.linspace(0, 1, h)[:, None] * np.ones((1, w))
depth = 60 - 40 * rows
yy, xx = np.mgrid[0:h, 0:w]
depth[((yy - 260) / 220) ** 2 + ((xx - 230) / 150) ** 2 <= 1] = 8.0

# rescale into [1, 100] and sharpen edges exactly as the generator does
depth = bilateral_filter_depth(normalize_depth(depth))
K = intrinsics_from_dims(w, h)

angles, translation = sample_motion(make_rng(3), CAMERA_RANGES)
print("rotation (rad):", angles)
print("translation:", translation)
sample = synthesize_pair(image, depth, K, RigidMotion.from_euler(angles, translation))

fig, axes = plt.subplots(2, 2, figsize=(9, 9))
axes[0, 0].imshow(image)
axes[0, 0].set_title("input view")
axes[0, 1].imshow(depth, cmap="magma_r")
axes[0, 1].set_title("depth (1 = near, 100 = far)")
axes[1, 0].imshow(sample.image1)
axes[1, 0].set_title("synthesized view")
axes[1, 1].imshow(flow_to_rgb(sample.flow.uv))
axes[1, 1].set_title("ground-truth flow")
for ax in axes.ravel():
    ax.axis("off")
plt.tight_layout()
plt.show()
