"""
Independently moving objects
============================

An instance map splits the image into background and objects.  Only the
largest objects are kept; each receives the camera motion plus its own
small random perturbation, so the flow field is no longer a single rigid
motion.
"""

import matplotlib.pyplot as plt
import numpy as np
from skimage import data

from depthstill import (
    InstanceSet,
    RigidMotion,
    intrinsics_from_dims,
    sample_motion,
    sample_object_motion,
    select_largest_instances,
    synthesize_pair,
)
from depthstill.sampler import CAMERA_RANGES, OBJECT_RANGES, make_rng

image = data.coffee()
h, w = image.shape[:2]
rows = np.linspace(0, 1, h)[:, None] * np.ones((1, w))
depth = 50 - 30 * rows

# three "detections"; the tiny one is treated as noise and dropped
labels = np.zeros((h, w), np.int32)
yy, xx = np.mgrid[0:h, 0:w]
labels[((yy - 190) / 140) ** 2 + ((xx - 300) / 170) ** 2 <= 1] = 4
labels[20:90, 470:580] = 7
labels[5:9, 5:9] = 2
depth[labels == 4] = 12.0
depth[labels == 7] = 25.0

kept = select_largest_instances(InstanceSet(labels), n=2)
print("objects kept:", kept.count)

rng = make_rng(11)
camera = sample_motion(rng, CAMERA_RANGES)
objects = [(label, sample_object_motion(rng, camera, OBJECT_RANGES)) for label in range(1, kept.count + 1)]
K = intrinsics_from_dims(w, h)
sample = synthesize_pair(image, depth, K, RigidMotion.from_euler(*camera), kept, objects)

fig, axes = plt.subplots(1, 4, figsize=(16, 4))
axes[0].imshow(image)
axes[0].set_title("input")
axes[1].imshow(kept.labels, cmap="tab10", interpolation="nearest")
axes[1].set_title("kept instances")
axes[2].imshow(sample.image1)
axes[2].set_title("synthesized view")
axes[3].imshow(np.hypot(sample.flow.u, sample.flow.v), cmap="viridis")
axes[3].set_title("flow magnitude (px)")
for ax in axes:
    ax.axis("off")
plt.tight_layout()
plt.show()
