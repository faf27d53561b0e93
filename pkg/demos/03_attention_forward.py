"""Task-split attention forward pass with randomly initialized weights.

The classification head sharpens confident responses (steep logistic around
0.5); the regression head caps dominant ones (tent map), forcing weaker
localization cues to survive.  Both act on the channel x spatial attention
product before it is fused back into the features.
"""

import numpy as np

from obbkit import (
    Task, apply_attention, channel_attention, depression, excitation,
    load_weights, random_weights, save_weights, spatial_attention,
)

rng = np.random.default_rng(0)
features = rng.normal(size=(1, 16, 12, 12)).astype(np.float32)
weights = random_weights(channels=16, reduction=4, seed=42)

print("shaping curves at a few attention values:")
for x in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"  x={x:4.2f}  excitation={excitation(x, 15.0):.6f}  depression={depression(x):.3f}")

mc = channel_attention(features, weights)
ms = spatial_attention(features, weights)
print("\nchannel map shape:", mc.shape, " range (%.4f, %.4f)" % (mc.min(), mc.max()))
print("spatial map shape:", ms.shape, " range (%.4f, %.4f)" % (ms.min(), ms.max()))

for task in (Task.CLASSIFICATION, Task.REGRESSION):
    out = apply_attention(features, weights, task)
    print(f"{task.value:>14}: output shape {out.shape}, "
          f"mean |F' - F| = {np.abs(out - features).mean():.4f}")

# weights travel as an NPZ container of little-endian float32 arrays
save_weights("/tmp/attention_weights.npz", weights)
restored = load_weights("/tmp/attention_weights.npz")
print("\nweights round-trip equal:",
      np.array_equal(weights.spatial_mix, restored.spatial_mix))
