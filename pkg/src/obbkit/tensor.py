"""Minimal float32 NCHW tensor ops: same-size conv, pooling, FC, sigmoid.

Forward-only (no autodiff); tensors are plain numpy arrays with shape
(batch, channels, height, width).  Reductions use numpy's fixed order, so
results are deterministic.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit


def as_feature_map(x) -> np.ndarray:
    """Validate/convert to a finite float32 (b, c, h, w) array."""
    arr = np.asarray(x, dtype=np.float32)
    if arr.ndim != 4:
        raise ValueError(f"expected rank-4 (b, c, h, w) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("feature map contains non-finite entries")
    return np.ascontiguousarray(arr)


def conv2d(x, kernel, dilation: tuple[int, int] = (1, 1)) -> np.ndarray:
    """Cross-correlation with zero padding chosen so H x W is preserved.

    kernel has shape (out_c, in_c, kh, kw); dilation (dy, dx) spreads the
    taps without changing the output size.
    """
    x = as_feature_map(x)
    k = np.asarray(kernel, dtype=np.float32)
    if k.ndim != 4:
        raise ValueError(f"kernel must be rank-4 (out_c, in_c, kh, kw), got shape {k.shape}")
    if k.shape[1] != x.shape[1]:
        raise ValueError(f"kernel expects {k.shape[1]} input channels, feature map has {x.shape[1]}")
    dy, dx = int(dilation[0]), int(dilation[1])
    if dy < 1 or dx < 1:
        raise ValueError("dilation must be >= 1")

    kh, kw = k.shape[2], k.shape[3]
    eh, ew = (kh - 1) * dy + 1, (kw - 1) * dx + 1
    py, px = eh - 1, ew - 1
    xp = np.pad(x, ((0, 0), (0, 0), (py // 2, py - py // 2), (px // 2, px - px // 2)))
    win = sliding_window_view(xp, (eh, ew), axis=(2, 3))[..., ::dy, ::dx]
    return np.einsum("bchwij,ocij->bohw", win, k)


def global_avg_pool(x) -> np.ndarray:
    """Per-channel spatial mean, shape (b, c, 1, 1)."""
    x = as_feature_map(x)
    return x.mean(axis=(2, 3), keepdims=True)


def fully_connected(v, weights) -> np.ndarray:
    """Matrix-vector product with an (m, n) weight matrix, no bias.

    Accepts a single vector (n,) or a batch (b, n).
    """
    v = np.asarray(v, dtype=np.float32)
    w = np.asarray(weights, dtype=np.float32)
    if w.ndim != 2:
        raise ValueError(f"weights must be 2-D, got shape {w.shape}")
    if v.ndim == 1:
        if v.shape[0] != w.shape[1]:
            raise ValueError(f"weights {w.shape} cannot act on vector of length {v.shape[0]}")
        return w @ v
    if v.ndim == 2:
        if v.shape[1] != w.shape[1]:
            raise ValueError(f"weights {w.shape} cannot act on batch of shape {v.shape}")
        return v @ w.T
    raise ValueError(f"expected (n,) or (b, n) input, got shape {v.shape}")


def sigmoid(x) -> np.ndarray:
    """Elementwise logistic function, numerically stable."""
    return expit(np.asarray(x, dtype=np.float32))


def concat_channels(xs) -> np.ndarray:
    """Concatenate feature maps along the channel axis, order preserved."""
    parts = [as_feature_map(x) for x in xs]
    if not parts:
        raise ValueError("need at least one tensor to concatenate")
    base = parts[0].shape
    for p in parts[1:]:
        if p.shape[0] != base[0] or p.shape[2:] != base[2:]:
            raise ValueError("all tensors must share batch and spatial dimensions")
    return np.concatenate(parts, axis=1)
