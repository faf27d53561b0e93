"""Task-split attention forward pass with supplied weights.

A feature map F gets a channel map Mc (squeeze-excite style: GAP -> two FC
layers -> sigmoid) and a spatial map Ms (four conv branches, three dilated,
mixed by a final 3x3 conv -> sigmoid).  Their broadcast product M is shaped
by a task-specific response curve and fused back:

    F' = M + shape(sigmoid(M)) * F + F

where shape() is `excitation` for classification (sharpens responses above
0.5, suppresses the rest) and `depression` for regression (tent map that
caps dominant responses so weaker localization cues survive).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .tensor import as_feature_map, concat_channels, conv2d, fully_connected, global_avg_pool, sigmoid

DEFAULT_ETA = 15.0


class Task(enum.Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


def excitation(x, eta: float = DEFAULT_ETA):
    """Steep logistic centered at 0.5: 1 / (1 + exp(-eta * (x - 0.5)))."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    x = np.asarray(x, dtype=np.float64)
    out = 1.0 / (1.0 + np.exp(-eta * (x - 0.5)))
    return float(out) if out.ndim == 0 else out


def depression(x):
    """Tent map: x below 0.5, 1 - x above; peaks at 0.5."""
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x < 0.5, x, 1.0 - x)
    return float(out) if out.ndim == 0 else out


@dataclass
class AttentionWeights:
    """Weights for one attention head.

    channel_reduce is (C/r, C) and channel_expand (C, C/r) with r the
    squeeze reduction ratio.  The four spatial branches each map C -> 1
    channel; spatial_mix is (1, 4, 3, 3) over their concatenation.  The
    wide/tall/spread branches use `dilation` on their 3-tap axes.
    """

    channel_reduce: np.ndarray
    channel_expand: np.ndarray
    branch_square: np.ndarray   # (1, C, 3, 3), dense
    branch_wide: np.ndarray     # (1, C, 1, 3), dilated
    branch_tall: np.ndarray     # (1, C, 3, 1), dilated
    branch_spread: np.ndarray   # (1, C, 3, 3), dilated
    spatial_mix: np.ndarray     # (1, 4, 3, 3)
    eta: float = DEFAULT_ETA
    dilation: int = 2

    def __post_init__(self):
        for name in ("channel_reduce", "channel_expand", "branch_square",
                     "branch_wide", "branch_tall", "branch_spread", "spatial_mix"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float32))
        reduced, channels = self.channel_reduce.shape
        if self.channel_expand.shape != (channels, reduced):
            raise ValueError("channel_expand must be the transpose shape of channel_reduce")
        if reduced == 0 or channels % reduced != 0:
            raise ValueError("reduction ratio must divide the channel count")
        for name, shape in (("branch_square", (1, channels, 3, 3)),
                            ("branch_wide", (1, channels, 1, 3)),
                            ("branch_tall", (1, channels, 3, 1)),
                            ("branch_spread", (1, channels, 3, 3)),
                            ("spatial_mix", (1, 4, 3, 3))):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {getattr(self, name).shape}")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.dilation < 1:
            raise ValueError("dilation must be >= 1")

    @property
    def channels(self) -> int:
        return self.channel_reduce.shape[1]

    @property
    def reduction(self) -> int:
        return self.channel_reduce.shape[1] // self.channel_reduce.shape[0]


def channel_attention(f, w: AttentionWeights) -> np.ndarray:
    """Per-channel gate sigmoid(expand(reduce(GAP(f)))), shape (b, C, 1, 1)."""
    f = as_feature_map(f)
    if f.shape[1] != w.channels:
        raise ValueError(f"weights expect {w.channels} channels, feature map has {f.shape[1]}")
    gap = global_avg_pool(f)[:, :, 0, 0]
    z = fully_connected(gap, w.channel_reduce)
    z = fully_connected(z, w.channel_expand)
    return sigmoid(z)[:, :, None, None]


def spatial_attention(f, w: AttentionWeights) -> np.ndarray:
    """Pixel gate from the four conv branches, shape (b, 1, H, W)."""
    f = as_feature_map(f)
    if f.shape[1] != w.channels:
        raise ValueError(f"weights expect {w.channels} channels, feature map has {f.shape[1]}")
    d = w.dilation
    branches = concat_channels([
        conv2d(f, w.branch_square),
        conv2d(f, w.branch_wide, dilation=(1, d)),
        conv2d(f, w.branch_tall, dilation=(d, 1)),
        conv2d(f, w.branch_spread, dilation=(d, d)),
    ])
    return sigmoid(conv2d(branches, w.spatial_mix))


def fuse_features(f, channel_map, spatial_map, task: Task,
                  eta: float = DEFAULT_ETA) -> np.ndarray:
    """Combine attention with the input: M + shape(sigmoid(M)) * F + F."""
    f = as_feature_map(f)
    mc = np.asarray(channel_map, dtype=np.float32)
    ms = np.asarray(spatial_map, dtype=np.float32)
    b, c, h, wd = f.shape
    if mc.shape != (b, c, 1, 1):
        raise ValueError(f"channel map must have shape {(b, c, 1, 1)}, got {mc.shape}")
    if ms.shape != (b, 1, h, wd):
        raise ValueError(f"spatial map must have shape {(b, 1, h, wd)}, got {ms.shape}")
    m = mc * ms
    gate = sigmoid(m)
    if task is Task.CLASSIFICATION:
        shaped = excitation(gate, eta).astype(np.float32)
    elif task is Task.REGRESSION:
        shaped = depression(gate).astype(np.float32)
    else:
        raise ValueError(f"unknown task {task!r}")
    return m + shaped * f + f


def apply_attention(f, w: AttentionWeights, task: Task) -> np.ndarray:
    """Full forward pass: channel x spatial attention, shaped and fused."""
    mc = channel_attention(f, w)
    ms = spatial_attention(f, w)
    return fuse_features(f, mc, ms, task, eta=w.eta)


def save_weights(path, w: AttentionWeights) -> None:
    """Write weights as an NPZ container of little-endian float32 arrays."""
    np.savez(
        path,
        channel_reduce=w.channel_reduce.astype("<f4"),
        channel_expand=w.channel_expand.astype("<f4"),
        branch_square=w.branch_square.astype("<f4"),
        branch_wide=w.branch_wide.astype("<f4"),
        branch_tall=w.branch_tall.astype("<f4"),
        branch_spread=w.branch_spread.astype("<f4"),
        spatial_mix=w.spatial_mix.astype("<f4"),
        eta=np.float32(w.eta),
        dilation=np.int64(w.dilation),
    )


def load_weights(path) -> AttentionWeights:
    """Read an NPZ weight container written by save_weights."""
    with np.load(path) as data:
        missing = {"channel_reduce", "channel_expand", "branch_square", "branch_wide",
                   "branch_tall", "branch_spread", "spatial_mix"} - set(data.files)
        if missing:
            raise ValueError(f"weight container missing arrays: {sorted(missing)}")
        return AttentionWeights(
            channel_reduce=data["channel_reduce"],
            channel_expand=data["channel_expand"],
            branch_square=data["branch_square"],
            branch_wide=data["branch_wide"],
            branch_tall=data["branch_tall"],
            branch_spread=data["branch_spread"],
            spatial_mix=data["spatial_mix"],
            eta=float(data["eta"]) if "eta" in data.files else DEFAULT_ETA,
            dilation=int(data["dilation"]) if "dilation" in data.files else 2,
        )


def random_weights(channels: int, reduction: int = 16, seed: int = 0,
                   eta: float = DEFAULT_ETA, dilation: int = 2) -> AttentionWeights:
    """Gaussian-initialized weights for fixtures and demos."""
    if channels % reduction != 0:
        raise ValueError("reduction must divide channels")
    rng = np.random.default_rng(seed)

    def g(*shape):
        return rng.normal(0.0, 0.1, size=shape).astype(np.float32)

    return AttentionWeights(
        channel_reduce=g(channels // reduction, channels),
        channel_expand=g(channels, channels // reduction),
        branch_square=g(1, channels, 3, 3),
        branch_wide=g(1, channels, 1, 3),
        branch_tall=g(1, channels, 3, 1),
        branch_spread=g(1, channels, 3, 3),
        spatial_mix=g(1, 4, 3, 3),
        eta=eta,
        dilation=dilation,
    )
