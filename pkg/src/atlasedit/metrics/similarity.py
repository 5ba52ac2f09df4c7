"""Pixel- and feature-space similarity metrics.

All image arguments are float arrays in [0, 1], either (H, W) grayscale or
(H, W, 3) RGB. Scores are plain Python floats.
"""

from __future__ import annotations

import math
from typing import List, Optional, Protocol

import numpy as np
from scipy import signal

from ..atlas_core.types import ValidationError
from ..rng import substream

_HAARPSI_C = 30.0
_HAARPSI_ALPHA = 4.2
_HAARPSI_SCALES = 3


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """10*log10(peak^2 / MSE). Identical inputs give +inf; callers that report
    should flag that rather than average it away."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"psnr needs matching shapes, got {a.shape} vs {b.shape}")
    if peak <= 0:
        raise ValidationError("peak must be positive")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _conv_same(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # MATLAB centers even-sized "same" kernels differently from scipy; the
    # double rotation reproduces MATLAB's choice, which the published HaarPSI
    # constants were tuned against.
    flipped = np.rot90(signal.convolve2d(np.rot90(image, 2), np.rot90(kernel, 2), mode="same"), 2)
    return flipped


def _halve(channel: np.ndarray) -> np.ndarray:
    return _conv_same(channel, np.full((2, 2), 0.25))[::2, ::2]


def _haar_responses(channel: np.ndarray, scales: int) -> np.ndarray:
    out = np.zeros(channel.shape + (2 * scales,))
    for s in range(1, scales + 1):
        kernel = np.full((2 ** s, 2 ** s), 2.0 ** (-s))
        kernel[: 2 ** (s - 1), :] *= -1.0
        out[:, :, s - 1] = _conv_same(channel, kernel)
        out[:, :, s + scales - 1] = _conv_same(channel, kernel.T)
    return out


def haarpsi(a: np.ndarray, b: np.ndarray, subsample: bool = True) -> float:
    """Haar-wavelet perceptual similarity in [0, 1].

    Luma responses at the two fine scales form local similarity maps, the
    coarsest scale forms the weighting map, and a logistic pooling collapses
    the maps to a scalar. Chroma (IQ) similarity joins as a third channel for
    RGB inputs. Inputs in [0, 1] are lifted to the [0, 255] range the
    published constants (C=30, alpha=4.2) assume.

    Two constant images produce an all-zero weight map; that degenerate case
    falls back to unweighted pooling so identical flats still score 1.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"haarpsi needs matching shapes, got {a.shape} vs {b.shape}")
    if a.ndim == 3 and a.shape[2] == 1:
        a, b = a[:, :, 0], b[:, :, 0]
    if a.ndim not in (2, 3) or (a.ndim == 3 and a.shape[2] != 3):
        raise ValidationError(f"expected (H, W) or (H, W, 3), got {a.shape}")
    if min(a.shape[0], a.shape[1]) < 8:
        raise ValidationError("haarpsi needs spatial dims of at least 8 pixels")

    a = a * 255.0
    b = b * 255.0
    color = a.ndim == 3
    if color:
        ya = 0.299 * a[:, :, 0] + 0.587 * a[:, :, 1] + 0.114 * a[:, :, 2]
        yb = 0.299 * b[:, :, 0] + 0.587 * b[:, :, 1] + 0.114 * b[:, :, 2]
        ia = 0.596 * a[:, :, 0] - 0.274 * a[:, :, 1] - 0.322 * a[:, :, 2]
        ib = 0.596 * b[:, :, 0] - 0.274 * b[:, :, 1] - 0.322 * b[:, :, 2]
        qa = 0.211 * a[:, :, 0] - 0.523 * a[:, :, 1] + 0.312 * a[:, :, 2]
        qb = 0.211 * b[:, :, 0] - 0.523 * b[:, :, 1] + 0.312 * b[:, :, 2]
    else:
        ya, yb = a, b

    if subsample:
        ya, yb = _halve(ya), _halve(yb)
        if color:
            ia, ib = _halve(ia), _halve(ib)
            qa, qb = _halve(qa), _halve(qb)

    n = _HAARPSI_SCALES
    ca = _haar_responses(ya, n)
    cb = _haar_responses(yb, n)

    channels = 3 if color else 2
    sims = np.zeros(ya.shape + (channels,))
    weights = np.zeros_like(sims)
    for o in range(2):
        weights[:, :, o] = np.maximum(np.abs(ca[:, :, 2 + o * n]), np.abs(cb[:, :, 2 + o * n]))
        ma = np.abs(ca[:, :, (o * n, 1 + o * n)])
        mb = np.abs(cb[:, :, (o * n, 1 + o * n)])
        sims[:, :, o] = np.mean(
            (2.0 * ma * mb + _HAARPSI_C) / (ma ** 2 + mb ** 2 + _HAARPSI_C), axis=2
        )

    if color:
        mean2 = np.full((2, 2), 0.25)
        fia, fib = np.abs(_conv_same(ia, mean2)), np.abs(_conv_same(ib, mean2))
        fqa, fqb = np.abs(_conv_same(qa, mean2)), np.abs(_conv_same(qb, mean2))
        sim_i = (2.0 * fia * fib + _HAARPSI_C) / (fia ** 2 + fib ** 2 + _HAARPSI_C)
        sim_q = (2.0 * fqa * fqb + _HAARPSI_C) / (fqa ** 2 + fqb ** 2 + _HAARPSI_C)
        sims[:, :, 2] = 0.5 * (sim_i + sim_q)
        weights[:, :, 2] = 0.5 * (weights[:, :, 0] + weights[:, :, 1])

    pooled = np.array(1.0 / (1.0 + np.exp(-_HAARPSI_ALPHA * sims)))
    total = float(np.sum(weights))
    if total > 0.0:
        mean = float(np.sum(pooled * weights)) / total
    else:
        mean = float(np.mean(pooled))
    score = (math.log(mean / (1.0 - mean)) / _HAARPSI_ALPHA) ** 2
    # rounding can overshoot 1 by a few ulp on exact matches
    return float(min(max(score, 0.0), 1.0))


class FeatureProvider(Protocol):
    """Backs lpips with a stack of convolutional feature maps."""

    def features(self, image: np.ndarray) -> List[np.ndarray]:
        """image (H, W, 3) in [0, 1] -> list of (h, w, c) float maps."""
        ...


def _unit_channels(feat: np.ndarray) -> np.ndarray:
    norm = np.sqrt(np.sum(feat ** 2, axis=-1, keepdims=True))
    return feat / np.maximum(norm, 1e-10)


def lpips(a: np.ndarray, b: np.ndarray, feature_provider: FeatureProvider) -> float:
    """Deep-feature distance: channel-normalized maps, squared difference,
    channel mean, spatial mean, summed over layers. 0 exactly for a == b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"lpips needs matching shapes, got {a.shape} vs {b.shape}")
    fa = feature_provider.features(a)
    fb = feature_provider.features(b)
    if len(fa) != len(fb):
        raise ValidationError("feature provider returned mismatched layer counts")
    total = 0.0
    for la, lb in zip(fa, fb):
        diff = _unit_channels(la) - _unit_channels(lb)
        total += float(np.mean(diff ** 2, axis=-1).mean())
    return total


class StubLpipsFeatures:
    """Fixed random convolution stack standing in for a pretrained backbone.

    Three stride-2 valid 3x3 conv layers with ReLU. Weights come from a seeded
    generator, so the stack is deterministic and lpips(x, x) == 0 holds without
    any downloaded weights.
    """

    channels = (6, 12, 24)

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._weights = []
        fan_in = 3
        for idx, fan_out in enumerate(self.channels):
            rng = substream(seed, f"lpips.conv{idx}")
            w = rng.standard_normal((fan_out, fan_in, 3, 3)) / math.sqrt(9.0 * fan_in)
            self._weights.append(w)
            fan_in = fan_out

    def features(self, image: np.ndarray) -> List[np.ndarray]:
        x = np.asarray(image, dtype=np.float64)
        if x.ndim == 2:
            x = np.repeat(x[:, :, None], 3, axis=2)
        if x.ndim != 3 or x.shape[2] != 3:
            raise ValidationError(f"expected (H, W, 3) image, got {x.shape}")
        if min(x.shape[0], x.shape[1]) < 16:
            raise ValidationError("stub feature stack needs images of at least 16 pixels")
        maps = []
        for w in self._weights:
            windows = np.lib.stride_tricks.sliding_window_view(x, (3, 3), axis=(0, 1))
            windows = windows[::2, ::2]  # stride 2
            x = np.maximum(np.tensordot(windows, w, axes=([2, 3, 4], [1, 2, 3])), 0.0)
            maps.append(x)
        return maps


def default_feature_provider(seed: int = 0) -> StubLpipsFeatures:
    return StubLpipsFeatures(seed=seed)
