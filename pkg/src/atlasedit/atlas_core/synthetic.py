"""Synthetic clips with known ground truth, used by tests and demos."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import VideoClip


def constant_clip(frames: int = 8, size: int = 32, value: float = 0.5, fps: float = 24.0) -> VideoClip:
    """A clip where every pixel of every frame has the same gray value."""
    data = np.full((frames, size, size, 3), value, dtype=np.float32)
    return VideoClip(frames=data, fps=fps)


def _smooth_texture(height: int, width: int) -> np.ndarray:
    """Low-frequency RGB texture with values safely inside [0, 1]."""
    yy, xx = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    u = 2.0 * np.pi * xx / width
    v = 2.0 * np.pi * yy / height
    r = 0.55 + 0.12 * np.sin(u) + 0.08 * np.cos(2 * v)
    g = 0.55 + 0.12 * np.sin(u + 1.3) + 0.08 * np.cos(2 * v + 0.7)
    b = 0.55 + 0.12 * np.sin(u + 2.6) + 0.08 * np.cos(2 * v + 1.9)
    return np.stack([r, g, b], axis=-1).astype(np.float32)


@dataclass(frozen=True)
class SquareClipTruth:
    """A translating-square clip plus its construction ground truth."""

    clip: VideoClip
    square_masks: np.ndarray  # (F, H, W) bool, True inside the square
    square_color: tuple[float, float, float]
    positions: tuple[tuple[int, int], ...]  # top-left (x, y) per frame
    background: np.ndarray  # (H, W, 3) static texture


def translating_square_clip(
    frames: int = 16,
    size: int = 64,
    square: int = 12,
    step: int = 2,
    start: tuple[int, int] = (4, 26),
    color: tuple[float, float, float] = (0.85, 0.08, 0.08),
    fps: float = 24.0,
) -> SquareClipTruth:
    """A colored square translating ``step`` px/frame over a static texture.

    The square carries a slight horizontal brightness ramp so that distinct
    square pixels have distinct colors (keeps the atlas mapping injective).
    """
    bg = _smooth_texture(size, size)
    data = np.empty((frames, size, size, 3), dtype=np.float32)
    masks = np.zeros((frames, size, size), dtype=bool)
    positions = []
    ramp = np.linspace(-0.08, 0.08, square, dtype=np.float32)
    patch = np.clip(np.asarray(color, dtype=np.float32)[None, None, :] + ramp[None, :, None], 0.0, 1.0)
    patch = np.broadcast_to(patch, (square, square, 3))
    x0, y0 = start
    for t in range(frames):
        x = x0 + step * t
        y = y0
        if x + square > size or y + square > size:
            raise ValueError("square leaves the frame; shrink step or frame count")
        frame = bg.copy()
        frame[y : y + square, x : x + square] = patch
        data[t] = frame
        masks[t, y : y + square, x : x + square] = True
        positions.append((x, y))
    clip = VideoClip(frames=data, fps=fps)
    return SquareClipTruth(
        clip=clip,
        square_masks=masks,
        square_color=color,
        positions=tuple(positions),
        background=bg,
    )
