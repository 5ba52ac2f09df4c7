"""Image and frame-directory I/O. PNG only; lossless and byte-stable."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .atlas_core.types import ValidationError, VideoClip


def to_uint8(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.dtype == np.uint8:
        return img
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def from_uint8(img: np.ndarray) -> np.ndarray:
    return np.asarray(img, dtype=np.float32) / 255.0


def _to_pil(img: np.ndarray) -> Image.Image:
    arr = to_uint8(img)
    if arr.ndim == 2:
        return Image.fromarray(arr, mode="L")
    if arr.ndim == 3 and arr.shape[-1] in (3, 4):
        return Image.fromarray(arr, mode="RGB" if arr.shape[-1] == 3 else "RGBA")
    raise ValidationError(f"cannot encode image with shape {arr.shape}")


def save_png(path, img: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _to_pil(img).save(path, format="PNG")
    return path


def png_bytes(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    _to_pil(img).save(buf, format="PNG")
    return buf.getvalue()


def load_png(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no image at {path}")
    with Image.open(path) as im:
        return from_uint8(np.asarray(im))


def save_frames(frames, out_dir) -> Path:
    """Write frames as zero-padded numbered PNGs: 00000.png, 00001.png, ..."""
    arr = frames.frames if isinstance(frames, VideoClip) else np.asarray(frames)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for k in range(arr.shape[0]):
        save_png(out_dir / f"{k:05d}.png", arr[k])
    return out_dir


def load_frames(frames_dir, fps: float = 24.0) -> VideoClip:
    frames_dir = Path(frames_dir)
    if not frames_dir.is_dir():
        raise ValidationError(f"not a frames directory: {frames_dir}")
    paths = sorted(frames_dir.glob("*.png"))
    if len(paths) < 2:
        raise ValidationError(f"{frames_dir} holds {len(paths)} PNG frames; need at least 2")
    frames = np.stack([load_png(p) for p in paths])
    if frames.ndim != 4 or frames.shape[-1] != 3:
        raise ValidationError("frames must be RGB images of equal size")
    return VideoClip(frames=frames, fps=fps)
