"""Sampling, blending, reconstruction and compositing over atlas rasters.

Normalized UV coordinates follow the align-corners convention: u = -1 maps
to the center of texel column 0 and u = +1 to the center of column S-1.
"""

from __future__ import annotations

import numpy as np

from .types import AtlasSet, PixelLocation, UVCoord, ValidationError, VideoClip

# A pixel whose blend weight is below half a uint8 quantization step cannot
# change the stored 8-bit frame; compositing skips it so untouched regions
# stay bit-identical.
WEIGHT_FLOOR = 1.0 / 510.0


def reconstruct_pixel(c_f: np.ndarray, c_b: np.ndarray, alpha: float) -> np.ndarray:
    """Alpha-blend foreground over background: (1 - a) * c_b + a * c_f."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if np.any(alpha < 0.0) or np.any(alpha > 1.0):
        raise ValidationError("alpha must lie in [0, 1]")
    c_f = np.asarray(c_f, dtype=np.float64)
    c_b = np.asarray(c_b, dtype=np.float64)
    a = alpha if alpha.ndim == 0 else alpha[..., None]
    return (1.0 - a) * c_b + a * c_f


def _uv_to_texel(uv: np.ndarray, size: int) -> np.ndarray:
    uv = np.clip(np.asarray(uv, dtype=np.float64), -1.0, 1.0)
    return (uv + 1.0) * 0.5 * (size - 1)


def sample_raster(raster: np.ndarray, uv: np.ndarray) -> np.ndarray:
    """Bilinearly sample ``raster`` (S, S, C) at normalized uv, shape (..., 2).

    Returns an array of shape uv.shape[:-1] + (C,).
    """
    raster = np.asarray(raster, dtype=np.float64)
    size = raster.shape[0]
    uv = np.asarray(uv, dtype=np.float64)
    lead_shape = uv.shape[:-1]
    texel = _uv_to_texel(uv.reshape(-1, 2), size)
    sx, sy = texel[:, 0], texel[:, 1]

    x0 = np.minimum(np.floor(sx).astype(np.int64), size - 2)
    y0 = np.minimum(np.floor(sy).astype(np.int64), size - 2)
    x0 = np.maximum(x0, 0)
    y0 = np.maximum(y0, 0)
    fx = (sx - x0)[:, None]
    fy = (sy - y0)[:, None]

    c00 = raster[y0, x0]
    c01 = raster[y0, x0 + 1]
    c10 = raster[y0 + 1, x0]
    c11 = raster[y0 + 1, x0 + 1]
    top = c00 * (1.0 - fx) + c01 * fx
    bot = c10 * (1.0 - fx) + c11 * fx
    out = top * (1.0 - fy) + bot * fy
    return out.reshape(*lead_shape, raster.shape[-1])


def sample_atlas(raster: np.ndarray, uv: UVCoord | tuple[float, float]) -> np.ndarray:
    """Sample one RGBA (or RGB) color from an atlas raster at a single uv."""
    if isinstance(uv, UVCoord):
        uv = (uv.u, uv.v)
    return sample_raster(raster, np.asarray(uv, dtype=np.float64))


def map_to_atlas(atlas: AtlasSet, p: PixelLocation) -> tuple[UVCoord, UVCoord, float]:
    """Stored (uv_fg, uv_bg, alpha) for one pixel location."""
    p.check_bounds(atlas.video_shape)
    uf = atlas.uv_fg[p.t, p.y, p.x]
    ub = atlas.uv_bg[p.t, p.y, p.x]
    return (
        UVCoord(float(uf[0]), float(uf[1])),
        UVCoord(float(ub[0]), float(ub[1])),
        float(atlas.alpha[p.t, p.y, p.x]),
    )


def reconstruct_video(atlas: AtlasSet) -> VideoClip:
    """Rebuild the clip by sampling both atlases through the uv tables."""
    c_f = sample_raster(atlas.fg_rgba[..., :3], atlas.uv_fg)
    c_b = sample_raster(atlas.bg_rgba[..., :3], atlas.uv_bg)
    a = atlas.alpha[..., None].astype(np.float64)
    frames = (1.0 - a) * c_b + a * c_f
    return VideoClip(frames=np.clip(frames, 0.0, 1.0).astype(np.float32))


def composite_edit_layer(
    original: VideoClip,
    edited_atlas: AtlasSet,
    touched_region: np.ndarray,
    layer: str = "foreground",
) -> VideoClip:
    """Composite an atlas-space edit back over the original frames.

    Only pixels whose bilinear footprint intersects ``touched_region`` and
    whose layer blend weight clears WEIGHT_FLOOR are re-blended; every other
    pixel is copied verbatim from ``original``.
    """
    touched = np.asarray(touched_region)
    size = edited_atlas.resolution
    if touched.shape != (size, size):
        raise ValidationError(f"touched_region shape {touched.shape} != atlas dims {(size, size)}")
    if original.shape != edited_atlas.video_shape:
        raise ValidationError("original clip dims do not match the atlas lookup tables")

    uv = edited_atlas.uv_fg if layer == "foreground" else edited_atlas.uv_bg
    if layer == "foreground":
        weight = edited_atlas.alpha.astype(np.float64)
    elif layer == "background":
        weight = 1.0 - edited_atlas.alpha.astype(np.float64)
    else:
        raise ValidationError(f"unknown layer {layer!r}")

    hit = sample_raster(touched.astype(np.float64)[..., None], uv)[..., 0] > 0.0
    replace = hit & (weight >= WEIGHT_FLOOR)
    if not replace.any():
        return VideoClip(frames=original.frames.copy(), fps=original.fps)

    frames = original.frames.astype(np.float64).copy()
    idx = np.nonzero(replace)
    edit_rgb = sample_raster(edited_atlas.layer_raster(layer)[..., :3], uv[idx])
    w = weight[idx][:, None]
    frames[idx] = (1.0 - w) * frames[idx] + w * edit_rgb
    return VideoClip(frames=np.clip(frames, 0.0, 1.0).astype(np.float32), fps=original.fps)
