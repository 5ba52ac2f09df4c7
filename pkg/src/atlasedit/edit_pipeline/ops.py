"""The atlas editing procedure: locate, noise, guided decode, paste.

All diffusion math runs in float64 state space so the 50-step trajectories
hold up against closed-form oracles at tight tolerances.
"""

from __future__ import annotations

import math
from typing import Optional

import cv2
import numpy as np

from ..atlas_core.types import AtlasSet, ValidationError
from ..providers.base import NoisePredictor, ProviderSet, Segmenter
from ..rng import substream
from .request import Box, EditPatch, EditRequest
from .schedule import NoiseSchedule

WORKING_RESOLUTION = 512
BBOX_PAD_FRACTION = 0.1


class NotFoundError(LookupError):
    """No segment matched any of the requested source tokens."""

    def __init__(self, tokens, available):
        self.tokens = tuple(tokens)
        self.available = tuple(sorted(set(available)))
        super().__init__(
            f"no segment matched tokens {list(self.tokens)}; "
            f"available labels: {list(self.available) or 'none'}"
        )


def blend_atlas_for_segmentation(atlas_rgba: np.ndarray) -> np.ndarray:
    """Compose the layer over solid white so segmenters see opaque content."""
    atlas_rgba = np.asarray(atlas_rgba, dtype=np.float32)
    if atlas_rgba.ndim != 3 or atlas_rgba.shape[-1] != 4:
        raise ValidationError("expected an (S, S, 4) RGBA raster")
    rgb = atlas_rgba[..., :3]
    alpha = atlas_rgba[..., 3:4]
    return rgb * alpha + (1.0 - alpha)


def _pad_to_square(box: Box, height: int, width: int, pad_fraction: float) -> Box:
    """Pad per side, grow to a square, then shift/clip into bounds."""
    pad_x = int(round(box.width * pad_fraction))
    pad_y = int(round(box.height * pad_fraction))
    x0, x1 = box.x0 - pad_x, box.x1 + pad_x
    y0, y1 = box.y0 - pad_y, box.y1 + pad_y
    side = max(x1 - x0, y1 - y0)
    side = min(side, height, width)
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    x0 = int(round(cx - side / 2.0))
    y0 = int(round(cy - side / 2.0))
    x0 = min(max(x0, 0), width - side)
    y0 = min(max(y0, 0), height - side)
    return Box(x0, y0, x0 + side, y0 + side)


def _matching_union(segments, tokens) -> Optional[np.ndarray]:
    wanted = {t.lower() for t in tokens}
    union = None
    for seg in segments:
        if seg.label.lower() in wanted:
            union = seg.mask.copy() if union is None else (union | seg.mask)
    return union


def locate_region(
    blended_atlas: np.ndarray,
    source_tokens,
    segmenter: Segmenter,
    pad_fraction: float = BBOX_PAD_FRACTION,
    working_resolution: int = WORKING_RESOLUTION,
) -> tuple[Box, np.ndarray]:
    """Find the edit region: padded square bbox + working-resolution mask.

    The mask is re-inferred on the cropped square (the crop gives the
    segmenter a cleaner view); if that second pass finds nothing, the
    full-raster mask is cropped and resized instead.
    """
    blended_atlas = np.asarray(blended_atlas, dtype=np.float32)
    height, width = blended_atlas.shape[:2]
    segments = segmenter.segment(blended_atlas)
    union = _matching_union(segments, source_tokens)
    if union is None:
        raise NotFoundError(source_tokens, [s.label for s in segments])

    ys, xs = np.nonzero(union)
    tight = Box(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)
    box = _pad_to_square(tight, height, width, pad_fraction)

    crop = blended_atlas[box.y0 : box.y1, box.x0 : box.x1]
    crop_up = cv2.resize(crop, (working_resolution, working_resolution), interpolation=cv2.INTER_LINEAR)
    refined = _matching_union(segmenter.segment(crop_up), source_tokens)
    if refined is None:
        coarse = union[box.y0 : box.y1, box.x0 : box.x1].astype(np.float32)
        refined = (
            cv2.resize(coarse, (working_resolution, working_resolution), interpolation=cv2.INTER_LINEAR)
            > 0.5
        )
    mask = refined.astype(np.float32)
    return box, mask


class ForwardMarginal:
    """Closed-form forward statistics x_t = mean_coeff(t)*x0 + std(t)*eps.

    Callable t -> (mean_coeff, std); sample(t) draws fresh noise from the
    shared stream each call.
    """

    def __init__(self, x0: np.ndarray, schedule: NoiseSchedule, rng: np.random.Generator):
        self._x0 = x0
        self._schedule = schedule
        self._rng = rng

    def __call__(self, index: int) -> tuple[float, float]:
        abar = self._schedule.alpha_bar_at(index)
        return math.sqrt(abar), math.sqrt(1.0 - abar)

    def sample(self, index: int) -> np.ndarray:
        mean_coeff, std = self(index)
        if std == 0.0:
            return self._x0.copy()
        eps = self._rng.standard_normal(self._x0.shape)
        return mean_coeff * self._x0 + std * eps


def noise_patch(
    x0: np.ndarray, rho: float, schedule: NoiseSchedule, rng: np.random.Generator
) -> tuple[np.ndarray, ForwardMarginal]:
    """Jump the clean state to its noising level T = round(rho * N_infer)."""
    if not 0.0 <= rho <= 1.0:
        raise ValidationError(f"rho = {rho} outside [0, 1]")
    x0 = np.asarray(x0, dtype=np.float64)
    marginal = ForwardMarginal(x0, schedule, rng)
    start = int(round(rho * schedule.n_infer))
    if start == 0:
        return x0.copy(), marginal
    mean_coeff, std = marginal(start)
    eps = rng.standard_normal(x0.shape)
    return mean_coeff * x0 + std * eps, marginal


def ddim_step(
    y_t: np.ndarray,
    t_index: int,
    schedule: NoiseSchedule,
    c_p: str,
    c_h: Optional[np.ndarray],
    lambda_hed: float,
    guidance_scale: float,
    predictor: NoisePredictor,
) -> np.ndarray:
    """One deterministic denoising step from map index t_index to t_index-1.

    The noise estimate is evaluated exactly once and reused for both the
    clean-state prediction and the re-noising direction.
    """
    if t_index <= 0:
        raise ValidationError("ddim_step needs t_index > 0 on the inference map")
    abar_t = schedule.alpha_bar_at(t_index)
    abar_prev = schedule.alpha_bar_at(t_index - 1)
    timestep = schedule.timestep_at(t_index)
    eps = np.asarray(
        predictor.predict(y_t, timestep, c_p, c_h, lambda_hed, guidance_scale), dtype=np.float64
    )
    if eps.shape != y_t.shape:
        raise ValidationError(f"predictor shape {eps.shape} != state shape {y_t.shape}")
    x0_pred = (y_t - math.sqrt(1.0 - abar_t) * eps) / math.sqrt(abar_t)
    return math.sqrt(abar_prev) * x0_pred + math.sqrt(1.0 - abar_prev) * eps


def masked_blend(y_prev: np.ndarray, x_prev: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Keep the generated region, restore the forward marginal elsewhere."""
    y_prev = np.asarray(y_prev)
    x_prev = np.asarray(x_prev)
    mask = np.asarray(mask)
    if y_prev.shape != x_prev.shape:
        raise ValidationError(f"state shapes differ: {y_prev.shape} vs {x_prev.shape}")
    if mask.shape != y_prev.shape[: mask.ndim]:
        raise ValidationError(f"mask shape {mask.shape} incompatible with {y_prev.shape}")
    m = mask.reshape(mask.shape + (1,) * (y_prev.ndim - mask.ndim))
    return m * y_prev + (1.0 - m) * x_prev


def resize_mask(mask: np.ndarray, height: int, width: int) -> np.ndarray:
    """Downscale a binary mask conservatively: any coverage -> 1."""
    mask = np.asarray(mask, dtype=np.float32)
    if mask.shape == (height, width):
        return mask.copy()
    out = cv2.resize(mask, (width, height), interpolation=cv2.INTER_AREA)
    return (out > 0).astype(np.float32)


def edit_patch(
    patch: EditPatch,
    req: EditRequest,
    schedule: NoiseSchedule,
    providers: ProviderSet,
) -> list[np.ndarray]:
    """Run the guided decode; returns req.num_samples edited rasters.

    Each sample draws from an independent substream of req.seed. With
    use_mask on, every step re-anchors the outside-mask region to the
    forward marginal of the original state, and the final step restores it
    from x0 verbatim.
    """
    if req.use_mask and patch.mask is None:
        raise ValidationError("use_mask requested but the patch has no mask")
    if req.use_hed and patch.hed is None:
        raise ValidationError("use_hed requested but the patch has no edge raster")

    encoder = providers.state_encoder
    x0_state = encoder.encode(patch.x0)
    c_h = patch.hed if req.use_hed else None

    mask_state = None
    if req.use_mask:
        mask_state = resize_mask(patch.mask, x0_state.shape[0], x0_state.shape[1])
    mask_bool = None if mask_state is None else mask_state.astype(bool)

    start = int(round(req.rho * schedule.n_infer))
    results = []
    for k in range(req.num_samples):
        rng = substream(req.seed, f"edit.sample.{k}")
        y, marginal = noise_patch(x0_state, req.rho, schedule, rng)
        for t_index in range(start, 0, -1):
            y = ddim_step(
                y, t_index, schedule, req.target_prompt, c_h, req.lambda_hed,
                req.guidance_scale, providers.noise_predictor,
            )
            if req.use_mask:
                if t_index - 1 == 0:
                    # verbatim restore, not an arithmetic blend
                    y = np.where(mask_bool[..., None] if y.ndim == 3 else mask_bool, y, x0_state)
                else:
                    y = masked_blend(y, marginal.sample(t_index - 1), mask_state)
        results.append(encoder.decode(y))
    return results


def paste_patch(atlas: AtlasSet, edited: np.ndarray, bbox: Box, layer: str = "foreground"):
    """Write the edited raster back into a copy of the layer.

    Returns (new AtlasSet, touched_region): touched marks exactly the texels
    whose RGB changed.
    """
    raster = atlas.layer_raster(layer)
    s = raster.shape[0]
    if not bbox.within(s, s):
        raise ValidationError(f"bbox {bbox} outside the {s}x{s} atlas")
    edited = np.asarray(edited, dtype=np.float32)
    back = cv2.resize(edited, (bbox.width, bbox.height), interpolation=cv2.INTER_LINEAR)
    new_raster = raster.copy()
    new_raster[bbox.y0 : bbox.y1, bbox.x0 : bbox.x1, :3] = back
    touched = np.any(new_raster[..., :3] != raster[..., :3], axis=-1)
    return atlas.with_layer_raster(layer, new_raster), touched
