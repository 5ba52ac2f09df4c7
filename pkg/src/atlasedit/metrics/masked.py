"""Mask-restricted metric variants.

These separate what happened inside the edited region (did the object change
as asked) from what happened outside it (was the rest of the video left
alone).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..atlas_core.types import ValidationError
from .semantic import clip_score
from .similarity import lpips

_GRAY = 0.5


@dataclass(frozen=True)
class MaskedScores:
    local_a_frame: Optional[float]
    o_lpips: float
    # Frames whose mask was empty; they contribute to neither score.
    frames_without_mask: int = 0


def _mask_bbox(mask: np.ndarray):
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return None
    return int(ys.min()), int(ys.max()) + 1, int(xs.min()), int(xs.max()) + 1


def masked_metrics(pair, embedder, feature_provider) -> MaskedScores:
    """local_A_Frame over mask-bbox crops plus LPIPS outside the mask.

    The outer distance gray-fills the mask interior in both images so only
    outside-mask content can differ; an edit confined to the mask therefore
    scores exactly 0.
    """
    if pair.gt_mask is None:
        raise ValidationError("masked metrics need a ground-truth mask")
    masks = np.asarray(pair.gt_mask).astype(bool)
    if masks.shape != pair.edited.shape:
        raise ValidationError(
            f"gt_mask shape {masks.shape} does not match frames {pair.edited.shape}"
        )
    if pair.source_caption == pair.target_caption:
        raise ValidationError("frame accuracy needs distinct source and target captions")

    e_src = embedder.embed_text(pair.source_caption)
    e_tgt = embedder.embed_text(pair.target_caption)

    wins = 0
    considered = 0
    empty = 0
    outer = []
    for src, edit, mask in zip(pair.source.frames, pair.edited.frames, masks):
        box = _mask_bbox(mask)
        if box is None:
            empty += 1
        else:
            y0, y1, x0, x1 = box
            crop = edit[y0:y1, x0:x1]
            e_img = embedder.embed_image(crop)
            if clip_score(e_img, e_tgt) > clip_score(e_img, e_src):
                wins += 1
            considered += 1
        filled_src = src.astype(np.float64).copy()
        filled_edit = edit.astype(np.float64).copy()
        filled_src[mask] = _GRAY
        filled_edit[mask] = _GRAY
        outer.append(lpips(filled_src, filled_edit, feature_provider))

    local = 100.0 * wins / considered if considered else None
    return MaskedScores(
        local_a_frame=local,
        o_lpips=float(np.mean(outer)),
        frames_without_mask=empty,
    )
