"""End-to-end edit: pick a layer, locate, decode, paste, composite."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import cv2
import numpy as np

from ..atlas_core import (
    AtlasSet,
    CoordinateNetworkConfig,
    VideoClip,
    composite_edit_layer,
    reconstruct_video,
    train_nla,
)
from ..imgio import save_png
from ..providers.base import ProviderSet
from ..rng import substream_seed
from .ops import (
    BBOX_PAD_FRACTION,
    WORKING_RESOLUTION,
    NotFoundError,
    blend_atlas_for_segmentation,
    edit_patch,
    locate_region,
    paste_patch,
)
from .request import Box, EditPatch, EditRequest
from .schedule import NoiseSchedule, make_schedule


@dataclass
class EditOutcome:
    """Everything a single edit produced, kept for inspection and persistence."""

    request: EditRequest
    layer: str
    bbox: Box
    atlas: AtlasSet
    edited_atlas: AtlasSet
    base: VideoClip
    edited: VideoClip
    blended_atlas: np.ndarray
    mask: np.ndarray
    hed: np.ndarray
    patch_in: np.ndarray
    patch_out: list[np.ndarray] = field(default_factory=list)
    touched_region: np.ndarray = None
    selected_sample: int = 0
    timings: dict[str, float] = field(default_factory=dict)


def _select_layer(atlas: AtlasSet, tokens, segmenter) -> tuple[str, np.ndarray, list[str]]:
    """Foreground wins when a token matches both layers."""
    labels_seen: list[str] = []
    for layer in ("foreground", "background"):
        blended = blend_atlas_for_segmentation(atlas.layer_raster(layer))
        segments = segmenter.segment(blended)
        labels = [s.label.lower() for s in segments]
        labels_seen.extend(labels)
        if any(t.lower() in labels for t in tokens):
            return layer, blended, labels_seen
    raise NotFoundError(tokens, labels_seen)


def edit_video(
    video_or_atlas: Union[VideoClip, AtlasSet],
    req: EditRequest,
    providers: ProviderSet,
    schedule: Optional[NoiseSchedule] = None,
    atlas_config: Optional[CoordinateNetworkConfig] = None,
    working_resolution: int = WORKING_RESOLUTION,
    pad_fraction: float = BBOX_PAD_FRACTION,
    selected_sample: int = 0,
) -> EditOutcome:
    """Apply a text edit to every frame through the shared atlas."""
    timings: dict[str, float] = {}
    schedule = schedule or make_schedule()

    t0 = time.perf_counter()
    if isinstance(video_or_atlas, VideoClip):
        atlas = train_nla(
            video_or_atlas,
            atlas_config or CoordinateNetworkConfig(),
            substream_seed(req.seed, "edit.decompose"),
        )
    else:
        atlas = video_or_atlas
    base = reconstruct_video(atlas)
    timings["decompose_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    layer, blended, _ = _select_layer(atlas, req.source_tokens, providers.segmenter)
    bbox, mask = locate_region(
        blended, req.source_tokens, providers.segmenter,
        pad_fraction=pad_fraction, working_resolution=working_resolution,
    )
    crop = blended[bbox.y0 : bbox.y1, bbox.x0 : bbox.x1]
    patch_in = cv2.resize(
        crop, (working_resolution, working_resolution), interpolation=cv2.INTER_LINEAR
    )
    hed = providers.edge_detector.edges(patch_in)
    timings["locate_s"] = time.perf_counter() - t0

    # The decode sees the white-blended crop: identical to the layer's own
    # RGB wherever it is opaque, and the paste only lands in RGB channels,
    # so transparent texels never reach the composite.
    patch = EditPatch(bbox=bbox, x0=patch_in, mask=mask, hed=hed)
    t0 = time.perf_counter()
    results = edit_patch(patch, req, schedule, providers)
    timings["decode_s"] = time.perf_counter() - t0

    if not 0 <= selected_sample < len(results):
        raise NotFoundError((f"sample:{selected_sample}",), [f"sample:{i}" for i in range(len(results))])
    t0 = time.perf_counter()
    edited_atlas, touched = paste_patch(atlas, results[selected_sample], bbox, layer)
    edited = composite_edit_layer(base, edited_atlas, touched, layer)
    timings["composite_s"] = time.perf_counter() - t0

    return EditOutcome(
        request=req,
        layer=layer,
        bbox=bbox,
        atlas=atlas,
        edited_atlas=edited_atlas,
        base=base,
        edited=edited,
        blended_atlas=blended,
        mask=mask,
        hed=hed,
        patch_in=patch_in,
        patch_out=list(results),
        touched_region=touched,
        selected_sample=selected_sample,
        timings=timings,
    )


def write_edit_artifacts(outcome: EditOutcome, out_dir) -> Path:
    """Persist the per-stage artifacts and the edit manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_png(out_dir / "blended_atlas.png", outcome.blended_atlas)
    save_png(out_dir / "mask.png", outcome.mask)
    save_png(out_dir / "hed.png", outcome.hed)
    save_png(out_dir / "patch_in.png", outcome.patch_in)
    for k, sample in enumerate(outcome.patch_out):
        save_png(out_dir / f"patch_out_{k}.png", sample)
    save_png(out_dir / "touched_region.png", outcome.touched_region.astype(np.float32))
    # Wall-clock timings deliberately stay out of this file: the manifest must
    # be byte-identical across same-seed reruns. Timings land in the project
    # journal instead.
    manifest = {
        "request": outcome.request.to_dict(),
        "seed": outcome.request.seed,
        "layer": outcome.layer,
        "bbox": outcome.bbox.to_dict(),
        "selected_sample": outcome.selected_sample,
        "sample_count": len(outcome.patch_out),
        "ablation": {"use_mask": outcome.request.use_mask, "use_hed": outcome.request.use_hed},
    }
    (out_dir / "edit_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out_dir
