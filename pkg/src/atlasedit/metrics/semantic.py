"""Embedding-space metrics for edit fidelity and temporal coherence.

The embedder argument is anything with embed_image(frame) and embed_text(text)
returning 1-d vectors; both the deterministic stub and the remote client
qualify. Frame arguments are float (H, W, 3) arrays in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..atlas_core.types import ValidationError


def clip_score(image_embedding: np.ndarray, text_embedding: np.ndarray) -> float:
    """max(100 * cosine, 0). Zero vectors have no direction and are rejected."""
    e_i = np.asarray(image_embedding, dtype=np.float64).ravel()
    e_c = np.asarray(text_embedding, dtype=np.float64).ravel()
    ni = float(np.linalg.norm(e_i))
    nc = float(np.linalg.norm(e_c))
    if ni == 0.0 or nc == 0.0:
        raise ValidationError("clip_score is undefined for zero embeddings")
    cos = float(np.dot(e_i, e_c)) / (ni * nc)
    return max(100.0 * cos, 0.0)


def _per_video_prompt_mean(pair, embedder) -> float:
    text = embedder.embed_text(pair.target_caption)
    scores = [clip_score(embedder.embed_image(frame), text) for frame in pair.edited.frames]
    return float(np.mean(scores))


def prompt_consistency(pairs: Sequence, embedder) -> float:
    """Mean over videos of the per-video mean frame-vs-target-caption score.

    The double mean weights every video equally regardless of length, so a
    long clip cannot drown out a short one.
    """
    if not pairs:
        raise ValidationError("prompt_consistency needs at least one video pair")
    return float(np.mean([_per_video_prompt_mean(p, embedder) for p in pairs]))


def _per_video_accuracy(pair, embedder) -> float:
    if pair.source_caption == pair.target_caption:
        raise ValidationError("frame accuracy needs distinct source and target captions")
    e_src = embedder.embed_text(pair.source_caption)
    e_tgt = embedder.embed_text(pair.target_caption)
    wins = 0
    for frame in pair.edited.frames:
        e_img = embedder.embed_image(frame)
        # Ties count against: a frame must be strictly closer to the target.
        if clip_score(e_img, e_tgt) > clip_score(e_img, e_src):
            wins += 1
    return 100.0 * wins / pair.edited.frame_count


def frame_accuracy(pairs: Sequence, embedder) -> float:
    """Percentage of edited frames strictly closer to the target caption than
    to the source caption, averaged per video and then across videos."""
    if not pairs:
        raise ValidationError("frame_accuracy needs at least one video pair")
    return float(np.mean([_per_video_accuracy(p, embedder) for p in pairs]))


@dataclass(frozen=True)
class DirectionalResult:
    """score is None when every frame was skipped for lack of a direction."""

    score: Optional[float]
    skipped_frames: int
    total_frames: int


def directional_similarity(pairs: Sequence, embedder) -> DirectionalResult:
    """100 * cosine between the image-space edit direction and the caption-space
    edit direction, per frame, averaged per video then across videos.

    No clamping: an edit moving against the caption direction reports negative.
    Frames where either direction vanishes (unedited frame, identical captions
    in embedding space) are skipped and tallied instead of polluting the mean.
    """
    if not pairs:
        raise ValidationError("directional_similarity needs at least one video pair")
    video_means = []
    skipped = 0
    total = 0
    for pair in pairs:
        d_cap = np.asarray(embedder.embed_text(pair.target_caption), dtype=np.float64) - np.asarray(
            embedder.embed_text(pair.source_caption), dtype=np.float64
        )
        frame_scores = []
        for src, edit in zip(pair.source.frames, pair.edited.frames):
            total += 1
            d_img = np.asarray(embedder.embed_image(edit), dtype=np.float64) - np.asarray(
                embedder.embed_image(src), dtype=np.float64
            )
            n_img = float(np.linalg.norm(d_img))
            n_cap = float(np.linalg.norm(d_cap))
            if n_img == 0.0 or n_cap == 0.0:
                skipped += 1
                continue
            frame_scores.append(100.0 * float(np.dot(d_img, d_cap)) / (n_img * n_cap))
        if frame_scores:
            video_means.append(float(np.mean(frame_scores)))
    score = float(np.mean(video_means)) if video_means else None
    return DirectionalResult(score=score, skipped_frames=skipped, total_frames=total)


def frame_consistency(video, embedder) -> float:
    """Mean similarity between consecutive frame embeddings."""
    if video.frame_count < 2:
        raise ValidationError("frame_consistency needs at least 2 frames")
    embeddings = [embedder.embed_image(frame) for frame in video.frames]
    scores = [clip_score(a, b) for a, b in zip(embeddings[:-1], embeddings[1:])]
    return float(np.mean(scores))
