"""Corpus evaluation: per-video rows, summary statistics, aggregate ranking.

A ScoredVideoPair bundles one edited video with its source and captions; a
corpus is a list of pairs, optionally spread across several methods so the
aggregate ranking has something to compare.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..atlas_core.types import ValidationError, VideoClip
from .masked import masked_metrics
from .semantic import (
    directional_similarity,
    frame_consistency,
    _per_video_accuracy,
    _per_video_prompt_mean,
)
from .similarity import default_feature_provider, haarpsi, lpips, psnr

MAXIMIZE = "maximize"
MINIMIZE = "minimize"

SEMANTIC_ASPECT = {"C_Prompt": MAXIMIZE, "A_Frame": MAXIMIZE, "S_Dir": MAXIMIZE}
SIMILARITY_ASPECT = {"LPIPS": MINIMIZE, "HaarPSI": MAXIMIZE, "PSNR": MAXIMIZE}


@dataclass(frozen=True)
class ScoredVideoPair:
    source: VideoClip
    edited: VideoClip
    source_caption: str
    target_caption: str
    gt_mask: Optional[np.ndarray] = None
    method: str = "default"
    name: str = ""

    def __post_init__(self):
        if self.source.shape != self.edited.shape:
            raise ValidationError(
                f"source {self.source.shape} and edited {self.edited.shape} must share dims"
            )
        if self.gt_mask is not None:
            mask = np.asarray(self.gt_mask)
            if mask.shape != self.edited.shape:
                raise ValidationError(
                    f"gt_mask shape {mask.shape} does not match frames {self.edited.shape}"
                )


def aggregate_score(
    table: Dict[str, Dict[str, float]], orientation: Dict[str, str]
) -> Dict[str, float]:
    """Ratio-to-best ranking over exactly three metrics.

    Each maximize metric contributes best/value, each minimize metric
    value/best, so every term is >= 1 and a method that wins all three
    scores exactly 3.
    """
    if len(orientation) != 3:
        raise ValidationError(f"aggregate wants exactly 3 metrics, got {len(orientation)}")
    for metric, direction in orientation.items():
        if direction not in (MAXIMIZE, MINIMIZE):
            raise ValidationError(f"unknown orientation {direction!r} for {metric!r}")
    if not table:
        raise ValidationError("aggregate needs at least one baseline")
    for baseline, scores in table.items():
        for metric in orientation:
            if metric not in scores:
                raise ValidationError(f"baseline {baseline!r} missing metric {metric!r}")
            value = scores[metric]
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(
                    f"aggregate needs positive finite values, got {metric}={value!r} for {baseline!r}"
                )

    result = {}
    for baseline, scores in table.items():
        total = 0.0
        for metric, direction in orientation.items():
            column = [table[b][metric] for b in table]
            if direction == MAXIMIZE:
                total += max(column) / scores[metric]
            else:
                total += scores[metric] / min(column)
        result[baseline] = total
    return result


@dataclass
class MetricsReport:
    per_video: List[Dict[str, Any]]
    summary: Dict[str, Dict[str, float]]
    aggregate_semantic: Optional[Dict[str, float]]
    aggregate_similarity: Optional[Dict[str, float]]
    aggregate_notes: List[str] = field(default_factory=list)
    directional_skipped_frames: int = 0
    directional_total_frames: int = 0
    psnr_peak: float = 1.0
    psnr_infinite_videos: int = 0
    wall_clock_seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_video": self.per_video,
            "summary": self.summary,
            "aggregate_semantic": self.aggregate_semantic,
            "aggregate_similarity": self.aggregate_similarity,
            "aggregate_notes": self.aggregate_notes,
            "directional_skipped_frames": self.directional_skipped_frames,
            "directional_total_frames": self.directional_total_frames,
            "psnr_peak": self.psnr_peak,
            "psnr_infinite_videos": self.psnr_infinite_videos,
            # wall_clock_seconds is deliberately absent: report.json must be
            # byte-identical across reruns. The timing goes to the journal.
        }


_ROW_COLUMNS = [
    "name",
    "method",
    "frames",
    "C_Prompt",
    "A_Frame",
    "S_Dir",
    "S_Dir_skipped",
    "C_Frame",
    "LPIPS",
    "HaarPSI",
    "PSNR",
    "PSNR_infinite",
    "local_A_Frame",
    "O_LPIPS",
]


def _score_one(pair: ScoredVideoPair, embedder, feature_provider, peak: float) -> Dict[str, Any]:
    directional = directional_similarity([pair], embedder)
    lp, hp, ps = [], [], []
    for src, edit in zip(pair.source.frames, pair.edited.frames):
        lp.append(lpips(src, edit, feature_provider))
        hp.append(haarpsi(src, edit))
        ps.append(psnr(src, edit, peak=peak))
    psnr_values = [v for v in ps if math.isfinite(v)]
    psnr_infinite = len(ps) - len(psnr_values)

    row: Dict[str, Any] = {
        "name": pair.name,
        "method": pair.method,
        "frames": pair.edited.frame_count,
        "C_Prompt": _per_video_prompt_mean(pair, embedder),
        "A_Frame": _per_video_accuracy(pair, embedder),
        "S_Dir": directional.score,
        "S_Dir_skipped": directional.skipped_frames,
        "C_Frame": frame_consistency(pair.edited, embedder),
        "LPIPS": float(np.mean(lp)),
        "HaarPSI": float(np.mean(hp)),
        "PSNR": float(np.mean(psnr_values)) if psnr_values else None,
        "PSNR_infinite": psnr_infinite > 0,
        "local_A_Frame": None,
        "O_LPIPS": None,
    }
    if pair.gt_mask is not None:
        masked = masked_metrics(pair, embedder, feature_provider)
        row["local_A_Frame"] = masked.local_a_frame
        row["O_LPIPS"] = masked.o_lpips
    return row


def _summary_stats(rows: List[Dict[str, Any]]) -> Dict[str, Dict[str, float]]:
    out = {}
    for metric in ("C_Prompt", "A_Frame", "S_Dir", "C_Frame", "LPIPS", "HaarPSI", "PSNR",
                   "local_A_Frame", "O_LPIPS"):
        values = [r[metric] for r in rows if r[metric] is not None]
        if not values:
            continue
        out[metric] = {
            "mean": float(np.mean(values)),
            "std": float(np.std(values)),
            "count": len(values),
        }
    return out


def _method_table(rows, metrics) -> Dict[str, Dict[str, float]]:
    table: Dict[str, Dict[str, float]] = {}
    for method in sorted({r["method"] for r in rows}):
        subset = [r for r in rows if r["method"] == method]
        table[method] = {}
        for metric in metrics:
            values = [r[metric] for r in subset if r[metric] is not None]
            if len(values) != len(subset):
                raise ValidationError(f"method {method!r} has videos without {metric!r}")
            table[method][metric] = float(np.mean(values))
    return table


def _try_aggregate(rows, orientation, notes: List[str], label: str):
    try:
        table = _method_table(rows, orientation.keys())
        return aggregate_score(table, orientation)
    except ValidationError as exc:
        notes.append(f"{label} aggregate unavailable: {exc}")
        return None


def evaluate_pairs(
    pairs: Sequence[ScoredVideoPair],
    embedder,
    feature_provider=None,
    psnr_peak: float = 1.0,
    workers: int = 1,
) -> MetricsReport:
    """Score every pair and assemble the corpus report.

    Metric computations are pure, so pair scoring may fan out across threads;
    row order always follows the input order.
    """
    if not pairs:
        raise ValidationError("evaluate_pairs needs at least one pair")
    if feature_provider is None:
        feature_provider = default_feature_provider()
    started = time.monotonic()

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda p: _score_one(p, embedder, feature_provider, psnr_peak), pairs))
    else:
        rows = [_score_one(p, embedder, feature_provider, psnr_peak) for p in pairs]

    for idx, row in enumerate(rows):
        if not row["name"]:
            row["name"] = f"video_{idx:03d}"

    notes: List[str] = []
    report = MetricsReport(
        per_video=rows,
        summary=_summary_stats(rows),
        aggregate_semantic=_try_aggregate(rows, SEMANTIC_ASPECT, notes, "semantic"),
        aggregate_similarity=_try_aggregate(rows, SIMILARITY_ASPECT, notes, "similarity"),
        aggregate_notes=notes,
        directional_skipped_frames=sum(r["S_Dir_skipped"] for r in rows),
        directional_total_frames=sum(r["frames"] for r in rows),
        psnr_peak=psnr_peak,
        psnr_infinite_videos=sum(1 for r in rows if r["PSNR_infinite"]),
        wall_clock_seconds=time.monotonic() - started,
    )
    return report


def write_report(report: MetricsReport, out_dir) -> Dict[str, Path]:
    """report.json plus a per-video CSV; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    csv_path = out / "per_video.csv"

    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")

    with csv_path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=_ROW_COLUMNS)
        writer.writeheader()
        for row in report.per_video:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in _ROW_COLUMNS})
    return {"json": json_path, "csv": csv_path}
