from .semantic import (
    DirectionalResult,
    clip_score,
    directional_similarity,
    frame_accuracy,
    frame_consistency,
    prompt_consistency,
)
from .similarity import StubLpipsFeatures, haarpsi, lpips, psnr
from .masked import MaskedScores, masked_metrics
from .report import (
    MetricsReport,
    ScoredVideoPair,
    aggregate_score,
    evaluate_pairs,
    write_report,
)
from .figures import render_report_figures, render_sweep_figures

__all__ = [
    "DirectionalResult",
    "clip_score",
    "directional_similarity",
    "frame_accuracy",
    "frame_consistency",
    "prompt_consistency",
    "StubLpipsFeatures",
    "haarpsi",
    "lpips",
    "psnr",
    "MaskedScores",
    "masked_metrics",
    "MetricsReport",
    "ScoredVideoPair",
    "aggregate_score",
    "evaluate_pairs",
    "write_report",
    "render_report_figures",
    "render_sweep_figures",
]
