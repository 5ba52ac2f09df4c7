"""Report figures, rendered headlessly to PNG files.

pyplot is imported lazily with the Agg backend so importing the library never
touches a display.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_report_figures(report, out_dir) -> List[Path]:
    plt = _pyplot()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = report.per_video
    names = [r["name"] for r in rows]
    written = []

    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(rows)), 4))
    x = range(len(rows))
    width = 0.27
    for offset, metric in zip((-width, 0.0, width), ("C_Prompt", "A_Frame", "C_Frame")):
        values = [r[metric] if r[metric] is not None else 0.0 for r in rows]
        ax.bar([i + offset for i in x], values, width=width, label=metric)
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("score")
    ax.set_title("Semantic metrics per video")
    ax.legend()
    fig.tight_layout()
    path = out / "semantic_metrics.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(1, 3, figsize=(max(9, 2.0 * len(rows)), 3.4))
    for ax, metric in zip(axes, ("LPIPS", "HaarPSI", "PSNR")):
        values = [r[metric] for r in rows]
        plotted = [(i, v) for i, v in enumerate(values) if v is not None]
        if plotted:
            ax.bar([i for i, _ in plotted], [v for _, v in plotted])
        ax.set_xticks(list(range(len(rows))))
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
        ax.set_title(metric)
    fig.suptitle("Similarity metrics per video")
    fig.tight_layout()
    path = out / "similarity_metrics.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)

    if report.aggregate_semantic or report.aggregate_similarity:
        fig, ax = plt.subplots(figsize=(6, 4))
        methods = sorted(
            set(report.aggregate_semantic or {}) | set(report.aggregate_similarity or {})
        )
        x = range(len(methods))
        width = 0.35
        if report.aggregate_semantic:
            ax.bar(
                [i - width / 2 for i in x],
                [report.aggregate_semantic[m] for m in methods],
                width=width,
                label="semantic",
            )
        if report.aggregate_similarity:
            ax.bar(
                [i + width / 2 for i in x],
                [report.aggregate_similarity[m] for m in methods],
                width=width,
                label="similarity",
            )
        ax.axhline(3.0, color="gray", linestyle=":", linewidth=1)  # all-winner floor
        ax.set_xticks(list(x))
        ax.set_xticklabels(methods)
        ax.set_ylabel("aggregate (lower is better, 3 = wins all)")
        ax.set_title("Aggregate ranking per method")
        ax.legend()
        fig.tight_layout()
        path = out / "aggregate_scores.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written


def render_sweep_figures(rows: Sequence[Dict[str, Any]], out_dir) -> List[Path]:
    """rows: one dict per grid point with rho, lambda_hed, divergence and any
    metric columns. One curve figure per swept parameter."""
    plt = _pyplot()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for param in ("rho", "lambda_hed"):
        values = sorted({r[param] for r in rows})
        if len(values) < 2:
            continue
        fig, ax = plt.subplots(figsize=(5.5, 3.8))
        other = "lambda_hed" if param == "rho" else "rho"
        for fixed in sorted({r[other] for r in rows}):
            series = sorted(
                [(r[param], r["divergence"]) for r in rows if r[other] == fixed]
            )
            ax.plot(
                [p for p, _ in series],
                [d for _, d in series],
                marker="o",
                label=f"{other}={fixed:g}",
            )
        ax.set_xlabel(param)
        ax.set_ylabel("in-mask divergence")
        ax.set_title(f"Edit strength vs {param}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out / f"sweep_{param}.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written
