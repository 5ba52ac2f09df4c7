"""Command-line surface.

Exit codes: 0 success, 2 usage or input error, 3 domain error (no matching
segment, non-convergence), 4 provider or transport error.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import json
import socket
import sys
import time
from pathlib import Path

import click
import numpy as np

from ..atlas_core.container import load_atlas, save_atlas
from ..atlas_core.training import train_nla
from ..atlas_core.types import ValidationError
from ..edit_pipeline.ops import NotFoundError
from ..edit_pipeline.orchestrate import edit_video, write_edit_artifacts
from ..edit_pipeline.request import EditRequest
from ..imgio import load_frames, load_png, save_frames
from ..metrics import (
    ScoredVideoPair,
    evaluate_pairs,
    render_report_figures,
    render_sweep_figures,
    write_report,
)
from ..metrics.similarity import default_feature_provider, haarpsi, lpips, psnr
from ..providers.base import ProviderError
from .config import PipelineConfig, resolve_provider_set
from .manifest import ProjectJournal

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_PROVIDER = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _mapped_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NotFoundError as exc:
            _fail(EXIT_DOMAIN, str(exc))
        except ProviderError as exc:
            _fail(EXIT_PROVIDER, str(exc))
        except ValidationError as exc:
            _fail(EXIT_INPUT, str(exc))
        except (FileNotFoundError, NotADirectoryError, IsADirectoryError) as exc:
            _fail(EXIT_INPUT, str(exc))

    return wrapper


def _load_config(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_file(path)


@click.group()
@click.version_option(package_name="atlasedit")
def main():
    """Layered-atlas video editing: decompose, edit, evaluate, sweep, serve."""


@main.command()
@click.argument("video_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@_mapped_errors
def decompose(video_dir, out_dir, config_path, seed):
    """Fit the layered atlases for a frames directory and write the container."""
    cfg = _load_config(config_path)
    clip = load_frames(video_dir, fps=cfg.fps)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    atlas = train_nla(clip, cfg.atlas, rng_seed=seed)
    elapsed = time.monotonic() - started
    container = out / "atlas.npz"
    save_atlas(atlas, container)
    journal = ProjectJournal(out)
    journal.append(
        "decompose",
        video_dir=str(video_dir),
        container=str(container),
        seed=seed,
        psnr_db=round(atlas.achieved_psnr_db, 4),
        converged=atlas.converged,
        config=cfg.to_dict(),
        wall_clock_seconds=round(elapsed, 3),
    )
    click.echo(
        f"wrote {container} (PSNR {atlas.achieved_psnr_db:.2f} dB, "
        f"{'converged' if atlas.converged else 'NOT converged'}, {elapsed:.1f}s)"
    )
    if not atlas.converged:
        _fail(EXIT_DOMAIN, f"reconstruction PSNR {atlas.achieved_psnr_db:.2f} dB below target")


def _load_request(path, seed, samples, no_mask, no_hed) -> EditRequest:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"request file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"request file {path} is not valid JSON: {exc}")
    if seed is not None:
        data["seed"] = seed
    if samples is not None:
        data["num_samples"] = samples
    if no_mask:
        data["use_mask"] = False
    if no_hed:
        data["use_hed"] = False
    return EditRequest.from_dict(data)


@main.command()
@click.argument("atlas_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--request", "request_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--providers", "providers_kind", type=click.Choice(["stub", "remote"]), default="stub", show_default=True)
@click.option("--seed", type=int, default=None, help="Override the request seed.")
@click.option("--samples", type=int, default=None, help="Override the sample count.")
@click.option("--no-mask", is_flag=True, help="Ablation: drop per-step mask blending.")
@click.option("--no-hed", is_flag=True, help="Ablation: drop edge conditioning.")
@click.option("--select", "selected", type=int, default=0, show_default=True, help="Sample pasted into the video.")
@_mapped_errors
def edit(atlas_path, request_path, out_dir, config_path, providers_kind, seed, samples, no_mask, no_hed, selected):
    """Run one text-driven edit against a decomposed atlas."""
    cfg = _load_config(config_path)
    atlas = load_atlas(atlas_path)
    req = _load_request(request_path, seed, samples, no_mask, no_hed)
    schedule = cfg.schedule()
    providers = resolve_provider_set(providers_kind, seed=req.seed, schedule=schedule)
    out = Path(out_dir)

    started = time.monotonic()
    outcome = edit_video(
        atlas,
        req,
        providers,
        schedule=schedule,
        working_resolution=cfg.working_resolution,
        pad_fraction=cfg.pad_fraction,
        selected_sample=selected,
    )
    write_edit_artifacts(outcome, out)
    save_frames(outcome.edited.frames, out / "frames")
    elapsed = time.monotonic() - started

    journal = ProjectJournal(out)
    journal.append(
        "edit",
        atlas=str(atlas_path),
        request=req.to_dict(),
        layer=outcome.layer,
        bbox=outcome.bbox.to_dict(),
        providers=providers_kind,
        selected_sample=outcome.selected_sample,
        timings={k: round(v, 6) for k, v in outcome.timings.items()},
        wall_clock_seconds=round(elapsed, 3),
    )
    click.echo(
        f"edited layer {outcome.layer!r} in bbox {outcome.bbox.to_dict()} "
        f"({req.num_samples} sample(s), {elapsed:.1f}s) -> {out}"
    )


def _load_mask_dir(mask_dir, expected_shape):
    mask_dir = Path(mask_dir)
    files = sorted(mask_dir.glob("*.png"))
    if len(files) != expected_shape[0]:
        raise ValidationError(
            f"mask dir {mask_dir} has {len(files)} frames, video has {expected_shape[0]}"
        )
    masks = []
    for f in files:
        img = load_png(f)
        if img.ndim == 3:
            img = img.mean(axis=-1)
        if img.shape != expected_shape[1:]:
            raise ValidationError(f"mask {f} shape {img.shape} != frame {expected_shape[1:]}")
        masks.append(img > 0.5)
    return np.stack(masks)


def _load_pair(entry: dict, fps: float) -> ScoredVideoPair:
    for key in ("source", "edited", "source_caption", "target_caption"):
        if key not in entry:
            raise ValidationError(f"pair entry missing {key!r}")
    source = load_frames(entry["source"], fps=fps)
    edited = load_frames(entry["edited"], fps=fps)
    if source.shape != edited.shape:
        raise ValidationError(
            f"source {source.shape} and edited {edited.shape} frame stacks disagree"
        )
    gt_mask = None
    if entry.get("mask"):
        gt_mask = _load_mask_dir(entry["mask"], edited.shape)
    return ScoredVideoPair(
        source=source,
        edited=edited,
        source_caption=entry["source_caption"],
        target_caption=entry["target_caption"],
        gt_mask=gt_mask,
        method=entry.get("method", "default"),
        name=entry.get("name", ""),
    )


@main.command()
@click.option("--pairs", "pairs_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--providers", "providers_kind", type=click.Choice(["stub", "remote"]), default="stub", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_mapped_errors
def evaluate(pairs_path, out_dir, config_path, providers_kind, seed):
    """Score edited videos against sources and captions; write JSON/CSV/figures."""
    cfg = _load_config(config_path)
    try:
        spec = json.loads(Path(pairs_path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"pairs file not found: {pairs_path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"pairs file {pairs_path} is not valid JSON: {exc}")
    entries = spec["pairs"] if isinstance(spec, dict) else spec
    if not isinstance(entries, list) or not entries:
        raise ValidationError("pairs file must list at least one pair")

    pairs = []
    errors = []
    for idx, entry in enumerate(entries):
        label = entry.get("name") or f"pair_{idx:03d}"
        try:
            pairs.append(_load_pair(entry, cfg.fps))
        except (ValidationError, FileNotFoundError) as exc:
            errors.append({"name": label, "error": str(exc)})

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if errors:
        (out / "errors.json").write_text(json.dumps(errors, indent=2, sort_keys=True) + "\n")
        for item in errors:
            click.echo(f"skipped {item['name']}: {item['error']}", err=True)
    if not pairs:
        _fail(EXIT_INPUT, "every pair failed to load")

    providers = resolve_provider_set(providers_kind, seed=seed)
    report = evaluate_pairs(
        pairs,
        providers.embedder,
        feature_provider=default_feature_provider(),
        psnr_peak=cfg.psnr_peak,
        workers=cfg.metric_workers,
    )
    paths = write_report(report, out)
    figures = render_report_figures(report, out)
    ProjectJournal(out).append(
        "evaluate",
        pairs=str(pairs_path),
        scored=len(pairs),
        failed=len(errors),
        report=str(paths["json"]),
        wall_clock_seconds=round(report.wall_clock_seconds, 3),
    )
    click.echo(f"scored {len(pairs)} pair(s) -> {paths['json']}")
    for note in report.aggregate_notes:
        click.echo(f"note: {note}")
    for fig in figures:
        click.echo(f"figure: {fig}")


def _parse_grid(text):
    if text is None:
        return None
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise ValidationError(f"could not parse grid {text!r}; expected comma-separated numbers")
    if not values:
        raise ValidationError(f"grid {text!r} is empty")
    return values


@main.command()
@click.argument("atlas_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--request", "request_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--providers", "providers_kind", type=click.Choice(["stub", "remote"]), default="stub", show_default=True)
@click.option("--rho", "rho_grid", default=None, help="Comma-separated noising ratios.")
@click.option("--lam", "lam_grid", default=None, help="Comma-separated edge strengths.")
@click.option("--seed", type=int, default=None, help="Override the request seed.")
@_mapped_errors
def sweep(atlas_path, request_path, out_dir, config_path, providers_kind, rho_grid, lam_grid, seed):
    """Re-run one edit over a rho/lambda grid and chart the divergence."""
    cfg = _load_config(config_path)
    atlas = load_atlas(atlas_path)
    base_req = _load_request(request_path, seed, None, False, False)
    rhos = _parse_grid(rho_grid)
    lams = _parse_grid(lam_grid)
    if rhos is None and lams is None:
        raise ValidationError("sweep needs --rho and/or --lam")
    rhos = rhos if rhos is not None else [base_req.rho]
    lams = lams if lams is not None else [base_req.lambda_hed]

    schedule = cfg.schedule()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    features = default_feature_provider()
    rows = []
    started = time.monotonic()
    for idx, (rho, lam) in enumerate(itertools.product(rhos, lams)):
        req = dataclasses.replace(base_req, rho=rho, lambda_hed=lam)
        providers = resolve_provider_set(providers_kind, seed=req.seed, schedule=schedule)
        outcome = edit_video(
            atlas,
            req,
            providers,
            schedule=schedule,
            working_resolution=cfg.working_resolution,
            pad_fraction=cfg.pad_fraction,
        )
        point_dir = out / "points" / f"{idx:03d}"
        write_edit_artifacts(outcome, point_dir)
        result = outcome.patch_out[outcome.selected_sample].astype(np.float64)
        original = outcome.patch_in.astype(np.float64)
        inside = outcome.mask > 0.5
        if inside.any():
            divergence = float(np.sqrt(np.mean((result[inside] - original[inside]) ** 2)))
        else:
            divergence = 0.0
        rows.append(
            {
                "point": idx,
                "rho": rho,
                "lambda_hed": lam,
                "divergence": divergence,
                "patch_psnr": psnr(original, result, peak=cfg.psnr_peak),
                "patch_haarpsi": haarpsi(original, result),
                "patch_lpips": lpips(original, result, features),
                "dir": str(point_dir),
            }
        )
    elapsed = time.monotonic() - started

    serializable = [
        {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in r.items()}
        for r in rows
    ]
    (out / "sweep.json").write_text(json.dumps(serializable, indent=2, sort_keys=True) + "\n")
    with (out / "sweep.csv").open("w") as handle:
        cols = ["point", "rho", "lambda_hed", "divergence", "patch_psnr", "patch_haarpsi", "patch_lpips"]
        handle.write(",".join(cols) + "\n")
        for r in rows:
            handle.write(",".join(str(r[c]) for c in cols) + "\n")
    figures = render_sweep_figures(rows, out)
    ProjectJournal(out).append(
        "sweep",
        atlas=str(atlas_path),
        request=base_req.to_dict(),
        grid={"rho": rhos, "lambda_hed": lams},
        points=len(rows),
        wall_clock_seconds=round(elapsed, 3),
    )
    click.echo(f"swept {len(rows)} point(s) -> {out / 'sweep.json'}")
    for fig in figures:
        click.echo(f"figure: {fig}")


@main.command()
@click.argument("project_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--port", type=int, default=8799, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--providers", "providers_kind", type=click.Choice(["stub", "remote"]), default="stub", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_mapped_errors
def serve(project_dir, port, host, config_path, providers_kind, seed):
    """Serve the studio HTTP API for a decomposed project."""
    import uvicorn

    from .serve import ServeProject, create_app

    cfg = _load_config(config_path)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError:
        _fail(EXIT_INPUT, f"port {port} on {host} is busy")
    finally:
        probe.close()

    project = ServeProject.open(
        project_dir,
        config=cfg,
        providers_kind=providers_kind,
        seed=seed,
    )
    app = create_app(project)
    click.echo(f"serving {project_dir} on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
