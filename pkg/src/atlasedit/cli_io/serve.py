"""Studio HTTP API.

One decomposed project per process. Edits run as jobs on a single worker
thread: the pipeline holds no per-request state, but providers are not
promised concurrency-safe, so job execution is serialized. Every mutation
lands in the project journal.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, Response

from ..atlas_core.container import load_atlas, sidecar_path
from ..atlas_core.sampling import composite_edit_layer, reconstruct_video
from ..atlas_core.types import AtlasSet, ValidationError, VideoClip
from ..edit_pipeline.ops import NotFoundError, blend_atlas_for_segmentation, paste_patch
from ..edit_pipeline.orchestrate import EditOutcome, edit_video, write_edit_artifacts
from ..edit_pipeline.request import EditRequest
from ..imgio import png_bytes, save_frames
from ..providers.base import ProviderError
from ..providers.wire import encode_array
from .config import PipelineConfig, resolve_provider_set
from .manifest import ProjectJournal

_ARTIFACT_NAMES = {
    "blended_atlas.png",
    "mask.png",
    "hed.png",
    "patch_in.png",
    "touched_region.png",
    "edit_manifest.json",
}


@dataclass
class Job:
    id: str
    request: EditRequest
    status: str = "queued"  # queued | running | done | error
    error: Optional[str] = None
    outcome: Optional[EditOutcome] = None
    dir: Optional[Path] = None
    accepted_sample: Optional[int] = None
    edited_full: Optional[VideoClip] = None
    idempotency_key: Optional[str] = None

    def summary(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "id": self.id,
            "status": self.status,
            "request": self.request.to_dict(),
            "accepted_sample": self.accepted_sample,
        }
        if self.error is not None:
            out["error"] = self.error
        if self.outcome is not None:
            out["layer"] = self.outcome.layer
            out["bbox"] = self.outcome.bbox.to_dict()
            out["sample_count"] = len(self.outcome.patch_out)
            out["samples"] = [
                f"/edits/{self.id}/artifacts/patch_out_{k}.png"
                for k in range(len(self.outcome.patch_out))
            ]
            out["artifacts"] = {
                name: f"/edits/{self.id}/artifacts/{name}" for name in sorted(_ARTIFACT_NAMES)
            }
        return out


class ServeProject:
    """Everything the API serves: atlas, base reconstruction, jobs, journal."""

    def __init__(self, project_dir, atlas: AtlasSet, config: PipelineConfig,
                 providers_kind: str, seed: int):
        self.project_dir = Path(project_dir)
        self.atlas = atlas
        self.config = config
        self.providers_kind = providers_kind
        self.seed = seed
        self.schedule = config.schedule()
        self.base = reconstruct_video(atlas)
        self.journal = ProjectJournal(self.project_dir)
        self.jobs: Dict[str, Job] = {}
        self._by_key: Dict[str, str] = {}
        self._lock = threading.Lock()
        self._counter = 0
        self._pool = ThreadPoolExecutor(max_workers=1)

    @classmethod
    def open(cls, project_dir, config: PipelineConfig, providers_kind: str = "stub",
             seed: int = 0) -> "ServeProject":
        project_dir = Path(project_dir)
        container = project_dir / "atlas.npz"
        if not container.exists():
            raise ValidationError(f"project {project_dir} has no atlas.npz; run decompose first")
        atlas = load_atlas(container)
        return cls(project_dir, atlas, config, providers_kind, seed)

    def providers(self, seed: int):
        return resolve_provider_set(self.providers_kind, seed=seed, schedule=self.schedule)

    def project_info(self) -> Dict[str, Any]:
        sidecar = sidecar_path(self.project_dir / "atlas.npz")
        descriptors = [d.__dict__ for d in self.providers(self.seed).descriptors()]
        with self._lock:
            edits = [self.jobs[jid].summary() for jid in sorted(self.jobs)]
        return {
            "project_dir": str(self.project_dir),
            "frame_count": self.base.frame_count,
            "height": self.base.height,
            "width": self.base.width,
            "atlas_resolution": self.atlas.resolution,
            "psnr_db": self.atlas.achieved_psnr_db,
            "converged": self.atlas.converged,
            "layers": ["foreground", "background"],
            "providers": descriptors,
            "edits": edits,
            "config": self.config.to_dict(),
            "sidecar": str(sidecar) if sidecar.exists() else None,
        }

    def blended(self, layer: str) -> np.ndarray:
        return blend_atlas_for_segmentation(self.atlas.layer_raster(layer))

    def segment_preview(self, layer: str, token: Optional[str], point) -> Dict[str, Any]:
        blended = self.blended(layer)
        segments = self.providers(self.seed).segmenter.segment(blended)
        labels = sorted({s.label for s in segments})
        matches = []
        if token is not None:
            matches = [s for s in segments if s.label.lower() == token.lower()]
        elif point is not None:
            x, y = int(point["x"]), int(point["y"])
            size = blended.shape[0]
            if not (0 <= x < size and 0 <= y < size):
                raise ValidationError(f"point ({x}, {y}) outside the {size}x{size} atlas")
            matches = [s for s in segments if s.mask[y, x]]
        else:
            raise ValidationError("segment preview needs a token or a point")
        if not matches:
            return {"found": False, "labels": labels}
        union = np.zeros(blended.shape[:2], dtype=bool)
        for s in matches:
            union |= s.mask
        ys, xs = np.nonzero(union)
        bbox = {
            "x0": int(xs.min()), "y0": int(ys.min()),
            "x1": int(xs.max()) + 1, "y1": int(ys.max()) + 1,
        }
        return {
            "found": True,
            "labels": labels,
            "matched": sorted({s.label for s in matches}),
            "bbox": bbox,
            "mask": encode_array(union),
        }

    def submit(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        if "request" not in payload:
            raise ValidationError("body must carry a 'request' object")
        req = EditRequest.from_dict(payload["request"])
        key = payload.get("idempotency_key")
        with self._lock:
            if key is not None and key in self._by_key:
                return {"job_id": self._by_key[key], "duplicate": True}
            self._counter += 1
            job_id = f"edit-{self._counter:04d}"
            job = Job(id=job_id, request=req, idempotency_key=key,
                      dir=self.project_dir / "edits" / job_id)
            self.jobs[job_id] = job
            if key is not None:
                self._by_key[key] = job_id
        self.journal.append("edit_submitted", job=job_id, request=req.to_dict(),
                            idempotency_key=key)
        self._pool.submit(self._run, job)
        return {"job_id": job_id, "duplicate": False}

    def _run(self, job: Job) -> None:
        job.status = "running"
        try:
            providers = self.providers(job.request.seed)
            outcome = edit_video(
                self.atlas,
                job.request,
                providers,
                schedule=self.schedule,
                working_resolution=self.config.working_resolution,
                pad_fraction=self.config.pad_fraction,
            )
            write_edit_artifacts(outcome, job.dir)
            job.outcome = outcome
            job.status = "done"
            self.journal.append(
                "edit_done", job=job.id, layer=outcome.layer, bbox=outcome.bbox.to_dict(),
                timings={k: round(v, 6) for k, v in outcome.timings.items()},
            )
        except (ValidationError, NotFoundError, ProviderError) as exc:
            job.status = "error"
            job.error = str(exc)
            self.journal.append("edit_failed", job=job.id, error=job.error)

    def accept(self, job_id: str, sample: int) -> Dict[str, Any]:
        job = self.get_job(job_id)
        if job.status != "done" or job.outcome is None:
            raise ValidationError(f"job {job_id} is {job.status}, not done")
        outcome = job.outcome
        if not 0 <= sample < len(outcome.patch_out):
            raise ValidationError(
                f"sample {sample} out of range 0..{len(outcome.patch_out) - 1}"
            )
        edited_atlas, touched = paste_patch(
            self.atlas, outcome.patch_out[sample], outcome.bbox, outcome.layer
        )
        edited = composite_edit_layer(self.base, edited_atlas, touched, outcome.layer)
        frames_dir = job.dir / "frames"
        save_frames(edited.frames, frames_dir)
        job.accepted_sample = sample
        job.edited_full = edited
        self.journal.append("edit_accepted", job=job_id, sample=sample,
                            frames=str(frames_dir))
        return {
            "job_id": job_id,
            "sample": sample,
            "frame_count": edited.frame_count,
            "frames": [f"/frames/{k}?variant=edited&edit={job_id}" for k in range(edited.frame_count)],
        }

    def get_job(self, job_id: str) -> Job:
        with self._lock:
            if job_id not in self.jobs:
                raise NotFoundError((job_id,), list(self.jobs))
            return self.jobs[job_id]


def create_app(project: ServeProject) -> FastAPI:
    app = FastAPI(title="atlasedit studio", docs_url=None, redoc_url=None)

    @app.exception_handler(ValidationError)
    async def _validation(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(NotFoundError)
    async def _not_found(request, exc):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ProviderError)
    async def _provider(request, exc):
        return JSONResponse(status_code=502, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/project")
    def project_info():
        return project.project_info()

    @app.get("/atlas/{layer}")
    def atlas_png(layer: str):
        if layer not in ("foreground", "background"):
            raise NotFoundError((layer,), ["foreground", "background"])
        return Response(content=png_bytes(project.blended(layer)), media_type="image/png")

    @app.post("/segment")
    def segment(payload: Dict[str, Any] = Body(...)):
        layer = payload.get("layer", "foreground")
        if layer not in ("foreground", "background"):
            raise ValidationError(f"unknown layer {layer!r}")
        return project.segment_preview(layer, payload.get("token"), payload.get("point"))

    @app.post("/edits", status_code=202)
    def submit_edit(payload: Dict[str, Any] = Body(...)):
        return project.submit(payload)

    @app.get("/edits")
    def list_edits():
        with project._lock:
            return [project.jobs[jid].summary() for jid in sorted(project.jobs)]

    @app.get("/edits/{job_id}")
    def edit_status(job_id: str):
        return project.get_job(job_id).summary()

    @app.get("/edits/{job_id}/artifacts/{name}")
    def edit_artifact(job_id: str, name: str):
        job = project.get_job(job_id)
        if job.dir is None or "/" in name or "\\" in name or name.startswith("."):
            raise NotFoundError((name,), [])
        path = job.dir / name
        if not path.exists():
            raise NotFoundError((name,), [p.name for p in job.dir.glob("*") if p.is_file()])
        media = "image/png" if name.endswith(".png") else "application/json"
        return Response(content=path.read_bytes(), media_type=media)

    @app.post("/edits/{job_id}/accept")
    def accept_edit(job_id: str, payload: Dict[str, Any] = Body(default={})):
        sample = int(payload.get("sample", 0))
        return project.accept(job_id, sample)

    @app.get("/frames/{k}")
    def frame_png(k: int, variant: str = "original", edit: Optional[str] = None):
        if variant == "original":
            clip = project.base
        elif variant == "edited":
            if edit is None:
                raise ValidationError("variant=edited needs an edit=<job id> parameter")
            job = project.get_job(edit)
            if job.edited_full is None:
                raise ValidationError(f"job {edit} has no accepted composite yet")
            clip = job.edited_full
        else:
            raise ValidationError(f"unknown variant {variant!r}")
        if not 0 <= k < clip.frame_count:
            raise NotFoundError((str(k),), [str(i) for i in range(clip.frame_count)])
        return Response(content=png_bytes(clip.frames[k]), media_type="image/png")

    return app
