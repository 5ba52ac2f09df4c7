"""Run configuration: one JSON file covering fitting, diffusion and metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ..atlas_core.types import CoordinateNetworkConfig, ValidationError
from ..edit_pipeline.schedule import NoiseSchedule, make_schedule
from ..providers import ProviderSet, remote_provider_set, stub_provider_set


@dataclass
class PipelineConfig:
    atlas: CoordinateNetworkConfig = field(default_factory=CoordinateNetworkConfig)
    t_train: int = 1000
    n_infer: int = 50
    beta_start: float = 1e-4
    beta_end: float = 2e-2
    working_resolution: int = 512
    pad_fraction: float = 0.1
    fps: float = 24.0
    psnr_peak: float = 1.0
    metric_workers: int = 1

    def validate(self) -> None:
        self.atlas.validate()
        if self.t_train <= 0 or self.n_infer <= 0:
            raise ValidationError("t_train and n_infer must be positive")
        if self.working_resolution <= 0:
            raise ValidationError("working_resolution must be positive")
        if not 0.0 <= self.pad_fraction <= 1.0:
            raise ValidationError("pad_fraction must lie in [0, 1]")
        if self.metric_workers < 1:
            raise ValidationError("metric_workers must be >= 1")

    def schedule(self) -> NoiseSchedule:
        return make_schedule(
            t_train=self.t_train,
            n_infer=self.n_infer,
            beta_start=self.beta_start,
            beta_end=self.beta_end,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "atlas": self.atlas.to_dict(),
            "t_train": self.t_train,
            "n_infer": self.n_infer,
            "beta_start": self.beta_start,
            "beta_end": self.beta_end,
            "working_resolution": self.working_resolution,
            "pad_fraction": self.pad_fraction,
            "fps": self.fps,
            "psnr_peak": self.psnr_peak,
            "metric_workers": self.metric_workers,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PipelineConfig":
        data = dict(data)
        atlas = data.pop("atlas", None)
        cfg = cls(**data)
        if atlas is not None:
            cfg.atlas = CoordinateNetworkConfig.from_dict(atlas)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ValidationError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise ValidationError(f"config file {path} must hold a JSON object")
        try:
            return cls.from_dict(data)
        except TypeError as exc:
            raise ValidationError(f"config file {path}: {exc}")

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def resolve_provider_set(
    kind: str,
    seed: int,
    schedule: Optional[NoiseSchedule] = None,
    timeout: float = 60.0,
) -> ProviderSet:
    """kind is the CLI-facing choice: deterministic stubs or remote services
    configured through ATLASEDIT_PROVIDER_URL_* variables."""
    if kind == "stub":
        return stub_provider_set(seed=seed, schedule=schedule)
    if kind == "remote":
        return remote_provider_set(timeout=timeout)
    raise ValidationError(f"unknown provider kind {kind!r}; expected 'stub' or 'remote'")
