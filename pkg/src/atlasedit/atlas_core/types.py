"""Core value types for layered-atlas video decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


class ValidationError(ValueError):
    """An input violates a documented precondition or invariant."""


@dataclass(frozen=True)
class VideoClip:
    """An ordered stack of RGB frames, shape (F, H, W, 3), values in [0, 1]."""

    frames: np.ndarray
    fps: float = 24.0

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.ndim != 4 or frames.shape[-1] != 3:
            raise ValidationError(f"frames must have shape (F, H, W, 3), got {frames.shape}")
        if frames.shape[0] < 2:
            raise ValidationError(f"a clip needs at least 2 frames, got {frames.shape[0]}")
        if frames.min() < 0.0 or frames.max() > 1.0:
            raise ValidationError("frame values must lie in [0, 1]")
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.frames.shape[:3]


@dataclass(frozen=True)
class PixelLocation:
    """Integer (x, y, t) index into a video clip."""

    x: int
    y: int
    t: int

    def check_bounds(self, clip_shape: tuple[int, int, int]) -> None:
        f, h, w = clip_shape
        if not (0 <= self.x < w and 0 <= self.y < h and 0 <= self.t < f):
            raise ValidationError(
                f"pixel location {(self.x, self.y, self.t)} outside video bounds (W={w}, H={h}, F={f})"
            )


@dataclass(frozen=True)
class UVCoord:
    """Normalized atlas coordinate; sampling clamps to [-1, 1]."""

    u: float
    v: float


@dataclass
class CoordinateNetworkConfig:
    """Hyperparameters for fitting the coordinate networks.

    loss_weights keys: reconstruction, alpha_regularization, rigidity.
    """

    hidden_width: int = 64
    depth: int = 4
    positional_encoding_bands: int = 6
    atlas_encoding_bands: int = 8
    learning_rate: float = 2e-3
    iterations: int = 3000
    batch_size: int = 8192
    loss_weights: dict[str, float] = field(
        default_factory=lambda: {"reconstruction": 1.0, "alpha_regularization": 0.02, "rigidity": 0.05}
    )
    # Fraction of iterations during which the opacity head is supervised by a
    # temporal-median motion prior computed from the clip itself.
    bootstrap_fraction: float = 0.4
    atlas_resolution: int = 256
    target_psnr_db: float = 30.0
    # Opacity values within this distance of 0 or 1 snap to the endpoint when
    # the lookup tables are rasterized.
    alpha_snap: float = 0.02
    # Connected opacity blobs smaller than this many pixels per frame are
    # treated as fit noise and zeroed at rasterization.
    min_alpha_blob: int = 8

    def validate(self) -> None:
        if self.hidden_width <= 0 or self.depth <= 0 or self.positional_encoding_bands <= 0:
            raise ValidationError("network dimensions must be positive")
        if self.iterations <= 0 or self.batch_size <= 0 or self.atlas_resolution <= 0:
            raise ValidationError("iterations, batch_size and atlas_resolution must be positive")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        for key in ("reconstruction", "alpha_regularization", "rigidity"):
            if key not in self.loss_weights:
                raise ValidationError(f"loss_weights missing key {key!r}")
            if self.loss_weights[key] < 0:
                raise ValidationError(f"loss weight {key!r} must be >= 0")
        if not 0.0 <= self.bootstrap_fraction <= 1.0:
            raise ValidationError("bootstrap_fraction must lie in [0, 1]")
        if self.min_alpha_blob < 0:
            raise ValidationError("min_alpha_blob must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {
            "hidden_width": self.hidden_width,
            "depth": self.depth,
            "positional_encoding_bands": self.positional_encoding_bands,
            "atlas_encoding_bands": self.atlas_encoding_bands,
            "learning_rate": self.learning_rate,
            "iterations": self.iterations,
            "batch_size": self.batch_size,
            "loss_weights": dict(self.loss_weights),
            "bootstrap_fraction": self.bootstrap_fraction,
            "atlas_resolution": self.atlas_resolution,
            "target_psnr_db": self.target_psnr_db,
            "alpha_snap": self.alpha_snap,
            "min_alpha_blob": self.min_alpha_blob,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CoordinateNetworkConfig":
        cfg = cls(**data)
        cfg.validate()
        return cfg


@dataclass
class AtlasSet:
    """Rasterized layered-atlas decomposition of one video.

    fg_rgba / bg_rgba: (S, S, 4) float32 rasters, RGB and alpha in [0, 1].
    uv_fg / uv_bg:     (F, H, W, 2) float32 normalized coordinates in [-1, 1].
    alpha:             (F, H, W) float32 per-pixel foreground opacity.
    network_weights:   opaque named-array blob of the trained networks, kept
                       for inspection; reconstruction uses the frozen tables.
    """

    fg_rgba: np.ndarray
    bg_rgba: np.ndarray
    uv_fg: np.ndarray
    uv_bg: np.ndarray
    alpha: np.ndarray
    network_weights: dict[str, np.ndarray] = field(default_factory=dict)
    seed: int = 0
    config: Optional[CoordinateNetworkConfig] = None
    achieved_psnr_db: float = float("nan")
    converged: bool = True

    def __post_init__(self):
        fg = np.asarray(self.fg_rgba, dtype=np.float32)
        bg = np.asarray(self.bg_rgba, dtype=np.float32)
        if fg.ndim != 3 or fg.shape[-1] != 4 or fg.shape[0] != fg.shape[1]:
            raise ValidationError(f"fg_rgba must be (S, S, 4), got {fg.shape}")
        if bg.shape != fg.shape:
            raise ValidationError("bg_rgba and fg_rgba must share dims")
        uv_fg = np.asarray(self.uv_fg, dtype=np.float32)
        uv_bg = np.asarray(self.uv_bg, dtype=np.float32)
        alpha = np.asarray(self.alpha, dtype=np.float32)
        if uv_fg.ndim != 4 or uv_fg.shape[-1] != 2:
            raise ValidationError(f"uv_fg must be (F, H, W, 2), got {uv_fg.shape}")
        if uv_bg.shape != uv_fg.shape:
            raise ValidationError("uv_bg and uv_fg must share dims")
        if alpha.shape != uv_fg.shape[:3]:
            raise ValidationError("alpha must be (F, H, W) matching the uv tables")
        if alpha.min() < 0.0 or alpha.max() > 1.0:
            raise ValidationError("alpha values must lie in [0, 1]")
        self.fg_rgba = fg
        self.bg_rgba = bg
        self.uv_fg = uv_fg
        self.uv_bg = uv_bg
        self.alpha = alpha

    @property
    def resolution(self) -> int:
        return self.fg_rgba.shape[0]

    @property
    def video_shape(self) -> tuple[int, int, int]:
        return self.alpha.shape

    def layer_raster(self, layer: str) -> np.ndarray:
        if layer == "foreground":
            return self.fg_rgba
        if layer == "background":
            return self.bg_rgba
        raise ValidationError(f"unknown layer {layer!r}")

    def with_layer_raster(self, layer: str, raster: np.ndarray) -> "AtlasSet":
        """A copy of this set with one layer's raster replaced."""
        raster = np.asarray(raster, dtype=np.float32)
        if raster.shape != self.fg_rgba.shape:
            raise ValidationError(f"replacement raster shape {raster.shape} != {self.fg_rgba.shape}")
        return AtlasSet(
            fg_rgba=raster if layer == "foreground" else self.fg_rgba,
            bg_rgba=raster if layer == "background" else self.bg_rgba,
            uv_fg=self.uv_fg,
            uv_bg=self.uv_bg,
            alpha=self.alpha,
            network_weights=self.network_weights,
            seed=self.seed,
            config=self.config,
            achieved_psnr_db=self.achieved_psnr_db,
            converged=self.converged,
        )
