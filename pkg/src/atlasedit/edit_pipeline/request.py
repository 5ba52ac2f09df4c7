"""Edit request and patch containers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ..atlas_core.types import ValidationError


@dataclass(frozen=True)
class Box:
    """Half-open axis-aligned rectangle in texel coordinates."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValidationError(f"degenerate box {self}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    def within(self, height: int, width: int) -> bool:
        return 0 <= self.x0 and 0 <= self.y0 and self.x1 <= width and self.y1 <= height

    def to_dict(self) -> dict:
        return {"x0": self.x0, "y0": self.y0, "x1": self.x1, "y1": self.y1}

    @classmethod
    def from_dict(cls, d: dict) -> "Box":
        return cls(int(d["x0"]), int(d["y0"]), int(d["x1"]), int(d["y1"]))


@dataclass(frozen=True)
class EditRequest:
    source_tokens: tuple[str, ...]
    target_prompt: str
    rho: float = 1.0
    lambda_hed: float = 1.0
    seed: int = 0
    guidance_scale: float = 7.5
    use_mask: bool = True
    use_hed: bool = True
    num_samples: int = 1

    def __post_init__(self):
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        if not self.source_tokens:
            raise ValidationError("source_tokens must be non-empty")
        if not 0.0 <= self.rho <= 1.0:
            raise ValidationError(f"rho = {self.rho} outside [0, 1]")
        if self.lambda_hed < 0:
            raise ValidationError("lambda_hed must be >= 0")
        if self.guidance_scale < 1:
            raise ValidationError("guidance_scale must be >= 1")
        if self.num_samples < 1:
            raise ValidationError("num_samples must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {
            "source_tokens": list(self.source_tokens),
            "target_prompt": self.target_prompt,
            "rho": self.rho,
            "lambda_hed": self.lambda_hed,
            "seed": self.seed,
            "guidance_scale": self.guidance_scale,
            "use_mask": self.use_mask,
            "use_hed": self.use_hed,
            "num_samples": self.num_samples,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EditRequest":
        return cls(
            source_tokens=tuple(d["source_tokens"]),
            target_prompt=d["target_prompt"],
            rho=float(d.get("rho", 1.0)),
            lambda_hed=float(d.get("lambda_hed", 1.0)),
            seed=int(d.get("seed", 0)),
            guidance_scale=float(d.get("guidance_scale", 7.5)),
            use_mask=bool(d.get("use_mask", True)),
            use_hed=bool(d.get("use_hed", True)),
            num_samples=int(d.get("num_samples", 1)),
        )


@dataclass
class EditPatch:
    """The working-resolution crop a single edit operates on.

    x0 is the cropped image; mask and hed share its spatial dims. mask is
    binary {0, 1}; hed is an edge raster in [0, 1]. result holds the edited
    raster(s) once the decode has run.
    """

    bbox: Box
    x0: np.ndarray
    mask: Optional[np.ndarray] = None
    hed: Optional[np.ndarray] = None
    result: Optional[list] = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=np.float32)
        if self.x0.ndim != 3 or self.x0.shape[-1] != 3:
            raise ValidationError("patch x0 must be (H, W, 3)")
        hw = self.x0.shape[:2]
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=np.float32)
            if self.mask.shape != hw:
                raise ValidationError("mask dims must match patch dims")
            vals = np.unique(self.mask)
            if not np.all(np.isin(vals, (0.0, 1.0))):
                raise ValidationError("mask must be binary")
        if self.hed is not None:
            self.hed = np.asarray(self.hed, dtype=np.float32)
            if self.hed.shape != hw:
                raise ValidationError("hed dims must match patch dims")
            if self.hed.min() < 0 or self.hed.max() > 1:
                raise ValidationError("hed values must lie in [0, 1]")
