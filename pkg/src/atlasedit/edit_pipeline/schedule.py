"""Diffusion noise schedule and its subsampled inference index map."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..atlas_core.types import ValidationError


@dataclass(frozen=True)
class NoiseSchedule:
    """Cumulative signal levels for the canonical training grid.

    alpha_bar has T_train+1 entries; alpha_bar[0] is exactly 1 (clean data).
    inference_map has N_infer+1 strictly increasing entries into
    [0, T_train]; entry 0 is timestep 0 so that a zero noising ratio is the
    identity. Inference-map index i corresponds to the i-th denoising state.
    """

    alpha_bar: np.ndarray
    inference_map: np.ndarray

    def __post_init__(self):
        ab = np.asarray(self.alpha_bar, dtype=np.float64)
        im = np.asarray(self.inference_map, dtype=np.int64)
        object.__setattr__(self, "alpha_bar", ab)
        object.__setattr__(self, "inference_map", im)
        if ab.ndim != 1 or ab.size < 2:
            raise ValidationError("alpha_bar must be a 1-d sequence of length >= 2")
        if np.any(np.diff(ab) >= 0):
            raise ValidationError("alpha_bar must be strictly decreasing")
        if ab[0] < 0.999:
            raise ValidationError(f"alpha_bar[0] = {ab[0]} but must be >= 0.999")
        if ab[-1] > 0.01:
            raise ValidationError(f"alpha_bar[-1] = {ab[-1]} but must be <= 0.01")
        if im.ndim != 1 or im.size < 2:
            raise ValidationError("inference map must have at least 2 entries")
        if np.any(np.diff(im) <= 0):
            raise ValidationError("inference map must be strictly increasing")
        if im[0] < 0 or im[-1] > self.t_train:
            raise ValidationError("inference map must lie within [0, T_train]")

    @property
    def t_train(self) -> int:
        return self.alpha_bar.size - 1

    @property
    def n_infer(self) -> int:
        return self.inference_map.size - 1

    def alpha_bar_at(self, index: int) -> float:
        """Cumulative signal level at inference-map position ``index``."""
        if not 0 <= index <= self.n_infer:
            raise ValidationError(f"inference index {index} outside [0, {self.n_infer}]")
        return float(self.alpha_bar[self.inference_map[index]])

    def timestep_at(self, index: int) -> int:
        """Canonical training timestep at inference-map position ``index``."""
        if not 0 <= index <= self.n_infer:
            raise ValidationError(f"inference index {index} outside [0, {self.n_infer}]")
        return int(self.inference_map[index])


def make_schedule(
    t_train: int = 1000,
    n_infer: int = 50,
    beta_start: float = 1e-4,
    beta_end: float = 2e-2,
) -> NoiseSchedule:
    """Linear-in-beta schedule with an evenly spaced inference map."""
    if t_train < 1 or n_infer < 1:
        raise ValidationError("t_train and n_infer must be positive")
    if n_infer > t_train:
        raise ValidationError("n_infer cannot exceed t_train")
    beta = np.linspace(beta_start, beta_end, t_train, dtype=np.float64)
    alpha_bar = np.concatenate([[1.0], np.cumprod(1.0 - beta)])
    inference_map = np.round(np.linspace(0, t_train, n_infer + 1)).astype(np.int64)
    return NoiseSchedule(alpha_bar=alpha_bar, inference_map=inference_map)
