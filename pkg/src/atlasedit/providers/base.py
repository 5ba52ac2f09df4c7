"""Provider interfaces for every learned model the pipeline consumes.

Real models (segmentation, edge detection, CLIP-style embedding, captioning,
diffusion noise prediction, latent autoencoding) live behind these seams.
The package ships analytic stubs (stubs.py) and a JSON-over-HTTP client
(remote.py); the pipeline never imports a concrete model directly.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..atlas_core.types import ValidationError

PROVIDER_KINDS = frozenset(
    {"segmenter", "edge_detector", "embedder", "captioner", "noise_predictor", "state_encoder"}
)


class ProviderError(RuntimeError):
    """A provider call failed. Carries the provider name for diagnostics."""

    def __init__(self, provider: str, detail: str):
        super().__init__(f"provider {provider!r}: {detail}")
        self.provider = provider
        self.detail = detail


@dataclass(frozen=True)
class ProviderDescriptor:
    kind: str
    name: str
    deterministic: bool
    concurrency_safe: bool
    endpoint: Optional[str] = None

    def __post_init__(self):
        if self.kind not in PROVIDER_KINDS:
            raise ValidationError(f"unknown provider kind {self.kind!r}")


@dataclass(frozen=True)
class Segment:
    label: str
    score: float
    mask: np.ndarray  # (H, W) bool

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError("segment score must lie in [0, 1]")


class Segmenter(abc.ABC):
    descriptor: ProviderDescriptor

    @abc.abstractmethod
    def segment(self, image: np.ndarray) -> list[Segment]: ...


class EdgeDetector(abc.ABC):
    descriptor: ProviderDescriptor

    @abc.abstractmethod
    def edges(self, image: np.ndarray) -> np.ndarray: ...


class Embedder(abc.ABC):
    descriptor: ProviderDescriptor
    dim: int

    @abc.abstractmethod
    def embed_image(self, image: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def embed_text(self, text: str) -> np.ndarray: ...


class Captioner(abc.ABC):
    descriptor: ProviderDescriptor

    @abc.abstractmethod
    def caption(self, frame: np.ndarray) -> str: ...


class NoisePredictor(abc.ABC):
    descriptor: ProviderDescriptor

    @abc.abstractmethod
    def predict(
        self,
        y_t: np.ndarray,
        t: int,
        c_p: str,
        c_h: Optional[np.ndarray],
        lambda_hed: float,
        guidance_scale: float,
    ) -> np.ndarray: ...


class StateEncoder(abc.ABC):
    descriptor: ProviderDescriptor
    scale: int  # spatial downsampling factor of the state space

    @abc.abstractmethod
    def encode(self, image: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def decode(self, state: np.ndarray) -> np.ndarray: ...


@dataclass
class ProviderSet:
    """The full bundle the pipeline operates with."""

    segmenter: Segmenter
    edge_detector: EdgeDetector
    embedder: Embedder
    captioner: Captioner
    noise_predictor: NoisePredictor
    state_encoder: StateEncoder

    def descriptors(self) -> list[ProviderDescriptor]:
        return [
            self.segmenter.descriptor,
            self.edge_detector.descriptor,
            self.embedder.descriptor,
            self.captioner.descriptor,
            self.noise_predictor.descriptor,
            self.state_encoder.descriptor,
        ]
