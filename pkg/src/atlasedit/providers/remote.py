"""JSON-over-HTTP clients for externally hosted models.

One endpoint per provider kind; zero retries, and a failed call is never
papered over with stub output. Endpoints come from explicit URLs or the
ATLASEDIT_PROVIDER_URL_<KIND> environment variables.
"""

from __future__ import annotations

import os
from typing import Optional

import numpy as np
import requests

from ..atlas_core.types import ValidationError
from .base import (
    Captioner,
    EdgeDetector,
    Embedder,
    NoisePredictor,
    ProviderDescriptor,
    ProviderError,
    ProviderSet,
    Segment,
    Segmenter,
    StateEncoder,
)
from .wire import decode_array, encode_array

ENV_PREFIX = "ATLASEDIT_PROVIDER_URL_"
DEFAULT_TIMEOUT = 60.0


def endpoint_from_env(kind: str) -> Optional[str]:
    return os.environ.get(ENV_PREFIX + kind.upper())


class _RemoteCall:
    def __init__(self, kind: str, base_url: str, timeout: float):
        if not base_url:
            raise ValidationError(f"remote {kind} provider needs an endpoint URL")
        self.kind = kind
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def post(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}{path}"
        name = f"remote-{self.kind}@{self.base_url}"
        try:
            resp = requests.post(url, json=payload, timeout=self.timeout)
        except requests.Timeout as exc:
            raise ProviderError(name, f"timeout after {self.timeout}s calling {url}") from exc
        except requests.RequestException as exc:
            raise ProviderError(name, f"transport failure calling {url}: {exc}") from exc
        if resp.status_code != 200:
            detail = ""
            try:
                detail = resp.json().get("detail", "")
            except Exception:
                detail = resp.text[:200]
            raise ProviderError(name, f"HTTP {resp.status_code} from {url}: {detail}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProviderError(name, f"non-JSON response from {url}") from exc


class RemoteSegmenter(Segmenter):
    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT):
        self._call = _RemoteCall("segmenter", base_url, timeout)
        self.descriptor = ProviderDescriptor(
            kind="segmenter", name="remote-segmenter", deterministic=False,
            concurrency_safe=True, endpoint=base_url,
        )

    def segment(self, image: np.ndarray) -> list[Segment]:
        out = self._call.post("/segment", {"image": encode_array(np.asarray(image, np.float32))})
        segments = []
        for item in out.get("segments", []):
            segments.append(
                Segment(
                    label=str(item["label"]),
                    score=float(item.get("score", 1.0)),
                    mask=decode_array(item["mask"]).astype(bool),
                )
            )
        return segments


class RemoteEdgeDetector(EdgeDetector):
    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT):
        self._call = _RemoteCall("edge_detector", base_url, timeout)
        self.descriptor = ProviderDescriptor(
            kind="edge_detector", name="remote-edges", deterministic=False,
            concurrency_safe=True, endpoint=base_url,
        )

    def edges(self, image: np.ndarray) -> np.ndarray:
        out = self._call.post("/edges", {"image": encode_array(np.asarray(image, np.float32))})
        return np.clip(decode_array(out["edges"]).astype(np.float32), 0.0, 1.0)


class RemoteEmbedder(Embedder):
    def __init__(self, base_url: str, dim: int = 768, timeout: float = DEFAULT_TIMEOUT):
        self._call = _RemoteCall("embedder", base_url, timeout)
        self.dim = dim
        self.descriptor = ProviderDescriptor(
            kind="embedder", name="remote-embedder", deterministic=False,
            concurrency_safe=True, endpoint=base_url,
        )

    def embed_image(self, image: np.ndarray) -> np.ndarray:
        out = self._call.post("/embed/image", {"image": encode_array(np.asarray(image, np.float32))})
        return decode_array(out["embedding"]).astype(np.float64)

    def embed_text(self, text: str) -> np.ndarray:
        out = self._call.post("/embed/text", {"text": text})
        return decode_array(out["embedding"]).astype(np.float64)


class RemoteCaptioner(Captioner):
    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT):
        self._call = _RemoteCall("captioner", base_url, timeout)
        self.descriptor = ProviderDescriptor(
            kind="captioner", name="remote-captioner", deterministic=False,
            concurrency_safe=True, endpoint=base_url,
        )

    def caption(self, frame: np.ndarray) -> str:
        out = self._call.post("/caption", {"image": encode_array(np.asarray(frame, np.float32))})
        return str(out["caption"])


class RemoteNoisePredictor(NoisePredictor):
    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT):
        self._call = _RemoteCall("noise_predictor", base_url, timeout)
        self.descriptor = ProviderDescriptor(
            kind="noise_predictor", name="remote-diffusion", deterministic=False,
            concurrency_safe=False, endpoint=base_url,
        )

    def predict(self, y_t, t, c_p, c_h, lambda_hed, guidance_scale):
        payload = {
            "state": encode_array(np.asarray(y_t, np.float64)),
            "t": int(t),
            "prompt": c_p or "",
            "lambda_hed": float(lambda_hed),
            "guidance_scale": float(guidance_scale),
        }
        if c_h is not None:
            payload["edges"] = encode_array(np.asarray(c_h, np.float32))
        out = self._call.post("/predict_noise", payload)
        return decode_array(out["epsilon"]).astype(np.float64)


class RemoteStateEncoder(StateEncoder):
    def __init__(self, base_url: str, scale: int = 8, timeout: float = DEFAULT_TIMEOUT):
        self._call = _RemoteCall("state_encoder", base_url, timeout)
        self.scale = scale
        self.descriptor = ProviderDescriptor(
            kind="state_encoder", name="remote-autoencoder", deterministic=False,
            concurrency_safe=True, endpoint=base_url,
        )

    def encode(self, image: np.ndarray) -> np.ndarray:
        out = self._call.post("/encode", {"image": encode_array(np.asarray(image, np.float32))})
        return decode_array(out["state"]).astype(np.float64)

    def decode(self, state: np.ndarray) -> np.ndarray:
        out = self._call.post("/decode", {"state": encode_array(np.asarray(state, np.float64))})
        return decode_array(out["image"]).astype(np.float32)


def remote_provider_set(urls: Optional[dict] = None, timeout: float = DEFAULT_TIMEOUT) -> ProviderSet:
    """Build a fully remote bundle; URLs fall back to the environment."""
    urls = dict(urls or {})

    def url_for(kind: str) -> str:
        u = urls.get(kind) or endpoint_from_env(kind)
        if not u:
            raise ValidationError(
                f"no endpoint for remote {kind} (set {ENV_PREFIX}{kind.upper()})"
            )
        return u

    return ProviderSet(
        segmenter=RemoteSegmenter(url_for("segmenter"), timeout),
        edge_detector=RemoteEdgeDetector(url_for("edge_detector"), timeout),
        embedder=RemoteEmbedder(url_for("embedder"), timeout=timeout),
        captioner=RemoteCaptioner(url_for("captioner"), timeout),
        noise_predictor=RemoteNoisePredictor(url_for("noise_predictor"), timeout),
        state_encoder=RemoteStateEncoder(url_for("state_encoder"), timeout=timeout),
    )
