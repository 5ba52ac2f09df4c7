"""Analytic, deterministic provider stubs.

These stand in for the real models so every pipeline equation and metric is
testable (and demoable via ``--providers stub``) without any weights. Each
stub is exactly reproducible: same inputs, same bytes out.
"""

from __future__ import annotations

import hashlib
import re
from typing import Optional

import numpy as np
import scipy.ndimage as ndi

from ..rng import substream
from ..atlas_core.types import ValidationError
from .base import (
    Captioner,
    EdgeDetector,
    Embedder,
    NoisePredictor,
    ProviderDescriptor,
    ProviderSet,
    Segment,
    Segmenter,
    StateEncoder,
)

# Object colors become segment labels; background colors are classified but
# never emitted as segments (so a blank image yields no segments).
OBJECT_COLORS = {
    "red": (0.85, 0.08, 0.08),
    "green": (0.10, 0.75, 0.10),
    "blue": (0.10, 0.10, 0.85),
    "yellow": (0.90, 0.85, 0.10),
    "magenta": (0.85, 0.10, 0.80),
    "cyan": (0.10, 0.80, 0.85),
}
BACKGROUND_COLORS = {
    "white": (1.0, 1.0, 1.0),
    "black": (0.0, 0.0, 0.0),
    "gray": (0.5, 0.5, 0.5),
}
PALETTE = {**OBJECT_COLORS, **BACKGROUND_COLORS}
COLOR_MATCH_TOLERANCE = 0.2


def classify_palette(image: np.ndarray, tolerance: float = COLOR_MATCH_TOLERANCE):
    """Per-pixel nearest palette color within tolerance.

    Returns (index map with -1 for unmatched, list of palette names).
    """
    names = list(PALETTE)
    colors = np.array([PALETTE[n] for n in names], dtype=np.float32)
    dist = np.abs(image[..., None, :] - colors[None, None]).max(axis=-1)
    best = dist.argmin(axis=-1)
    matched = dist.min(axis=-1) <= tolerance
    return np.where(matched, best, -1), names


class StubSegmenter(Segmenter):
    """Color thresholding + connected components with a fixed vocabulary."""

    def __init__(self, min_area: int = 16):
        self.min_area = min_area
        self.descriptor = ProviderDescriptor(
            kind="segmenter", name="stub-palette", deterministic=True, concurrency_safe=True
        )

    def segment(self, image: np.ndarray) -> list[Segment]:
        image = np.asarray(image, dtype=np.float32)
        if image.ndim != 3 or image.shape[-1] != 3:
            raise ValidationError("segmenter expects an (H, W, 3) image")
        index_map, names = classify_palette(image)
        segments = []
        structure = np.ones((3, 3), dtype=bool)
        for idx, name in enumerate(names):
            if name not in OBJECT_COLORS:
                continue
            color_mask = index_map == idx
            if not color_mask.any():
                continue
            labeled, count = ndi.label(color_mask, structure=structure)
            for component in range(1, count + 1):
                mask = labeled == component
                if mask.sum() < self.min_area:
                    continue
                segments.append(Segment(label=name, score=1.0, mask=mask))
        return segments


class StubEdgeDetector(EdgeDetector):
    """Normalized Sobel gradient magnitude on luminance."""

    def __init__(self):
        self.descriptor = ProviderDescriptor(
            kind="edge_detector", name="stub-sobel", deterministic=True, concurrency_safe=True
        )

    def edges(self, image: np.ndarray) -> np.ndarray:
        image = np.asarray(image, dtype=np.float32)
        if image.ndim == 3:
            image = image.mean(axis=-1)
        gx = ndi.sobel(image, axis=1, mode="nearest")
        gy = ndi.sobel(image, axis=0, mode="nearest")
        mag = np.hypot(gx, gy)
        peak = mag.max()
        if peak <= 0:
            return np.zeros_like(mag, dtype=np.float32)
        return np.clip(mag / peak, 0.0, 1.0).astype(np.float32)


def _token_digest_index(token: str, dim: int, reserved: int) -> int:
    h = hashlib.sha256(token.encode("utf-8")).digest()
    return reserved + int.from_bytes(h[:4], "big") % (dim - reserved)


class StubEmbedder(Embedder):
    """Color-keyed embeddings into orthonormal axes.

    Each palette color owns one basis axis (seeded permutation of the
    identity); unknown tokens hash into the remaining axes. An image's
    embedding is the pixel-fraction-weighted sum of its palette axes, so a
    solid red image embeds exactly onto the "red" axis and cosine scores
    against text hit 1.0 / 0.0 without tolerance games.
    """

    def __init__(self, seed: int = 0, dim: int = 64):
        if dim < 2 * len(PALETTE):
            raise ValidationError("embedding dim too small for the palette")
        self.dim = dim
        self._perm = substream(seed, "embed.axes").permutation(dim)
        self._names = list(PALETTE)
        self.descriptor = ProviderDescriptor(
            kind="embedder", name="stub-palette-64", deterministic=True, concurrency_safe=True
        )

    def _axis(self, index: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.float64)
        v[self._perm[index]] = 1.0
        return v

    def _token_axis(self, token: str) -> np.ndarray:
        if token in PALETTE:
            return self._axis(self._names.index(token))
        return self._axis(_token_digest_index(token, self.dim, len(self._names)))

    def embed_text(self, text: str) -> np.ndarray:
        tokens = re.findall(r"[a-z]+", text.lower())
        if not tokens:
            tokens = ["silence"]
        v = np.zeros(self.dim, dtype=np.float64)
        for token in tokens:
            v += self._token_axis(token)
        return v / np.linalg.norm(v)

    def embed_image(self, image: np.ndarray) -> np.ndarray:
        image = np.asarray(image, dtype=np.float32)
        if image.ndim != 3 or image.shape[-1] != 3:
            raise ValidationError("embedder expects an (H, W, 3) image")
        index_map, names = classify_palette(image)
        v = np.zeros(self.dim, dtype=np.float64)
        total = index_map.size
        for idx, name in enumerate(names):
            frac = (index_map == idx).sum() / total
            if frac > 0:
                v += frac * self._axis(idx)
        if not v.any():
            v = self._token_axis("unclassifiable")
        return v / np.linalg.norm(v)


class StubCaptioner(Captioner):
    """Returns registered captions by exact image digest, else a fallback."""

    FALLBACK = "unknown scene"

    def __init__(self):
        self._registry: dict[str, str] = {}
        self.descriptor = ProviderDescriptor(
            kind="captioner", name="stub-registry", deterministic=True, concurrency_safe=True
        )

    @staticmethod
    def _digest(frame: np.ndarray) -> str:
        data = np.ascontiguousarray(np.asarray(frame, dtype=np.float32))
        return hashlib.sha256(data.tobytes()).hexdigest()

    def register(self, frame: np.ndarray, caption: str) -> None:
        self._registry[self._digest(frame)] = caption

    def caption(self, frame: np.ndarray) -> str:
        return self._registry.get(self._digest(frame), self.FALLBACK)


class ZeroPredictor(NoisePredictor):
    def __init__(self):
        self.descriptor = ProviderDescriptor(
            kind="noise_predictor", name="stub-zero", deterministic=True, concurrency_safe=True
        )

    def predict(self, y_t, t, c_p, c_h, lambda_hed, guidance_scale):
        return np.zeros_like(y_t)


class OraclePredictor(NoisePredictor):
    """Plays back recorded forward noise; optionally per-timestep."""

    def __init__(self, eps: np.ndarray, per_timestep: Optional[dict] = None):
        self._eps = np.asarray(eps)
        self._per_timestep = per_timestep or {}
        self.descriptor = ProviderDescriptor(
            kind="noise_predictor", name="stub-oracle", deterministic=True, concurrency_safe=True
        )

    def predict(self, y_t, t, c_p, c_h, lambda_hed, guidance_scale):
        if t in self._per_timestep:
            return np.asarray(self._per_timestep[t])
        return self._eps


class LinearGaussianPredictor(NoisePredictor):
    """Optimal denoiser when the data distribution is N(mu, var).

    With y = sqrt(abar)*x0 + sqrt(1-abar)*eps and x0 ~ N(mu, var), the
    posterior-mean noise estimate is affine in y:
        eps_hat = sqrt(1-abar) * (y - sqrt(abar)*mu) / (abar*var + 1 - abar)
    """

    def __init__(self, schedule, mu: float, var: float):
        self._schedule = schedule
        self.mu = float(mu)
        self.var = float(var)
        self.descriptor = ProviderDescriptor(
            kind="noise_predictor", name="stub-linear-gaussian", deterministic=True, concurrency_safe=True
        )

    def predict(self, y_t, t, c_p, c_h, lambda_hed, guidance_scale):
        abar = float(self._schedule.alpha_bar[t])
        num = np.sqrt(1.0 - abar) * (y_t - np.sqrt(abar) * self.mu)
        return num / (abar * self.var + 1.0 - abar)


class CountingPredictor(NoisePredictor):
    """Wraps another predictor and counts invocations."""

    def __init__(self, inner: NoisePredictor):
        self.inner = inner
        self.calls = 0
        self.descriptor = ProviderDescriptor(
            kind="noise_predictor",
            name=f"counting({inner.descriptor.name})",
            deterministic=inner.descriptor.deterministic,
            concurrency_safe=False,
        )

    def predict(self, y_t, t, c_p, c_h, lambda_hed, guidance_scale):
        self.calls += 1
        return self.inner.predict(y_t, t, c_p, c_h, lambda_hed, guidance_scale)


class PromptColorPredictor(NoisePredictor):
    """Steers the decode toward the palette color named in the prompt.

    The predictor forms a clean-state guess and reports the noise consistent
    with it. The guess blends the guided target color (classifier-free
    combination of the prompt color against mid-gray) with a clipped estimate
    of the state the sampler currently holds, minus an edge term linear in
    lambda. Because the returned eps matches the actual noise scale implied
    by that guess, the sampler cancels the injected noise properly and the
    decode stays bounded; the state share keeps the seeded noise visible, so
    distinct seeds land on distinct samples.
    """

    def __init__(self, schedule, state_mix: float = 0.2, edge_gain: float = 0.35):
        self._schedule = schedule
        self.state_mix = state_mix
        self.edge_gain = edge_gain
        self.descriptor = ProviderDescriptor(
            kind="noise_predictor", name="stub-prompt-color", deterministic=True, concurrency_safe=True
        )

    @staticmethod
    def _prompt_color(prompt: str) -> np.ndarray:
        for token in re.findall(r"[a-z]+", prompt.lower()):
            if token in PALETTE:
                return np.array(PALETTE[token], dtype=np.float64)
        return np.full(3, 0.5)

    def predict(self, y_t, t, c_p, c_h, lambda_hed, guidance_scale):
        uncond = np.full(3, 0.5)
        cond = self._prompt_color(c_p or "")
        target = np.clip(uncond + guidance_scale * (cond - uncond), 0.0, 1.0)
        abar = float(self._schedule.alpha_bar[t])
        # crude x0 estimate from the raw state; the clip keeps the huge
        # early-trajectory amplification from leaking into the guess
        state = np.clip(np.asarray(y_t, dtype=np.float64) / np.sqrt(abar), -0.5, 1.5)
        guess = (1.0 - self.state_mix) * target + self.state_mix * state
        if c_h is not None:
            edge = self.edge_gain * (np.asarray(c_h, dtype=np.float64) - 0.5)
            guess = guess - lambda_hed * edge[..., None]
        guess = np.clip(guess, 0.0, 1.0)
        return (y_t - np.sqrt(abar) * guess) / np.sqrt(1.0 - abar)


class IdentityEncoder(StateEncoder):
    """Pixel-space states: encode widens to float64, decode narrows back.

    Widening is exact, so decode(encode(x)) is bit-identical for float32
    images. No clipping on decode: out-of-range values are the caller's to
    handle at quantization time.
    """

    scale = 1

    def __init__(self):
        self.descriptor = ProviderDescriptor(
            kind="state_encoder", name="stub-identity", deterministic=True, concurrency_safe=True
        )

    def encode(self, image: np.ndarray) -> np.ndarray:
        return np.asarray(image, dtype=np.float64).copy()

    def decode(self, state: np.ndarray) -> np.ndarray:
        return np.asarray(state, dtype=np.float64).astype(np.float32)


def stub_provider_set(seed: int = 0, schedule=None, noise_predictor: Optional[NoisePredictor] = None) -> ProviderSet:
    """The default all-stub bundle used by tests, demos, and --providers stub."""
    if noise_predictor is None:
        if schedule is None:
            from ..edit_pipeline.schedule import make_schedule

            schedule = make_schedule()
        noise_predictor = PromptColorPredictor(schedule)
    return ProviderSet(
        segmenter=StubSegmenter(),
        edge_detector=StubEdgeDetector(),
        embedder=StubEmbedder(seed=seed),
        captioner=StubCaptioner(),
        noise_predictor=noise_predictor,
        state_encoder=IdentityEncoder(),
    )
