from .base import (
    PROVIDER_KINDS,
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
from .stubs import (
    CountingPredictor,
    IdentityEncoder,
    LinearGaussianPredictor,
    OraclePredictor,
    PromptColorPredictor,
    StubCaptioner,
    StubEdgeDetector,
    StubEmbedder,
    StubSegmenter,
    ZeroPredictor,
    stub_provider_set,
)
from .remote import remote_provider_set

__all__ = [
    "PROVIDER_KINDS",
    "Captioner",
    "EdgeDetector",
    "Embedder",
    "NoisePredictor",
    "ProviderDescriptor",
    "ProviderError",
    "ProviderSet",
    "Segment",
    "Segmenter",
    "StateEncoder",
    "CountingPredictor",
    "IdentityEncoder",
    "LinearGaussianPredictor",
    "OraclePredictor",
    "PromptColorPredictor",
    "StubCaptioner",
    "StubEdgeDetector",
    "StubEmbedder",
    "StubSegmenter",
    "ZeroPredictor",
    "stub_provider_set",
    "remote_provider_set",
]
