"""Shared fixtures.

The expensive piece is one desk-scale atlas fit, trained once per session and
reused by every module that needs a real decomposition. Its seed and config
are pinned so downstream assertions (alpha cleanliness, locality) are stable.
"""

import numpy as np
import pytest

from atlasedit.atlas_core.container import save_atlas
from atlasedit.atlas_core.synthetic import translating_square_clip
from atlasedit.atlas_core.training import train_nla
from atlasedit.atlas_core.types import CoordinateNetworkConfig
from atlasedit.edit_pipeline.request import EditRequest
from atlasedit.edit_pipeline.schedule import make_schedule
from atlasedit.providers.stubs import stub_provider_set

TRAIN_SEED = 103


def desk_config() -> CoordinateNetworkConfig:
    """Desk-scale fit: small nets, 128 atlas, aggressive endpoint snapping.

    The snap threshold is deliberately high: the synthetic square has crisp
    edges, and soft opacity halos at its border must rasterize to exactly
    zero or compositing cannot keep untouched pixels bit-identical.
    """
    return CoordinateNetworkConfig(
        hidden_width=48,
        depth=3,
        iterations=1200,
        batch_size=4096,
        atlas_resolution=128,
        alpha_snap=0.1,
    )


def tiny_config() -> CoordinateNetworkConfig:
    # Smoke-scale fit for CLI and byte-reproducibility tests; quality is
    # irrelevant there, so the PSNR bar is set low enough to always clear.
    return CoordinateNetworkConfig(
        hidden_width=32,
        depth=3,
        iterations=150,
        batch_size=2048,
        atlas_resolution=64,
        target_psnr_db=10.0,
        alpha_snap=0.1,
    )


@pytest.fixture(scope="session")
def square_truth():
    return translating_square_clip()


@pytest.fixture(scope="session")
def trained_atlas(square_truth):
    atlas = train_nla(square_truth.clip, desk_config(), TRAIN_SEED)
    assert atlas.converged, (
        f"session fixture did not converge (PSNR {atlas.achieved_psnr_db:.2f} dB); "
        "downstream locality tests would fail for the wrong reason"
    )
    return atlas


@pytest.fixture(scope="session")
def atlas_dir(trained_atlas, tmp_path_factory):
    """The trained atlas persisted as a project directory (atlas.npz + sidecar)."""
    project = tmp_path_factory.mktemp("project")
    save_atlas(trained_atlas, project / "atlas.npz")
    return project


@pytest.fixture(scope="session")
def schedule():
    return make_schedule()


@pytest.fixture()
def providers(schedule):
    return stub_provider_set(seed=0, schedule=schedule)


@pytest.fixture()
def recolor_request():
    return EditRequest(
        source_tokens=("red",),
        target_prompt="a blue square",
        rho=0.6,
        lambda_hed=0.5,
        seed=11,
        num_samples=1,
    )


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(1234))
