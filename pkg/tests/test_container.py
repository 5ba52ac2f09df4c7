import json

import numpy as np
import pytest

from atlasedit.atlas_core.container import load_atlas, save_atlas, sidecar_path
from atlasedit.atlas_core.types import AtlasSet, CoordinateNetworkConfig, ValidationError


def _atlas(seed=5):
    rng = np.random.Generator(np.random.PCG64(seed))
    return AtlasSet(
        fg_rgba=rng.random((16, 16, 4), dtype=np.float32),
        bg_rgba=rng.random((16, 16, 4), dtype=np.float32),
        uv_fg=(rng.random((3, 8, 8, 2), dtype=np.float32) * 2 - 1),
        uv_bg=(rng.random((3, 8, 8, 2), dtype=np.float32) * 2 - 1),
        alpha=rng.random((3, 8, 8), dtype=np.float32),
        network_weights={"mapper.w0": rng.random((4, 4), dtype=np.float32)},
        seed=seed,
        config=CoordinateNetworkConfig(hidden_width=16),
        achieved_psnr_db=31.25,
        converged=True,
    )


def test_round_trip_preserves_everything(tmp_path):
    atlas = _atlas()
    path = save_atlas(atlas, tmp_path / "atlas.npz")
    loaded = load_atlas(path)
    for name in ("fg_rgba", "bg_rgba", "uv_fg", "uv_bg", "alpha"):
        assert np.array_equal(getattr(loaded, name), getattr(atlas, name))
    assert np.array_equal(loaded.network_weights["mapper.w0"], atlas.network_weights["mapper.w0"])
    assert loaded.seed == atlas.seed
    assert loaded.config == atlas.config
    assert loaded.achieved_psnr_db == pytest.approx(31.25)
    assert loaded.converged


def test_rewrites_are_byte_identical(tmp_path):
    atlas = _atlas()
    p1 = save_atlas(atlas, tmp_path / "a" / "atlas.npz")
    p2 = save_atlas(atlas, tmp_path / "b" / "atlas.npz")
    assert p1.read_bytes() == p2.read_bytes()
    assert sidecar_path(p1).read_bytes() == sidecar_path(p2).read_bytes()


def test_missing_archive_rejected(tmp_path):
    with pytest.raises(ValidationError, match="no atlas archive"):
        load_atlas(tmp_path / "nope.npz")


def test_missing_sidecar_rejected(tmp_path):
    path = save_atlas(_atlas(), tmp_path / "atlas.npz")
    sidecar_path(path).unlink()
    with pytest.raises(ValidationError, match="sidecar"):
        load_atlas(path)


def test_sidecar_shape_disagreement_rejected(tmp_path):
    path = save_atlas(_atlas(), tmp_path / "atlas.npz")
    sidecar = sidecar_path(path)
    meta = json.loads(sidecar.read_text())
    meta["height"] = 999
    sidecar.write_text(json.dumps(meta))
    with pytest.raises(ValidationError, match="disagrees"):
        load_atlas(path)
