import numpy as np
import pytest

from atlasedit.atlas_core.types import (
    AtlasSet,
    CoordinateNetworkConfig,
    ValidationError,
    VideoClip,
)
from atlasedit.edit_pipeline.request import Box, EditRequest


def _small_atlas(resolution=8, frames=2, size=4):
    rgba = np.zeros((resolution, resolution, 4), np.float32)
    uv = np.zeros((frames, size, size, 2), np.float32)
    alpha = np.zeros((frames, size, size), np.float32)
    return AtlasSet(fg_rgba=rgba, bg_rgba=rgba.copy(), uv_fg=uv, uv_bg=uv.copy(), alpha=alpha)


class TestVideoClip:
    def test_accepts_valid_frames(self):
        clip = VideoClip(frames=np.zeros((2, 4, 4, 3)))
        assert clip.frame_count == 2
        assert clip.shape == (2, 4, 4)
        assert clip.frames.dtype == np.float32

    def test_rejects_bad_rank(self):
        with pytest.raises(ValidationError):
            VideoClip(frames=np.zeros((4, 4, 3)))

    def test_rejects_single_frame(self):
        with pytest.raises(ValidationError):
            VideoClip(frames=np.zeros((1, 4, 4, 3)))

    def test_rejects_out_of_range_values(self):
        with pytest.raises(ValidationError):
            VideoClip(frames=np.full((2, 4, 4, 3), 1.5))


class TestCoordinateNetworkConfig:
    def test_round_trips_through_dict(self):
        cfg = CoordinateNetworkConfig(hidden_width=16, alpha_snap=0.1, min_alpha_blob=4)
        again = CoordinateNetworkConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_rejects_missing_loss_weight(self):
        cfg = CoordinateNetworkConfig(loss_weights={"reconstruction": 1.0})
        with pytest.raises(ValidationError, match="loss_weights"):
            cfg.validate()

    @pytest.mark.parametrize(
        "field,value",
        [
            ("hidden_width", 0),
            ("iterations", 0),
            ("learning_rate", 0.0),
            ("bootstrap_fraction", 1.5),
            ("min_alpha_blob", -1),
        ],
    )
    def test_rejects_bad_scalar(self, field, value):
        cfg = CoordinateNetworkConfig(**{field: value})
        with pytest.raises(ValidationError):
            cfg.validate()


class TestAtlasSet:
    def test_shape_validation(self):
        with pytest.raises(ValidationError, match="fg_rgba"):
            AtlasSet(
                fg_rgba=np.zeros((8, 8, 3)),
                bg_rgba=np.zeros((8, 8, 4)),
                uv_fg=np.zeros((2, 4, 4, 2)),
                uv_bg=np.zeros((2, 4, 4, 2)),
                alpha=np.zeros((2, 4, 4)),
            )

    def test_alpha_range_validation(self):
        with pytest.raises(ValidationError, match="alpha"):
            AtlasSet(
                fg_rgba=np.zeros((8, 8, 4)),
                bg_rgba=np.zeros((8, 8, 4)),
                uv_fg=np.zeros((2, 4, 4, 2)),
                uv_bg=np.zeros((2, 4, 4, 2)),
                alpha=np.full((2, 4, 4), 1.5),
            )

    def test_layer_raster_lookup(self):
        atlas = _small_atlas()
        assert atlas.layer_raster("foreground") is atlas.fg_rgba
        assert atlas.layer_raster("background") is atlas.bg_rgba
        with pytest.raises(ValidationError):
            atlas.layer_raster("middle")

    def test_with_layer_raster_replaces_one_layer_only(self):
        atlas = _small_atlas()
        new = np.full_like(atlas.fg_rgba, 0.5)
        out = atlas.with_layer_raster("foreground", new)
        assert np.array_equal(out.fg_rgba, new)
        assert np.array_equal(out.bg_rgba, atlas.bg_rgba)
        # the original is untouched
        assert atlas.fg_rgba.max() == 0.0


class TestBox:
    def test_degenerate_rejected(self):
        with pytest.raises(ValidationError):
            Box(4, 4, 4, 8)

    def test_geometry_and_bounds(self):
        box = Box(1, 2, 5, 7)
        assert (box.width, box.height) == (4, 5)
        assert box.within(7, 5)
        assert not box.within(6, 5)

    def test_dict_round_trip(self):
        box = Box(0, 1, 3, 4)
        assert Box.from_dict(box.to_dict()) == box


class TestEditRequest:
    def test_defaults_and_round_trip(self):
        req = EditRequest(source_tokens=["car"], target_prompt="a red car")
        assert req.rho == 1.0 and req.lambda_hed == 1.0
        assert req.use_mask and req.use_hed
        again = EditRequest.from_dict(req.to_dict())
        assert again == req

    def test_empty_tokens_rejected(self):
        with pytest.raises(ValidationError):
            EditRequest(source_tokens=[], target_prompt="x")

    @pytest.mark.parametrize("kw", [{"rho": 1.2}, {"rho": -0.1}, {"num_samples": 0}, {"guidance_scale": 0.5}])
    def test_invalid_fields_rejected(self, kw):
        with pytest.raises(ValidationError):
            EditRequest(source_tokens=["a"], target_prompt="b", **kw)
