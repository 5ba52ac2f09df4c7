import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atlasedit.atlas_core.sampling import (
    WEIGHT_FLOOR,
    composite_edit_layer,
    map_to_atlas,
    reconstruct_pixel,
    reconstruct_video,
    sample_raster,
)
from atlasedit.atlas_core.types import AtlasSet, PixelLocation, ValidationError, VideoClip


def _uv_for_texel(x, y, size):
    # inverse of the align-corners mapping
    return np.array([2.0 * x / (size - 1) - 1.0, 2.0 * y / (size - 1) - 1.0])


class TestReconstructPixel:
    def test_endpoints(self):
        c_f = np.array([0.9, 0.1, 0.2])
        c_b = np.array([0.0, 0.5, 1.0])
        assert np.array_equal(reconstruct_pixel(c_f, c_b, 1.0), c_f)
        assert np.array_equal(reconstruct_pixel(c_f, c_b, 0.0), c_b)

    def test_midpoint(self):
        out = reconstruct_pixel(np.ones(3), np.zeros(3), 0.5)
        assert np.allclose(out, 0.5)

    def test_alpha_out_of_range(self):
        with pytest.raises(ValidationError):
            reconstruct_pixel(np.ones(3), np.zeros(3), 1.2)


class TestSampleRaster:
    def test_texel_centers_are_exact(self):
        rng = np.random.Generator(np.random.PCG64(0))
        raster = rng.random((5, 5, 3))
        for y in range(5):
            for x in range(5):
                got = sample_raster(raster, _uv_for_texel(x, y, 5))
                assert np.allclose(got, raster[y, x], atol=1e-12)

    def test_midpoint_averages_neighbors(self):
        raster = np.zeros((2, 2, 1))
        raster[0, 1, 0] = 1.0  # one corner on
        got = sample_raster(raster, np.array([0.0, 0.0]))
        assert got[0] == pytest.approx(0.25)

    def test_out_of_range_uv_clamps_to_border(self):
        raster = np.arange(9, dtype=np.float64).reshape(3, 3, 1)
        inside = sample_raster(raster, np.array([1.0, 1.0]))
        outside = sample_raster(raster, np.array([4.0, 9.0]))
        assert np.array_equal(inside, outside)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1))
    def test_interpolation_stays_within_raster_range(self, u, v):
        rng = np.random.Generator(np.random.PCG64(5))
        raster = rng.random((4, 4, 2))
        got = sample_raster(raster, np.array([u, v]))
        assert got.min() >= raster.min() - 1e-12
        assert got.max() <= raster.max() + 1e-12


def _flat_atlas(fg_color, bg_color, alpha_value, frames=2, size=4, resolution=8):
    fg = np.zeros((resolution, resolution, 4), np.float32)
    fg[..., :3] = fg_color
    fg[..., 3] = 1.0
    bg = np.zeros_like(fg)
    bg[..., :3] = bg_color
    bg[..., 3] = 1.0
    uv = np.zeros((frames, size, size, 2), np.float32)
    alpha = np.full((frames, size, size), alpha_value, np.float32)
    return AtlasSet(fg_rgba=fg, bg_rgba=bg, uv_fg=uv, uv_bg=uv.copy(), alpha=alpha)


class TestReconstructVideo:
    def test_uniform_blend(self):
        atlas = _flat_atlas((1.0, 0.0, 0.0), (0.0, 0.0, 1.0), 0.25)
        clip = reconstruct_video(atlas)
        assert np.allclose(clip.frames[..., 0], 0.25, atol=1e-6)
        assert np.allclose(clip.frames[..., 2], 0.75, atol=1e-6)


class TestMapToAtlas:
    def test_returns_stored_coordinates(self):
        atlas = _flat_atlas((1, 0, 0), (0, 0, 1), 0.5)
        uv_f, uv_b, a = map_to_atlas(atlas, PixelLocation(t=0, y=1, x=2))
        assert (uv_f.u, uv_f.v) == (0.0, 0.0)
        assert a == pytest.approx(0.5)

    def test_bounds_check(self):
        atlas = _flat_atlas((1, 0, 0), (0, 0, 1), 0.5)
        with pytest.raises(ValidationError):
            map_to_atlas(atlas, PixelLocation(t=9, y=0, x=0))


class TestCompositeEditLayer:
    def _setup(self, alpha_value=1.0):
        atlas = _flat_atlas((0.8, 0.1, 0.1), (0.1, 0.1, 0.8), alpha_value)
        base = reconstruct_video(atlas)
        return atlas, base

    def test_untouched_region_copies_frames_verbatim(self):
        atlas, base = self._setup()
        touched = np.zeros((8, 8), bool)
        out = composite_edit_layer(base, atlas, touched)
        assert np.array_equal(out.frames, base.frames)

    def test_touched_region_takes_edited_color(self):
        atlas, base = self._setup(alpha_value=1.0)
        edited = atlas.fg_rgba.copy()
        edited[..., :3] = (0.0, 1.0, 0.0)
        touched = np.ones((8, 8), bool)
        out = composite_edit_layer(base, atlas.with_layer_raster("foreground", edited), touched)
        assert np.allclose(out.frames[..., 1], 1.0, atol=1e-6)

    def test_weight_floor_blocks_invisible_pixels(self):
        # blend weight below one half uint8 step: pixel must not move at all
        atlas, base = self._setup(alpha_value=WEIGHT_FLOOR / 2.0)
        edited = atlas.fg_rgba.copy()
        edited[..., :3] = (0.0, 1.0, 0.0)
        touched = np.ones((8, 8), bool)
        out = composite_edit_layer(base, atlas.with_layer_raster("foreground", edited), touched)
        assert np.array_equal(out.frames, base.frames)

    def test_background_layer_uses_complement_weight(self):
        atlas, base = self._setup(alpha_value=1.0)  # background fully hidden
        edited = atlas.bg_rgba.copy()
        edited[..., :3] = (0.0, 1.0, 0.0)
        touched = np.ones((8, 8), bool)
        out = composite_edit_layer(
            base, atlas.with_layer_raster("background", edited), touched, layer="background"
        )
        assert np.array_equal(out.frames, base.frames)

    def test_shape_validation(self):
        atlas, base = self._setup()
        with pytest.raises(ValidationError):
            composite_edit_layer(base, atlas, np.zeros((4, 4), bool))
        other = VideoClip(frames=np.zeros((2, 6, 6, 3)))
        with pytest.raises(ValidationError):
            composite_edit_layer(other, atlas, np.zeros((8, 8), bool))
        with pytest.raises(ValidationError):
            composite_edit_layer(base, atlas, np.zeros((8, 8), bool), layer="middle")
