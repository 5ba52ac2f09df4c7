from .types import AtlasSet, CoordinateNetworkConfig, PixelLocation, UVCoord, VideoClip
from .sampling import (
    composite_edit_layer,
    map_to_atlas,
    reconstruct_pixel,
    reconstruct_video,
    sample_atlas,
)
from .training import train_nla
from .container import load_atlas, save_atlas

__all__ = [
    "AtlasSet",
    "CoordinateNetworkConfig",
    "PixelLocation",
    "UVCoord",
    "VideoClip",
    "composite_edit_layer",
    "map_to_atlas",
    "reconstruct_pixel",
    "reconstruct_video",
    "sample_atlas",
    "train_nla",
    "load_atlas",
    "save_atlas",
]
