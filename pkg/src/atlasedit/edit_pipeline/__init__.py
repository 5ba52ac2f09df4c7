from .schedule import NoiseSchedule, make_schedule
from .request import Box, EditPatch, EditRequest
from .ops import (
    NotFoundError,
    blend_atlas_for_segmentation,
    ddim_step,
    edit_patch,
    locate_region,
    masked_blend,
    noise_patch,
    paste_patch,
    resize_mask,
)
from .orchestrate import EditOutcome, edit_video, write_edit_artifacts

__all__ = [
    "NoiseSchedule",
    "make_schedule",
    "Box",
    "EditPatch",
    "EditRequest",
    "NotFoundError",
    "blend_atlas_for_segmentation",
    "ddim_step",
    "edit_patch",
    "locate_region",
    "masked_blend",
    "noise_patch",
    "paste_patch",
    "resize_mask",
    "EditOutcome",
    "edit_video",
    "write_edit_artifacts",
]
