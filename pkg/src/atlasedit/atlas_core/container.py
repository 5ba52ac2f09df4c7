"""Atlas persistence: one npz archive plus a small JSON sidecar.

The archive is written through zipfile directly (not np.savez) so that the
bytes are a pure function of the contents: entries are sorted by name and
all zip timestamps are pinned to the epoch. Re-running a decomposition with
the same seed must yield byte-identical files.
"""

from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np

from .types import AtlasSet, CoordinateNetworkConfig, ValidationError

_EPOCH = (1980, 1, 1, 0, 0, 0)
_WEIGHT_PREFIX = "net/"


def _write_npz(path: Path, arrays: dict) -> None:
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arrays[name]), allow_pickle=False)
            info = zipfile.ZipInfo(name + ".npy", date_time=_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, buf.getvalue())


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_atlas(atlas: AtlasSet, path) -> Path:
    """Write ``atlas`` to ``path`` (npz) and its sidecar JSON. Returns the npz path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {
        "fg_rgba": atlas.fg_rgba,
        "bg_rgba": atlas.bg_rgba,
        "uv_fg": atlas.uv_fg,
        "uv_bg": atlas.uv_bg,
        "alpha": atlas.alpha,
    }
    for name, w in atlas.network_weights.items():
        arrays[_WEIGHT_PREFIX + name] = w
    _write_npz(path, arrays)

    f, h, w = atlas.video_shape
    meta = {
        "atlas_resolution": atlas.resolution,
        "frame_count": f,
        "height": h,
        "width": w,
        "seed": atlas.seed,
        "config": atlas.config.to_dict(),
        "achieved_psnr_db": round(float(atlas.achieved_psnr_db), 6),
        "converged": bool(atlas.converged),
    }
    sidecar = sidecar_path(path)
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def load_atlas(path) -> AtlasSet:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no atlas archive at {path}")
    sidecar = sidecar_path(path)
    if not sidecar.exists():
        raise ValidationError(f"missing atlas sidecar {sidecar}")
    meta = json.loads(sidecar.read_text())

    with np.load(path) as archive:
        def pull(name):
            if name not in archive:
                raise ValidationError(f"atlas archive missing array {name!r}")
            return archive[name]

        weights = {}
        for key in archive.files:
            if key.startswith(_WEIGHT_PREFIX):
                weights[key[len(_WEIGHT_PREFIX):]] = archive[key]
        atlas = AtlasSet(
            fg_rgba=pull("fg_rgba"),
            bg_rgba=pull("bg_rgba"),
            uv_fg=pull("uv_fg"),
            uv_bg=pull("uv_bg"),
            alpha=pull("alpha"),
            network_weights=weights,
            seed=int(meta["seed"]),
            config=CoordinateNetworkConfig.from_dict(meta["config"]),
            achieved_psnr_db=float(meta["achieved_psnr_db"]),
            converged=bool(meta["converged"]),
        )

    expect = (int(meta["frame_count"]), int(meta["height"]), int(meta["width"]))
    if atlas.video_shape != expect:
        raise ValidationError(
            f"sidecar video shape {expect} disagrees with arrays {atlas.video_shape}"
        )
    if atlas.resolution != int(meta["atlas_resolution"]):
        raise ValidationError("sidecar atlas resolution disagrees with arrays")
    return atlas
