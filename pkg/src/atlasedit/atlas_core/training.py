"""Self-supervised fitting of the layered atlas decomposition.

Five small coordinate MLPs are trained jointly on the source clip: two
mapping networks (pixel -> foreground/background atlas UV), one opacity
network, and two atlas color networks (UV -> RGB). Losses:

  - reconstruction: alpha-composited color must match the source pixel
  - alpha sparsity: mean opacity, keeps the foreground layer minimal
  - rigidity: mapping Jacobians stay near a fixed isometric scale, and the
    background mapping is penalized for varying over time
  - bootstrap (early iterations only): opacity is supervised against a
    motion prior derived from the clip's own temporal median

After training the networks are rasterized once: UV lookup tables at every
pixel, a snapped opacity table, and S x S atlas images. Everything downstream
reads the rasters; the network weights ride along for inspection only.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import torch
from scipy import ndimage
from torch import nn

from ..rng import substream_seed
from .sampling import reconstruct_video
from .types import AtlasSet, CoordinateNetworkConfig, VideoClip

# Pixels whose color strays this far (max over channels) from the temporal
# median are treated as moving during the bootstrap phase.
MOTION_PRIOR_THRESHOLD = 0.08

# Target mapping scale: the frame span [-1,1] should land on roughly the
# central 90% of the atlas span.
_RIGIDITY_SCALE = 0.9

_BOOTSTRAP_WEIGHT = 2.0
_FG_TEMPORAL_WEIGHT = 0.1


def _encode(x: torch.Tensor, bands: int) -> torch.Tensor:
    """Sinusoidal features [x, sin(2^k pi x), cos(2^k pi x)] for k < bands."""
    parts = [x]
    for k in range(bands):
        w = (2.0**k) * math.pi
        parts.append(torch.sin(w * x))
        parts.append(torch.cos(w * x))
    return torch.cat(parts, dim=-1)


class _FieldNet(nn.Module):
    """MLP over positionally encoded coordinates with a bounded output.

    Mapping networks (identity_scale set) start as an exact scaled identity:
    the final layer is zero-initialized and a tanh-compensated skip adds
    atanh(scale * (x, y)). Starting at the rigidity target scale avoids the
    collapse mode where the whole frame lands on a few atlas texels.
    """

    def __init__(
        self,
        in_dim: int,
        bands: int,
        width: int,
        depth: int,
        out_dim: int,
        activation: str,
        identity_scale: float = 0.0,
    ):
        super().__init__()
        self.bands = bands
        self.identity_scale = identity_scale
        layers: list[nn.Module] = []
        d = in_dim * (2 * bands + 1)
        for _ in range(depth):
            layers.append(nn.Linear(d, width))
            layers.append(nn.ReLU())
            d = width
        final = nn.Linear(d, out_dim)
        if identity_scale:
            nn.init.zeros_(final.weight)
            nn.init.zeros_(final.bias)
        layers.append(final)
        self.layers = nn.Sequential(*layers)
        self.activation = activation

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.layers(_encode(x, self.bands))
        if self.identity_scale:
            y = y + torch.atanh(self.identity_scale * x[..., :2])
        if self.activation == "tanh":
            return torch.tanh(y)
        return torch.sigmoid(y)


def motion_prior(clip: VideoClip, threshold: float = MOTION_PRIOR_THRESHOLD) -> np.ndarray:
    """(F, H, W) float32 in {0,1}: pixels that deviate from the temporal median.

    Assumes the background dominates each pixel's time series; a foreground
    that parks on one spot for most of the clip will fool it.
    """
    median = np.median(clip.frames, axis=0)
    dev = np.abs(clip.frames - median[None]).max(axis=-1)
    return (dev > threshold).astype(np.float32)


def _despeckle_alpha(alpha: np.ndarray, min_blob: int) -> np.ndarray:
    """Zero isolated opacity specks the networks left behind.

    A real foreground object covers a contiguous region; single stray pixels
    with residual opacity would otherwise get re-blended during compositing
    and break the untouched-background guarantee.
    """
    if min_blob <= 1:
        return alpha
    structure = np.ones((3, 3), dtype=bool)
    for frame in alpha:
        labels, count = ndimage.label(frame > 0.0, structure=structure)
        if count == 0:
            continue
        sizes = np.bincount(labels.ravel())
        small = np.nonzero(sizes[1:] < min_blob)[0] + 1
        if small.size:
            frame[np.isin(labels, small)] = 0.0
    return alpha


def _normalized_coords(f: int, h: int, w: int) -> np.ndarray:
    """All (x, y, t) pixel coordinates scaled to [-1, 1], ordered t-major."""

    def axis(n):
        return np.linspace(-1.0, 1.0, n, dtype=np.float32) if n > 1 else np.zeros(n, dtype=np.float32)

    tt, yy, xx = np.meshgrid(axis(f), axis(h), axis(w), indexing="ij")
    return np.stack([xx, yy, tt], axis=-1).reshape(-1, 3)


def _splat_alpha(uv: np.ndarray, alpha: np.ndarray, size: int) -> np.ndarray:
    """Bilinearly accumulate per-pixel opacity onto the atlas grid.

    Votes are weighted by the opacity itself: transparent pixels also carry
    (meaningless) foreground UVs and must not dilute the footprint.
    """
    pos = (uv.reshape(-1, 2) + 1.0) * 0.5 * (size - 1)
    pos = np.clip(pos, 0.0, size - 1.0)
    x, y = pos[:, 0], pos[:, 1]
    x0 = np.clip(np.floor(x).astype(np.int64), 0, size - 2) if size > 1 else np.zeros(len(x), np.int64)
    y0 = np.clip(np.floor(y).astype(np.int64), 0, size - 2) if size > 1 else np.zeros(len(y), np.int64)
    fx, fy = x - x0, y - y0
    a = alpha.reshape(-1)
    acc = np.zeros((size, size), dtype=np.float64)
    wacc = np.zeros((size, size), dtype=np.float64)
    for dy, dx, wgt in (
        (0, 0, (1 - fx) * (1 - fy)),
        (0, 1, fx * (1 - fy)),
        (1, 0, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        np.add.at(acc, (y0 + dy, x0 + dx), wgt * a * a)
        np.add.at(wacc, (y0 + dy, x0 + dx), wgt * a)
    out = np.zeros((size, size), dtype=np.float32)
    hit = wacc > 1e-8
    out[hit] = (acc[hit] / wacc[hit]).astype(np.float32)
    return out


def _psnr(a: np.ndarray, b: np.ndarray) -> float:
    mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * math.log10(1.0 / mse)


def train_nla(video: VideoClip, config: CoordinateNetworkConfig, rng_seed: int) -> AtlasSet:
    """Fit the layered decomposition. Deterministic given rng_seed."""
    config.validate()
    f, h, w = video.frame_count, video.height, video.width

    coords_np = _normalized_coords(f, h, w)
    colors_np = video.frames.reshape(-1, 3)
    prior_np = motion_prior(video).reshape(-1)

    torch.manual_seed(substream_seed(rng_seed, "atlas.init"))
    mk = lambda out, act, bands, in_dim=3, ident=0.0: _FieldNet(
        in_dim, bands, config.hidden_width, config.depth, out, act, identity_scale=ident
    )
    nets = {
        "map_fg": mk(2, "tanh", config.positional_encoding_bands, ident=_RIGIDITY_SCALE),
        "map_bg": mk(2, "tanh", config.positional_encoding_bands, ident=_RIGIDITY_SCALE),
        "map_alpha": mk(1, "sigmoid", config.positional_encoding_bands),
        "atlas_fg": mk(3, "sigmoid", config.atlas_encoding_bands, in_dim=2),
        "atlas_bg": mk(3, "sigmoid", config.atlas_encoding_bands, in_dim=2),
    }
    params = [p for net in nets.values() for p in net.parameters()]
    opt = torch.optim.Adam(params, lr=config.learning_rate)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(
        opt, T_max=config.iterations, eta_min=0.05 * config.learning_rate
    )

    coords = torch.from_numpy(coords_np)
    colors = torch.from_numpy(colors_np)
    prior = torch.from_numpy(prior_np)
    n = coords.shape[0]
    gen = torch.Generator().manual_seed(substream_seed(rng_seed, "atlas.batches"))

    w_recon = config.loss_weights["reconstruction"]
    w_alpha = config.loss_weights["alpha_regularization"]
    w_rigid = config.loss_weights["rigidity"]
    bootstrap_until = int(round(config.bootstrap_fraction * config.iterations))
    hx = 2.0 / (w - 1) if w > 1 else 1.0
    hy = 2.0 / (h - 1) if h > 1 else 1.0
    scale_sq = _RIGIDITY_SCALE**2

    def jacobian_penalty(mapper: _FieldNet, p: torch.Tensor) -> torch.Tensor:
        base = mapper(p)
        du = (mapper(p + torch.tensor([hx, 0.0, 0.0])) - base) / hx
        dv = (mapper(p + torch.tensor([0.0, hy, 0.0])) - base) / hy
        jtj_uu = (du * du).sum(-1)
        jtj_vv = (dv * dv).sum(-1)
        jtj_uv = (du * dv).sum(-1)
        return ((jtj_uu - scale_sq) ** 2 + (jtj_vv - scale_sq) ** 2 + 2 * jtj_uv**2).mean()

    for it in range(config.iterations):
        idx = torch.randint(0, n, (config.batch_size,), generator=gen)
        p = coords[idx]
        c_true = colors[idx]

        uv_f = nets["map_fg"](p)
        uv_b = nets["map_bg"](p)
        a = nets["map_alpha"](p)
        c_f = nets["atlas_fg"](uv_f)
        c_b = nets["atlas_bg"](uv_b)
        recon = (1.0 - a) * c_b + a * c_f

        loss = w_recon * ((recon - c_true) ** 2).mean()
        loss = loss + w_alpha * a.mean()

        sub = p[: max(1, config.batch_size // 4)]
        rigid = jacobian_penalty(nets["map_fg"], sub) + jacobian_penalty(nets["map_bg"], sub)
        # background is static: its UV must not depend on t
        t_other = coords[torch.randint(0, n, (sub.shape[0],), generator=gen), 2:3]
        sub_shift = torch.cat([sub[:, :2], t_other], dim=1)
        rigid = rigid + ((nets["map_bg"](sub_shift) - nets["map_bg"](sub)) ** 2).mean()
        ht = 2.0 / (f - 1)
        step_t = torch.where(sub[:, 2:3] < 1.0 - ht, sub[:, 2:3] + ht, sub[:, 2:3] - ht)
        sub_next = torch.cat([sub[:, :2], step_t], dim=1)
        rigid = rigid + _FG_TEMPORAL_WEIGHT * ((nets["map_fg"](sub_next) - nets["map_fg"](sub)) ** 2).mean()
        loss = loss + w_rigid * rigid

        if it < bootstrap_until:
            loss = loss + _BOOTSTRAP_WEIGHT * nn.functional.binary_cross_entropy(
                a.squeeze(-1).clamp(1e-5, 1 - 1e-5), prior[idx]
            )

        opt.zero_grad()
        loss.backward()
        opt.step()
        sched.step()

    # Rasterize: everything downstream reads tables, never the networks.
    with torch.no_grad():
        uv_fg = nets["map_fg"](coords).numpy().reshape(f, h, w, 2)
        uv_bg = nets["map_bg"](coords).numpy().reshape(f, h, w, 2)
        alpha = nets["map_alpha"](coords).numpy().reshape(f, h, w)

        s = config.atlas_resolution
        axis = torch.linspace(-1.0, 1.0, s)
        gu, gv = torch.meshgrid(axis, axis, indexing="xy")
        grid = torch.stack([gu, gv], dim=-1).reshape(-1, 2)
        fg_rgb = nets["atlas_fg"](grid).numpy().reshape(s, s, 3)
        bg_rgb = nets["atlas_bg"](grid).numpy().reshape(s, s, 3)

    snap = config.alpha_snap
    alpha = alpha.copy()
    alpha[alpha < snap] = 0.0
    alpha[alpha > 1.0 - snap] = 1.0
    alpha = _despeckle_alpha(alpha, config.min_alpha_blob)

    fg_alpha = _splat_alpha(uv_fg, alpha, s)
    fg_rgba = np.concatenate([fg_rgb, fg_alpha[..., None]], axis=-1).astype(np.float32)
    bg_rgba = np.concatenate([bg_rgb, np.ones((s, s, 1), dtype=np.float32)], axis=-1)

    weights = {}
    for name, net in nets.items():
        for key, tensor in net.state_dict().items():
            weights[f"{name}.{key}"] = tensor.numpy().copy()

    atlas = AtlasSet(
        fg_rgba=fg_rgba,
        bg_rgba=bg_rgba,
        uv_fg=uv_fg.astype(np.float32),
        uv_bg=uv_bg.astype(np.float32),
        alpha=alpha.astype(np.float32),
        network_weights=weights,
        seed=rng_seed,
        config=config,
    )
    psnr = _psnr(reconstruct_video(atlas).frames, video.frames)
    return dataclasses.replace(
        atlas, achieved_psnr_db=psnr, converged=bool(psnr >= config.target_psnr_db)
    )
