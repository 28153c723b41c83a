"""Stochastic tile degradation: color fade, dust overlay, blur.

Stages run in the fixed order fade -> dust -> blur, each only when
enabled, driven entirely by integers derived from (master_seed,
tile_id), so the same tile degrades identically on every machine and
in any execution order. Masks are never degraded.

Per-tile randomness layout (documented so outputs are reproducible
from scratch): tile_seed = derive_tile_seed(master_seed, tile_id);
each stage then draws from its own stream seeded with
derive_tile_seed(tile_seed, stage) where fade=0, dust=1. The fade
stage draws its strength first, then modulates with a value-noise
field whose lattice nodes are hashed from the same stage seed. The
dust stage draws rotation angle, global alpha, then the crop offsets,
in that order.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import AssetError, ConfigError
from .pngio import read_rgba_png
from .seeding import Rng, derive_tile_seed

PAPER_WHITE = (245, 240, 225)

_NOISE_CELL_PX = 64  # lattice spacing of the fade modulation field
_NODE_SALT_X = 0x8E3779B97F4A7C15
_NODE_SALT_Y = 0x5851F42D4C957F2D


def _check_range(pair, what):
    lo, hi = float(pair[0]), float(pair[1])
    if not (0.0 <= lo <= hi <= 1.0):
        raise ConfigError(f"{what} must satisfy 0 <= lo <= hi <= 1, got ({lo}, {hi})")
    return lo, hi


@dataclass(frozen=True)
class DegradationConfig:
    blur_enabled: bool = True
    dust_enabled: bool = True
    dust_asset: str = "procedural"
    dust_alpha_range: tuple = (0.2, 0.6)
    fade_enabled: bool = True
    fade_strength_range: tuple = (0.1, 0.5)
    fade_noise: bool = True
    master_seed: int = 0

    def __post_init__(self):
        _check_range(self.dust_alpha_range, "dust_alpha_range")
        _check_range(self.fade_strength_range, "fade_strength_range")
        if int(self.master_seed) < 0:
            raise ConfigError("master_seed must be a non-negative integer")


def config_from_dict(doc: dict) -> DegradationConfig:
    try:
        return DegradationConfig(
            blur_enabled=bool(doc.get("blur_enabled", True)),
            dust_enabled=bool(doc.get("dust_enabled", True)),
            dust_asset=str(doc.get("dust_asset", "procedural")),
            dust_alpha_range=tuple(doc.get("dust_alpha_range", (0.2, 0.6))),
            fade_enabled=bool(doc.get("fade_enabled", True)),
            fade_strength_range=tuple(doc.get("fade_strength_range", (0.1, 0.5))),
            fade_noise=bool(doc.get("fade_noise", True)),
            master_seed=int(doc.get("master_seed", 0)),
        )
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"malformed degradation config: {exc}") from exc


def config_to_dict(config: DegradationConfig) -> dict:
    return {
        "blur_enabled": config.blur_enabled,
        "dust_enabled": config.dust_enabled,
        "dust_asset": config.dust_asset,
        "dust_alpha_range": list(config.dust_alpha_range),
        "fade_enabled": config.fade_enabled,
        "fade_strength_range": list(config.fade_strength_range),
        "fade_noise": config.fade_noise,
        "master_seed": config.master_seed,
    }


def load_degradation_config(path) -> DegradationConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return config_from_dict(json.load(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read degradation config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"degradation config is not valid JSON: {exc}") from exc


def save_degradation_config(config: DegradationConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(config), fh, indent=2)
        fh.write("\n")


def degradation_hash(config: DegradationConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def gaussian_blur_3x3(image: np.ndarray) -> np.ndarray:
    """Separable [1,2,1] x [1,2,1] / 16 blur with replicated borders.

    Pure integer arithmetic: weighted sum then (sum + 8) // 16, which
    rounds half up, so results are identical everywhere.
    """
    img = image.astype(np.uint32)
    padded = np.pad(img, ((0, 0), (1, 1), (0, 0)), mode="edge")
    horiz = padded[:, :-2] + 2 * padded[:, 1:-1] + padded[:, 2:]
    padded = np.pad(horiz, ((1, 1), (0, 0), (0, 0)), mode="edge")
    acc = padded[:-2] + 2 * padded[1:-1] + padded[2:]
    return ((acc + 8) // 16).astype(np.uint8)


def _value_noise(height: int, width: int, seed: int) -> np.ndarray:
    """Low-frequency field in [0, 1): bilinear interpolation between
    lattice nodes hashed deterministically from (seed, node coords)."""
    gh = height // _NOISE_CELL_PX + 2
    gw = width // _NOISE_CELL_PX + 2
    u64 = np.uint64
    gx = np.arange(gw, dtype=np.uint64)[None, :]
    gy = np.arange(gh, dtype=np.uint64)[:, None]
    with np.errstate(over="ignore"):
        z = u64(seed & ((1 << 64) - 1)) + gx * u64(_NODE_SALT_X) + gy * u64(_NODE_SALT_Y)
        z = (z ^ (z >> u64(30))) * u64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> u64(27))) * u64(0x94D049BB133111EB)
        z = z ^ (z >> u64(31))
    nodes = (z >> u64(11)).astype(np.float64) / float(1 << 53)

    ys = np.arange(height, dtype=np.float64) / _NOISE_CELL_PX
    xs = np.arange(width, dtype=np.float64) / _NOISE_CELL_PX
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    n00 = nodes[y0[:, None], x0[None, :]]
    n01 = nodes[y0[:, None], x0[None, :] + 1]
    n10 = nodes[y0[:, None] + 1, x0[None, :]]
    n11 = nodes[y0[:, None] + 1, x0[None, :] + 1]
    top = n00 * (1.0 - fx) + n01 * fx
    bot = n10 * (1.0 - fx) + n11 * fx
    return top * (1.0 - fy) + bot * fy


def color_fade(image: np.ndarray, strength: float, seed: int = 0, noise: bool = False) -> np.ndarray:
    """Blend each pixel toward aged-paper white by the given strength.

    With noise on, the per-pixel strength is modulated by a low
    frequency value-noise field in [0.5, 1.0] seeded by seed, so fading
    varies smoothly across the tile like real sun bleaching.
    """
    if not (0.0 <= strength <= 1.0):
        raise ConfigError(f"fade strength {strength} outside [0, 1]")
    h, w = image.shape[:2]
    white = np.asarray(PAPER_WHITE, dtype=np.float64)
    if noise:
        field = 0.5 + 0.5 * _value_noise(h, w, seed)
        local = strength * field
        out = image + (white - image) * local[:, :, None]
    else:
        out = image + (white - image) * strength
    return np.floor(out + 0.5).astype(np.uint8)


def _bilinear_sample(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample (H, W, C) at float coords with replicated edges."""
    h, w = img.shape[:2]
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[..., None]
    fy = (ys - y0)[..., None]
    img = img.astype(np.float64)
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def _rotate_rgba(asset: np.ndarray, angle_deg: float) -> np.ndarray:
    """Rotate about the center, bilinear, replicate edges, same size."""
    h, w = asset.shape[:2]
    theta = math.radians(angle_deg)
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    jj, ii = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    dx = ii - cx
    dy = jj - cy
    src_x = cx + dx * cos_t + dy * sin_t
    src_y = cy - dx * sin_t + dy * cos_t
    return _bilinear_sample(asset, src_x, src_y)


def _scale_to(img: np.ndarray, height: int, width: int) -> np.ndarray:
    h, w = img.shape[:2]
    ys = (np.arange(height, dtype=np.float64) + 0.5) * (h / height) - 0.5
    xs = (np.arange(width, dtype=np.float64) + 0.5) * (w / width) - 0.5
    xg, yg = np.meshgrid(xs, ys)
    return _bilinear_sample(img, xg, yg)


def generate_dust_asset(width: int = 1024, height: int = 1024, seed: int = 0, density: float = 1.0) -> np.ndarray:
    """Procedural dust sheet: seeded dark blobs with soft falloff on a
    fully transparent background, RGBA uint8."""
    if width < 8 or height < 8:
        raise ConfigError("dust asset dimensions must be at least 8x8")
    rng = Rng(seed)
    alpha = np.zeros((height, width), dtype=np.float64)
    tint = np.zeros((height, width), dtype=np.float64)
    count = max(1, int(width * height / 3500 * density))
    jj, ii = np.meshgrid(np.arange(height, dtype=np.float64), np.arange(width, dtype=np.float64), indexing="ij")
    for _ in range(count):
        cx = rng.uniform(0, width)
        cy = rng.uniform(0, height)
        radius = rng.uniform(1.5, 14.0)
        peak = rng.uniform(0.25, 1.0)
        shade = rng.uniform(0.0, 45.0)
        x0 = max(0, int(cx - radius - 1))
        x1 = min(width, int(cx + radius + 2))
        y0 = max(0, int(cy - radius - 1))
        y1 = min(height, int(cy + radius + 2))
        if x0 >= x1 or y0 >= y1:
            continue
        d2 = (ii[y0:y1, x0:x1] - cx) ** 2 + (jj[y0:y1, x0:x1] - cy) ** 2
        fall = 1.0 - d2 / (radius * radius)
        fall[fall < 0.0] = 0.0
        blob = peak * fall * fall
        region = alpha[y0:y1, x0:x1]
        newly = blob > region
        tint[y0:y1, x0:x1][newly] = shade
        alpha[y0:y1, x0:x1] = np.maximum(region, blob)
    out = np.zeros((height, width, 4), dtype=np.uint8)
    out[:, :, 0] = np.floor(tint + 0.5)
    out[:, :, 1] = np.floor(tint * 0.9 + 0.5)
    out[:, :, 2] = np.floor(tint * 0.8 + 0.5)
    out[:, :, 3] = np.floor(alpha * 255.0 + 0.5)
    return out


def dust_overlay(image: np.ndarray, asset: np.ndarray, seed: int, alpha_range=(0.2, 0.6)) -> np.ndarray:
    """Composite a randomly cropped, rotated, semi-transparent slice of
    the dust asset over the tile: out = (1 - aA) * image + aA * dust,
    drawn per pixel where A is the transformed asset alpha and a the
    global alpha drawn from alpha_range."""
    if asset.ndim != 3 or asset.shape[2] != 4:
        raise AssetError("dust asset must be RGBA")
    lo, hi = _check_range(alpha_range, "dust_alpha_range")
    h, w = image.shape[:2]
    ah, aw = asset.shape[:2]
    rng = Rng(seed)
    angle = rng.uniform(0.0, 360.0)
    global_alpha = rng.uniform(lo, hi)
    side = min(ah, aw)
    off_x = rng.randint(aw - side + 1)
    off_y = rng.randint(ah - side + 1)
    patch = asset[off_y : off_y + side, off_x : off_x + side].astype(np.float64)
    patch = _rotate_rgba(patch, angle)
    patch = _scale_to(patch, h, w)
    a = (patch[:, :, 3] / 255.0) * global_alpha
    dust_rgb = patch[:, :, :3]
    out = (1.0 - a[:, :, None]) * image + a[:, :, None] * dust_rgb
    return np.floor(out + 0.5).astype(np.uint8)


_ASSET_CACHE: dict = {}


def get_dust_asset(config: DegradationConfig) -> np.ndarray:
    """Load the configured dust asset, or build the procedural one from
    the master seed. Cached per (source, seed)."""
    key = (config.dust_asset, config.master_seed)
    cached = _ASSET_CACHE.get(key)
    if cached is not None:
        return cached
    if config.dust_asset == "procedural":
        asset = generate_dust_asset(1024, 1024, seed=config.master_seed)
    else:
        asset = read_rgba_png(config.dust_asset)
        if min(asset.shape[:2]) < 8:
            raise AssetError("dust asset smaller than 8x8 is unusable")
    _ASSET_CACHE[key] = asset
    return asset


FADE_STAGE = 0
DUST_STAGE = 1


def degrade_tile(image: np.ndarray, config: DegradationConfig, tile_id: int, asset: np.ndarray | None = None) -> np.ndarray:
    """Run the enabled stages (fade -> dust -> blur) for one tile."""
    tile_seed = derive_tile_seed(config.master_seed, tile_id)
    out = image
    if config.fade_enabled:
        stage_seed = derive_tile_seed(tile_seed, FADE_STAGE)
        rng = Rng(stage_seed)
        lo, hi = config.fade_strength_range
        strength = rng.uniform(lo, hi)
        out = color_fade(out, strength, seed=stage_seed, noise=config.fade_noise)
    if config.dust_enabled:
        if asset is None:
            asset = get_dust_asset(config)
        stage_seed = derive_tile_seed(tile_seed, DUST_STAGE)
        out = dust_overlay(out, asset, stage_seed, config.dust_alpha_range)
    if config.blur_enabled:
        out = gaussian_blur_3x3(out)
    if out is image:
        out = image.copy()
    return out
