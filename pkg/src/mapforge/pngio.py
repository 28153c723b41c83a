"""PNG reading and writing for map images, class masks, and dust assets.

Maps are RGB8. Masks are single-channel 8-bit PNGs whose raw pixel
values are the class indices 1..5; a colorized RGB sidecar using the
fixed class palette exists purely for human inspection. Files are
written without timestamp or other ancillary chunks, so identical
arrays produce identical bytes.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from . import CLASS_PALETTE
from .errors import AssetError, FormatError


def write_map_png(image: np.ndarray, path) -> None:
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise FormatError("map image must be uint8 with shape (H, W, 3)")
    Image.fromarray(image, mode="RGB").save(path, format="PNG")


def read_map_png(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except OSError as exc:
        raise AssetError(f"cannot read image {path}: {exc}") from exc


def write_mask_png(mask: np.ndarray, path, class_count: int = 5) -> None:
    if mask.ndim != 2 or mask.dtype != np.uint8:
        raise FormatError("class mask must be uint8 with shape (H, W)")
    bad = (mask < 1) | (mask > class_count)
    if bad.any():
        values = sorted(int(v) for v in np.unique(mask[bad]))
        raise FormatError(f"refusing to write non-class values {values}")
    Image.fromarray(mask, mode="L").save(path, format="PNG")


def read_mask_png(path, class_count: int = 5, validate: bool = True) -> np.ndarray:
    try:
        with Image.open(path) as im:
            if im.mode != "L":
                im = im.convert("L")
            mask = np.asarray(im, dtype=np.uint8)
    except OSError as exc:
        raise AssetError(f"cannot read mask {path}: {exc}") from exc
    if validate:
        bad = (mask < 1) | (mask > class_count)
        if bad.any():
            values = sorted(int(v) for v in np.unique(mask[bad]))
            raise FormatError(f"mask {path} holds non-class values {values}")
    return mask


def write_colorized_png(mask: np.ndarray, path, palette: dict | None = None) -> None:
    """Human-viewable RGB rendering of a class mask."""
    palette = palette or CLASS_PALETTE
    lut = np.zeros((256, 3), dtype=np.uint8)
    for class_id, rgb in palette.items():
        lut[class_id] = rgb
    Image.fromarray(lut[mask], mode="RGB").save(path, format="PNG")


def colorized_to_mask(image: np.ndarray, palette: dict | None = None) -> np.ndarray:
    """Invert the colorized rendering back to class indices.

    Raises a format error naming any pixel color outside the palette.
    """
    palette = palette or CLASS_PALETTE
    h, w = image.shape[:2]
    mask = np.zeros((h, w), dtype=np.uint8)
    matched = np.zeros((h, w), dtype=bool)
    for class_id, rgb in palette.items():
        hit = np.all(image == np.asarray(rgb, dtype=np.uint8), axis=2)
        mask[hit] = class_id
        matched |= hit
    if not matched.all():
        j, i = np.argwhere(~matched)[0]
        raise FormatError(
            f"pixel ({int(i)}, {int(j)}) color {tuple(int(v) for v in image[j, i])} is not a palette color"
        )
    return mask


def write_rgba_png(image: np.ndarray, path) -> None:
    if image.ndim != 3 or image.shape[2] != 4 or image.dtype != np.uint8:
        raise FormatError("dust asset must be uint8 with shape (H, W, 4)")
    Image.fromarray(image, mode="RGBA").save(path, format="PNG")


def read_rgba_png(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGBA"), dtype=np.uint8)
    except OSError as exc:
        raise AssetError(f"cannot read asset {path}: {exc}") from exc
