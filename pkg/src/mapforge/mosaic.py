"""Reassemble per-window patches into one georeferenced raster.

Every patch window must live on the same pixel grid (one shared scale,
offsets that are whole pixels apart). Overlaps resolve deterministically:
RGB takes the last write in ascending tile_id, masks take a per-pixel
majority vote with ties going to the lowest class index. The optional
world file uses the six-line affine convention whose translation names
the center of the upper-left pixel.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AssetError, LayoutError
from .geo import TileWindow
from .pipeline import read_manifest

_ALIGN_TOL = 1e-6


@dataclass
class MosaicLayout:
    entries: list[tuple[Path, TileWindow]]
    width_px: int
    height_px: int
    scale: float
    origin_x: float  # world x of the output's left edge
    origin_y: float  # world y of the output's top edge

    @property
    def affine(self) -> tuple[float, float, float, float, float, float]:
        """World-file coefficients: x size, rotations, y size, then the
        world coordinates of the upper-left pixel center."""
        step = 1.0 / self.scale
        return (step, 0.0, 0.0, -step, self.origin_x + 0.5 * step, self.origin_y - 0.5 * step)


def _pixel_offset(value: float, name: str) -> int:
    rounded = round(value)
    if abs(value - rounded) > _ALIGN_TOL:
        raise LayoutError(f"window {name} offset {value} is not a whole number of pixels")
    return int(rounded)


def build_layout(entries: list[tuple[Path | str, TileWindow]]) -> MosaicLayout:
    if not entries:
        raise LayoutError("cannot build a mosaic from zero patches")
    scale = entries[0][1].scale
    for _, w in entries:
        if w.scale != scale:
            raise LayoutError(f"mixed scales in layout: {w.scale} vs {scale}")
    left = min(w.origin_x for _, w in entries)
    top = max(w.origin_y for _, w in entries)
    right = max(w.origin_x + w.width_px / scale for _, w in entries)
    bottom = min(w.origin_y - w.height_px / scale for _, w in entries)
    width_px = _pixel_offset((right - left) * scale, "extent width")
    height_px = _pixel_offset((top - bottom) * scale, "extent height")
    return MosaicLayout(
        entries=[(Path(p), w) for p, w in entries],
        width_px=width_px,
        height_px=height_px,
        scale=scale,
        origin_x=left,
        origin_y=top,
    )


def layout_from_manifest(manifest_path, kind: str = "rgb") -> MosaicLayout:
    """Layout over a dataset directory; kind picks map or mask patches."""
    if kind not in ("rgb", "mask"):
        raise LayoutError(f"kind must be 'rgb' or 'mask', got {kind!r}")
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    base = manifest_path.parent
    if not manifest.entries:
        raise LayoutError("manifest holds no entries to stitch")
    pairs = [
        (base / (e.map_path if kind == "rgb" else e.mask_path), e.window)
        for e in manifest.entries
    ]
    return build_layout(pairs)


def _placement(layout: MosaicLayout, window: TileWindow) -> tuple[int, int]:
    col = _pixel_offset((window.origin_x - layout.origin_x) * layout.scale, "column")
    row = _pixel_offset((layout.origin_y - window.origin_y) * layout.scale, "row")
    return row, col


def stitch(layout: MosaicLayout, kind: str = "rgb") -> np.ndarray:
    """Assemble the mosaic; pixels no patch covers stay 0."""
    if kind == "rgb":
        return _stitch_rgb(layout)
    if kind == "mask":
        return _stitch_mask(layout)
    raise LayoutError(f"kind must be 'rgb' or 'mask', got {kind!r}")


def _load(path: Path, window: TileWindow, kind: str) -> np.ndarray:
    from .pngio import read_map_png, read_mask_png

    try:
        patch = read_map_png(path) if kind == "rgb" else read_mask_png(path)
    except AssetError as exc:
        raise LayoutError(str(exc)) from exc
    if patch.shape[:2] != (window.height_px, window.width_px):
        raise LayoutError(
            f"patch {path.name} is {patch.shape[1]}x{patch.shape[0]} px "
            f"but its window says {window.width_px}x{window.height_px}"
        )
    return patch


def _stitch_rgb(layout: MosaicLayout) -> np.ndarray:
    canvas = np.zeros((layout.height_px, layout.width_px, 3), dtype=np.uint8)
    for path, window in sorted(layout.entries, key=lambda e: e[1].tile_id):
        patch = _load(path, window, "rgb")
        row, col = _placement(layout, window)
        canvas[row : row + window.height_px, col : col + window.width_px] = patch
    return canvas


def _stitch_mask(layout: MosaicLayout, class_count: int = 5) -> np.ndarray:
    votes = np.zeros((layout.height_px, layout.width_px, class_count), dtype=np.uint32)
    for path, window in layout.entries:
        patch = _load(path, window, "mask")
        row, col = _placement(layout, window)
        region = votes[row : row + window.height_px, col : col + window.width_px]
        for c in range(1, class_count + 1):
            region[:, :, c - 1] += patch == c
    covered = votes.sum(axis=2) > 0
    # argmax returns the first maximum, which is the lowest class index.
    out = (votes.argmax(axis=2) + 1).astype(np.uint8)
    out[~covered] = 0
    return out


def write_worldfile(layout: MosaicLayout, path) -> None:
    Path(path).write_text("".join(f"{c}\n" for c in layout.affine), encoding="utf-8")


def read_worldfile(path) -> tuple[float, ...]:
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if len(lines) != 6:
        raise LayoutError(f"world file must hold 6 lines, found {len(lines)}")
    try:
        return tuple(float(ln) for ln in lines)
    except ValueError as exc:
        raise LayoutError(f"world file holds a non-numeric line: {exc}") from exc
