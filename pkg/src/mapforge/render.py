"""Tile rendering: styled map images and their aligned class masks.

The map image draws, in order: background fill, features by ascending
(z_order, input index) with polygon fill then ring stroke and polyline
stroke, the coordinate grid, labels. With anti_alias on, everything is
drawn on a 4x supersampled canvas and box-averaged down; masks are
always rendered at one sample per pixel and know nothing about grid,
labels, polygon outlines, or anti-aliasing.
"""

from __future__ import annotations

import numpy as np

from .errors import PixelRangeError
from .geo import Polygon, Polyline, TileWindow
from .raster import (
    SUPERSAMPLE,
    downsample_box,
    grid_spans,
    new_image,
    polygon_coverage,
    ribbon_coverage,
    supersampled_window,
)
from .style import StyleSpec
from .text import load_glyph_source, place_labels


def _draw_features(canvas, features, style, window, width_scale):
    order = sorted(range(len(features)), key=lambda i: (features[i].z_order, i))
    for idx in order:
        feat = features[idx]
        cs = style.classes[feat.class_id]
        if isinstance(feat.geometry, Polygon):
            cov = polygon_coverage(feat.geometry, window)
            canvas[cov] = cs.fill_rgb
            if cs.stroke_width_px > 0:
                for ring in feat.geometry.rings:
                    edge = ribbon_coverage(
                        ring, window, cs.stroke_width_px * width_scale, closed=True
                    )
                    canvas[edge] = cs.stroke_rgb
        elif isinstance(feat.geometry, Polyline):
            cov = ribbon_coverage(
                feat.geometry.points, window, cs.stroke_width_px * width_scale
            )
            canvas[cov] = cs.stroke_rgb
    return canvas


def draw_grid(style: StyleSpec, window: TileWindow, image, width_scale: int = 1):
    """Paint grid lines onto the image (modified in place)."""
    if style.grid is None:
        return image
    cols, rows = grid_spans(window, style.grid.spacing, style.grid.width_px * width_scale)
    for start, stop in cols:
        image[:, start:stop] = style.grid.rgb
    for start, stop in rows:
        image[start:stop, :] = style.grid.rgb
    return image


def render_map_tile(features, style: StyleSpec, window: TileWindow, glyphs=None):
    """Rasterize the styled map image for one tile window.

    Returns an (H, W, 3) uint8 array. Raises a configuration error when
    labels are enabled but the style's glyph source cannot be loaded.
    """
    if glyphs is None and style.labels_enabled():
        glyphs = load_glyph_source(style.font)
    factor = SUPERSAMPLE if style.anti_alias else 1
    rwin = supersampled_window(window, factor) if factor > 1 else window
    canvas = new_image(rwin, style.classes[style.background_class].fill_rgb)
    _draw_features(canvas, features, style, rwin, factor)
    draw_grid(style, rwin, canvas, factor)
    if style.labels_enabled():
        place_labels(features, style, rwin, canvas, pixel_scale=factor, source=glyphs)
    if factor > 1:
        canvas = downsample_box(canvas, factor)
    return canvas


def render_mask_tile(features, style: StyleSpec, window: TileWindow):
    """Rasterize the class mask for one tile window.

    Every pixel gets the class of the highest (z_order, input index)
    polygon containing its center; uncovered pixels fall back to the
    widest covering polyline ribbon, then to the background class.
    Always one sample per pixel so values stay categorical.
    """
    mask = np.full((window.height_px, window.width_px), style.background_class, dtype=np.uint8)
    lines = [(i, f) for i, f in enumerate(features) if isinstance(f.geometry, Polyline)]
    lines.sort(key=lambda p: (style.classes[p[1].class_id].stroke_width_px, p[1].z_order, p[0]))
    for _, feat in lines:
        width = style.classes[feat.class_id].stroke_width_px
        cov = ribbon_coverage(feat.geometry.points, window, width)
        mask[cov] = feat.class_id
    polys = [(i, f) for i, f in enumerate(features) if isinstance(f.geometry, Polygon)]
    polys.sort(key=lambda p: (p[1].z_order, p[0]))
    for _, feat in polys:
        cov = polygon_coverage(feat.geometry, window)
        mask[cov] = feat.class_id
    return mask


def render_pair(features, style: StyleSpec, window: TileWindow, glyphs=None):
    """(map image, class mask) for one window — the dataset unit."""
    return render_map_tile(features, style, window, glyphs), render_mask_tile(features, style, window)


def estimate_class_color(raster: np.ndarray, point):
    """Mean RGB of the 5x5 neighborhood around the point, the window
    clamped at image borders, each channel rounded half up."""
    x, y = int(point[0]), int(point[1])
    h, w = raster.shape[:2]
    if not (0 <= x < w and 0 <= y < h):
        raise PixelRangeError(f"probe point ({x}, {y}) outside {w}x{h} image")
    x0, x1 = max(0, x - 2), min(w, x + 3)
    y0, y1 = max(0, y - 2), min(h, y + 3)
    patch = raster[y0:y1, x0:x1].astype(np.int64)
    n = patch.shape[0] * patch.shape[1]
    sums = patch.reshape(n, -1).sum(axis=0)
    return tuple(int((2 * v + n) // (2 * n)) for v in sums)
