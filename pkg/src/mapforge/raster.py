"""Low-level rasterization: scanline polygon fill, ribbon strokes, grid
lines, and supersampling.

Pixel ownership everywhere is pixel-center sampling. Pixel column i,
row j of a window has its center at map coordinates
(origin_x + (i + 0.5) / scale, origin_y - (j + 0.5) / scale); a polygon
owns a pixel when the center is inside by the even-odd rule, a stroke
owns it when the center is within half the stroke width of the path.
The arithmetic below deliberately mirrors the straightforward
per-pixel point test, expression for expression, so coverage is
reproducible down to the last borderline pixel.
"""

from __future__ import annotations

import math

import numpy as np

from .geo import Polygon, Polyline, TileWindow

SUPERSAMPLE = 4


def new_image(window: TileWindow, rgb) -> np.ndarray:
    img = np.empty((window.height_px, window.width_px, 3), dtype=np.uint8)
    img[:, :] = rgb
    return img


def pixel_centers(window: TileWindow):
    """Map coordinates of pixel centers: (xs of columns, ys of rows)."""
    xs = window.origin_x + (np.arange(window.width_px) + 0.5) / window.scale
    ys = window.origin_y - (np.arange(window.height_px) + 0.5) / window.scale
    return xs, ys


def polygon_coverage(polygon: Polygon, window: TileWindow) -> np.ndarray:
    """Boolean (H, W) bitmap of pixels whose centers fall inside the
    polygon (all rings together, even-odd rule).

    Scanline formulation: for each pixel row, collect the x positions
    where ring edges cross the row's center line, then a center is
    inside when an odd number of crossings lie strictly to its right.
    Degenerate zero-area polygons simply produce empty coverage.
    """
    h, w = window.height_px, window.width_px
    ox, oy, s = window.origin_x, window.origin_y, window.scale
    xs, ys = pixel_centers(window)

    row_crossings: list = [None] * h
    for ring in polygon.rings:
        n = len(ring)
        for k in range(n):
            x1, y1 = ring[k]
            x2, y2 = ring[(k + 1) % n]
            if y1 == y2:
                continue
            lo, hi = (y2, y1) if y1 > y2 else (y1, y2)
            # Candidate rows bracketing yc in [lo, hi); +-1 slack, the
            # exact predicate below decides.
            j0 = max(0, int(math.floor((oy - hi) * s - 0.5)) - 1)
            j1 = min(h - 1, int(math.ceil((oy - lo) * s - 0.5)) + 1)
            if j0 > j1:
                continue
            ycs = ys[j0 : j1 + 1]
            crosses = (y1 > ycs) != (y2 > ycs)
            if not crosses.any():
                continue
            x_int = x1 + (ycs[crosses] - y1) * (x2 - x1) / (y2 - y1)
            for j, xv in zip(np.nonzero(crosses)[0] + j0, x_int):
                if row_crossings[j] is None:
                    row_crossings[j] = []
                row_crossings[j].append(xv)

    coverage = np.zeros((h, w), dtype=bool)
    for j, crossings in enumerate(row_crossings):
        if not crossings:
            continue
        arr = np.sort(np.asarray(crossings))
        right_of = len(arr) - np.searchsorted(arr, xs, side="right")
        coverage[j] = (right_of & 1).astype(bool)
    return coverage


def _segments_px(points, window: TileWindow, closed: bool):
    ox, oy, s = window.origin_x, window.origin_y, window.scale
    px = [((x - ox) * s, (oy - y) * s) for x, y in points]
    segs = list(zip(px, px[1:]))
    if closed and len(px) > 2:
        segs.append((px[-1], px[0]))
    return segs


def ribbon_coverage(points, window: TileWindow, width_px: float, closed: bool = False) -> np.ndarray:
    """Boolean bitmap of pixels whose centers lie within width_px / 2 of
    the path (round joins fall out of the per-segment distance test).
    A width of zero or less covers nothing."""
    h, w = window.height_px, window.width_px
    coverage = np.zeros((h, w), dtype=bool)
    if width_px <= 0:
        return coverage
    half = width_px / 2.0
    h2 = half * half
    for (ax, ay), (bx, by) in _segments_px(points, window, closed):
        i0 = max(0, int(math.floor(min(ax, bx) - half)) - 1)
        i1 = min(w - 1, int(math.ceil(max(ax, bx) + half)) + 1)
        j0 = max(0, int(math.floor(min(ay, by) - half)) - 1)
        j1 = min(h - 1, int(math.ceil(max(ay, by) + half)) + 1)
        if i0 > i1 or j0 > j1:
            continue
        pxs = np.arange(i0, i1 + 1) + 0.5
        pys = (np.arange(j0, j1 + 1) + 0.5)[:, None]
        dx = bx - ax
        dy = by - ay
        length2 = dx * dx + dy * dy
        if length2 == 0.0:
            qx, qy = ax, ay
        else:
            t = np.clip(((pxs - ax) * dx + (pys - ay) * dy) / length2, 0.0, 1.0)
            qx = ax + t * dx
            qy = ay + t * dy
        ddx = pxs - qx
        ddy = pys - qy
        d2 = ddx * ddx + ddy * ddy
        coverage[j0 : j1 + 1, i0 : i1 + 1] |= d2 <= h2
    return coverage


def rasterize_polygon(polygon: Polygon, window: TileWindow) -> np.ndarray:
    """Public name for the scanline core (exposed for testing)."""
    return polygon_coverage(polygon, window)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def grid_spans(window: TileWindow, spacing: float, width_px: float):
    """Pixel spans of grid lines crossing the window.

    Returns (column_spans, row_spans), each a list of (start, stop)
    half-open pixel ranges. A line at map coordinate m maps to pixel
    position p and covers [round(p - w/2), round(p + w/2)), widened to
    one pixel minimum, rounding half up.
    """
    ox, oy, s = window.origin_x, window.origin_y, window.scale

    def spans(p_of_m, lo_m, hi_m, limit):
        out = []
        k0 = math.ceil(lo_m / spacing)
        k1 = math.floor(hi_m / spacing)
        for k in range(k0, k1 + 1):
            p = p_of_m(k * spacing)
            start = _round_half_up(p - width_px / 2.0)
            stop = _round_half_up(p + width_px / 2.0)
            if stop <= start:
                stop = start + 1
            start, stop = max(0, start), min(limit, stop)
            if start < stop:
                out.append((start, stop))
        return sorted(out)

    col_spans = spans(lambda m: (m - ox) * s, ox, ox + window.map_width, window.width_px)
    row_spans = spans(lambda m: (oy - m) * s, oy - window.map_height, oy, window.height_px)
    return col_spans, row_spans


def downsample_box(img: np.ndarray, factor: int) -> np.ndarray:
    """Box-average each factor x factor block, rounding half up."""
    h, w, c = img.shape
    assert h % factor == 0 and w % factor == 0
    blocks = img.reshape(h // factor, factor, w // factor, factor, c).astype(np.uint32)
    total = blocks.sum(axis=(1, 3))
    n = factor * factor
    return ((total + n // 2) // n).astype(np.uint8)


def supersampled_window(window: TileWindow, factor: int = SUPERSAMPLE) -> TileWindow:
    return TileWindow(
        origin_x=window.origin_x,
        origin_y=window.origin_y,
        width_px=window.width_px * factor,
        height_px=window.height_px * factor,
        scale=window.scale * factor,
        tile_id=window.tile_id,
    )
