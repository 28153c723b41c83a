"""Bitmap text: glyph sources, metrics, stamping, and label placement.

Sizes derive from the style's font_px: the integer scale factor is
k = max(1, font_px // glyph_height), a glyph advances 6k pixels
(5k of ink, k of gap) and a string of n characters is (6n - 1)k wide
and 7k tall. House numbers and place names sit axis-aligned, centered
on the polygon centroid, and are dropped when their box is larger than
the polygon's pixel bounding box. Street names repeat along the line
at a stride of text width plus the rule's repeat gap, every glyph
rotated to the tangent of the segment it sits on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import fontdata
from .errors import ConfigError
from .geo import Polygon, Polyline


@dataclass(frozen=True)
class GlyphSource:
    width: int
    height: int
    glyphs: dict

    def glyph(self, char: str):
        g = self.glyphs.get(char)
        if g is None:
            full = (1 << self.width) - 1
            side = (1 << (self.width - 1)) | 1
            g = (full,) + (side,) * (self.height - 2) + (full,)
        return g


PACKAGED = GlyphSource(fontdata.GLYPH_WIDTH, fontdata.GLYPH_HEIGHT, dict(fontdata.GLYPHS))


def load_glyph_source(path=None) -> GlyphSource:
    """Load an external glyph table (JSON) or fall back to the packaged
    5x7 set. Schema: {"width": int, "height": int,
    "glyphs": {"<char>": [<height> row ints]}}."""
    if path is None:
        return PACKAGED
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        width = int(doc["width"])
        height = int(doc["height"])
        glyphs = {}
        for char, rows in doc["glyphs"].items():
            rows = tuple(int(r) for r in rows)
            if len(rows) != height or any(r < 0 or r >= (1 << width) for r in rows):
                raise ConfigError(f"glyph {char!r} has malformed rows")
            glyphs[str(char)] = rows
        if width < 1 or height < 1:
            raise ConfigError("glyph dimensions must be positive")
        return GlyphSource(width, height, glyphs)
    except OSError as exc:
        raise ConfigError(f"cannot read glyph source: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed glyph source: {exc}") from exc


def text_scale(font_px: int, source: GlyphSource = PACKAGED) -> int:
    return max(1, font_px // source.height)


def text_size(text: str, font_px: int, source: GlyphSource = PACKAGED):
    """(width, height) in pixels of the rendered string."""
    k = text_scale(font_px, source)
    n = len(text)
    if n == 0:
        return 0, 0
    return ((source.width + 1) * n - 1) * k, source.height * k


@dataclass
class LabelReport:
    placed: int = 0
    skipped: int = 0
    coverage: np.ndarray | None = None
    notes: list = field(default_factory=list)


def _rhu(x: float) -> int:
    return int(math.floor(x + 0.5))


def stamp_text(image, x: int, y: int, text: str, k: int, rgb, source: GlyphSource = PACKAGED, coverage=None):
    """Draw axis-aligned text with its top-left corner at (x, y)."""
    h, w = image.shape[:2]
    gw, gh = source.width, source.height
    for ci, char in enumerate(text):
        rows = source.glyph(char)
        cx = x + ci * (gw + 1) * k
        for r, bits in enumerate(rows):
            if not bits:
                continue
            for c in range(gw):
                if bits & (1 << (gw - 1 - c)):
                    y0 = y + r * k
                    x0 = cx + c * k
                    ys = slice(max(0, y0), min(h, y0 + k))
                    xs = slice(max(0, x0), min(w, x0 + k))
                    if ys.start < ys.stop and xs.start < xs.stop:
                        image[ys, xs] = rgb
                        if coverage is not None:
                            coverage[ys, xs] = True
    return image


def stamp_glyph_rotated(image, char: str, anchor_x: float, anchor_y: float, angle: float, k: int, rgb, source: GlyphSource = PACKAGED, coverage=None):
    """Draw one glyph whose left edge starts at the anchor point, rotated
    by angle (radians, screen convention: y grows downward), vertically
    centered on the anchor. Inverse mapping: each candidate pixel center
    is pulled back into glyph space and tested against the bitmap."""
    h, w = image.shape[:2]
    gw, gh = source.width, source.height
    rows = source.glyph(char)
    if not any(rows):
        return image
    cos_t = math.cos(angle)
    sin_t = math.sin(angle)
    u_max = gw * k
    v_half = gh * k / 2.0
    radius = math.hypot(u_max, v_half) + 1.0
    i0 = max(0, int(math.floor(anchor_x - radius)))
    i1 = min(w - 1, int(math.ceil(anchor_x + radius)))
    j0 = max(0, int(math.floor(anchor_y - radius)))
    j1 = min(h - 1, int(math.ceil(anchor_y + radius)))
    for j in range(j0, j1 + 1):
        py = j + 0.5 - anchor_y
        for i in range(i0, i1 + 1):
            px = i + 0.5 - anchor_x
            u = px * cos_t + py * sin_t
            v = -px * sin_t + py * cos_t + v_half
            if 0.0 <= u < u_max and 0.0 <= v < gh * k:
                col = int(u // k)
                row = int(v // k)
                if rows[row] & (1 << (gw - 1 - col)):
                    image[j, i] = rgb
                    if coverage is not None:
                        coverage[j, i] = True
    return image


def polygon_centroid(ring):
    """Area centroid by the shoelace formula; vertex mean for degenerate
    (zero-area) rings."""
    a2 = 0.0
    cx = 0.0
    cy = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        cross = x1 * y2 - x2 * y1
        a2 += cross
        cx += (x1 + x2) * cross
        cy += (y1 + y2) * cross
    if a2 == 0.0:
        xs = [p[0] for p in ring]
        ys = [p[1] for p in ring]
        return sum(xs) / n, sum(ys) / n
    return cx / (3.0 * a2), cy / (3.0 * a2)


def _ring_bbox(ring):
    xs = [p[0] for p in ring]
    ys = [p[1] for p in ring]
    return min(xs), min(ys), max(xs), max(ys)


class _ArcWalk:
    """Arc-length parameterization of a polyline in pixel coordinates."""

    def __init__(self, points_px):
        self.pts = points_px
        self.seg_len = []
        for (ax, ay), (bx, by) in zip(points_px, points_px[1:]):
            self.seg_len.append(math.hypot(bx - ax, by - ay))
        self.total = sum(self.seg_len)

    def locate(self, s: float):
        """(x, y, tangent angle) at arc position s, clamped to the path."""
        if s <= 0:
            s = 0.0
        remaining = s
        for idx, length in enumerate(self.seg_len):
            if remaining <= length or idx == len(self.seg_len) - 1:
                ax, ay = self.pts[idx]
                bx, by = self.pts[idx + 1]
                if length == 0.0:
                    return ax, ay, 0.0
                t = min(remaining / length, 1.0)
                return ax + t * (bx - ax), ay + t * (by - ay), math.atan2(by - ay, bx - ax)
            remaining -= length
        ax, ay = self.pts[0]
        return ax, ay, 0.0


def place_labels(features, style, window, image, pixel_scale: int = 1, source: GlyphSource | None = None):
    """Draw all enabled labels onto the image (modified in place).

    Returns (image, LabelReport); the report carries placed/skipped
    counts and a boolean bitmap of every pixel the labels touched.
    pixel_scale is the supersampling factor of the target canvas, so
    text keeps the same geometry relative to the final 1x tile.
    """
    if source is None:
        source = load_glyph_source(style.font)
    h, w = image.shape[:2]
    report = LabelReport(coverage=np.zeros((h, w), dtype=bool))
    ox, oy, s = window.origin_x, window.origin_y, window.scale

    for feat in features:
        if not feat.label or feat.label_kind == "none":
            continue
        rule = style.label_rule(feat.label_kind)
        if rule is None:
            continue
        k = text_scale(rule.font_px, source) * pixel_scale
        text = feat.label
        text_w = ((source.width + 1) * len(text) - 1) * k
        text_h = source.height * k

        if feat.label_kind in ("house_number", "place_name"):
            if not isinstance(feat.geometry, Polygon):
                report.skipped += 1
                report.notes.append(f"{feat.label_kind} label on a line feature")
                continue
            ring = feat.geometry.exterior
            cx, cy = polygon_centroid(ring)
            bx0, by0, bx1, by1 = _ring_bbox(ring)
            if text_w > (bx1 - bx0) * s or text_h > (by1 - by0) * s:
                report.skipped += 1
                continue
            cx_px = (cx - ox) * s
            cy_px = (oy - cy) * s
            stamp_text(
                image,
                _rhu(cx_px - text_w / 2.0),
                _rhu(cy_px - text_h / 2.0),
                text,
                k,
                rule.rgb,
                source,
                report.coverage,
            )
            report.placed += 1
        elif feat.label_kind == "street_name":
            if not isinstance(feat.geometry, Polyline):
                report.skipped += 1
                continue
            pts_px = [((x - ox) * s, (oy - y) * s) for x, y in feat.geometry.points]
            walk = _ArcWalk(pts_px)
            if text_w > walk.total:
                report.skipped += 1
                continue
            gap = rule.repeat_gap_px * pixel_scale
            stride = text_w + gap
            count = int((walk.total - text_w) // stride) + 1
            # Center the repeated placements inside the line's length.
            used = count * text_w + (count - 1) * gap
            start = (walk.total - used) / 2.0
            advance = (source.width + 1) * k
            for rep in range(count):
                s0 = start + rep * stride
                for ci, char in enumerate(text):
                    gx, gy, angle = walk.locate(s0 + ci * advance)
                    stamp_glyph_rotated(
                        image, char, gx, gy, angle, k, rule.rgb, source, report.coverage
                    )
                report.placed += 1
        else:
            report.skipped += 1
    return image, report
