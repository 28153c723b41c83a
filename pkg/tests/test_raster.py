"""Scanline coverage versus the per-pixel reference, exactly."""

import math
import random

import numpy as np
import pytest

from mapforge.geo import Polygon, TileWindow
from mapforge.raster import (
    downsample_box,
    grid_spans,
    new_image,
    polygon_coverage,
    rasterize_polygon,
    ribbon_coverage,
    supersampled_window,
)

from .oracles import polygon_coverage_oracle, ribbon_coverage_oracle


def square(x0, y0, x1, y1):
    return Polygon((((x0, y0), (x1, y0), (x1, y1), (x0, y1)),))


class TestPolygonCoverage:
    def test_unit_square_half_open(self):
        win = TileWindow(0, 30, 30, 30, 1.0)
        cov = polygon_coverage(square(10, 10, 20, 20), win)
        expected = np.zeros((30, 30), dtype=bool)
        expected[10:20, 10:20] = True  # centers in [10,20) x [10,20)
        assert np.array_equal(cov, expected)

    def test_triangle_outside_window(self):
        win = TileWindow(0, 10, 10, 10, 1.0)
        tri = Polygon((((100, 100), (110, 100), (105, 110)),))
        assert not polygon_coverage(tri, win).any()

    def test_whole_window_square(self):
        win = TileWindow(0, 16, 16, 16, 1.0)
        cov = polygon_coverage(square(-1, -1, 17, 17), win)
        assert cov.all()

    def test_degenerate_polygon_empty_not_error(self):
        win = TileWindow(0, 10, 10, 10, 1.0)
        collinear = Polygon((((0, 0), (5, 5), (10, 10)),))
        assert not polygon_coverage(collinear, win).any()

    def test_hole_punched_out(self):
        outer = ((0, 0), (16, 0), (16, 16), (0, 16))
        hole = ((4, 4), (12, 4), (12, 12), (4, 12))
        win = TileWindow(0, 16, 16, 16, 1.0)
        cov = polygon_coverage(Polygon((outer, hole)), win)
        assert cov[1, 1] and not cov[8, 8]
        oracle = polygon_coverage_oracle(Polygon((outer, hole)), win)
        assert np.array_equal(cov, oracle)

    def test_edges_exactly_on_pixel_centers(self):
        # Boundaries at half-integers sit exactly on sampling points;
        # both implementations must agree pixel for pixel even there.
        win = TileWindow(0, 20, 20, 20, 1.0)
        poly = square(0.5, 0.5, 10.5, 10.5)
        assert np.array_equal(
            polygon_coverage(poly, win), polygon_coverage_oracle(poly, win)
        )

    def test_rasterize_polygon_alias(self):
        win = TileWindow(0, 8, 8, 8, 1.0)
        poly = square(1, 1, 5, 5)
        assert np.array_equal(rasterize_polygon(poly, win), polygon_coverage(poly, win))

    @pytest.mark.parametrize("seed", range(12))
    def test_random_polygons_match_oracle(self, seed):
        rng = random.Random(700 + seed)
        scale = rng.choice([0.37, 0.5, 1.0, 2.0, 3.25])
        ox = rng.uniform(-50, 50)
        oy = rng.uniform(-50, 50)
        win = TileWindow(ox, oy, 48, 48, scale, tile_id=seed)
        span = 48 / scale
        n = rng.randint(3, 8)
        ring = tuple(
            (ox + rng.uniform(-0.2, 1.2) * span, oy - rng.uniform(-0.2, 1.2) * span)
            for _ in range(n)
        )
        poly = Polygon((ring,))
        got = polygon_coverage(poly, win)
        want = polygon_coverage_oracle(poly, win)
        assert np.array_equal(got, want), f"seed {seed}: {np.count_nonzero(got != want)} pixels differ"


class TestRibbonCoverage:
    def test_zero_width_covers_nothing(self):
        win = TileWindow(0, 10, 10, 10, 1.0)
        pts = ((0, 5), (10, 5))
        assert not ribbon_coverage(pts, win, 0.0).any()
        assert not ribbon_coverage(pts, win, -2.0).any()

    def test_horizontal_stroke_band(self):
        win = TileWindow(0, 10, 10, 10, 1.0)
        cov = ribbon_coverage(((-5, 5), (15, 5)), win, 2.0)
        # Width 2 about y=5: centers with |yc - 5| <= 1 are rows 4 and 5.
        assert cov[4].all() and cov[5].all()
        assert not cov[3].any() and not cov[6].any()

    @pytest.mark.parametrize("seed", range(12))
    def test_random_polylines_match_oracle(self, seed):
        rng = random.Random(4200 + seed)
        scale = rng.choice([0.5, 1.0, 2.5])
        ox = rng.uniform(-20, 20)
        oy = rng.uniform(-20, 20)
        win = TileWindow(ox, oy, 40, 40, scale, tile_id=seed)
        span = 40 / scale
        pts = tuple(
            (ox + rng.uniform(-0.3, 1.3) * span, oy - rng.uniform(-0.3, 1.3) * span)
            for _ in range(rng.randint(2, 5))
        )
        width = rng.choice([0.5, 1.0, 3.0, 7.5])
        got = ribbon_coverage(pts, win, width)
        want = ribbon_coverage_oracle(pts, win, width)
        assert np.array_equal(got, want)

    def test_closed_ring_stroke_matches_oracle(self):
        win = TileWindow(0, 24, 24, 24, 1.0)
        ring = ((4, 4), (20, 6), (18, 19), (5, 17))
        got = ribbon_coverage(ring, win, 3.0, closed=True)
        want = ribbon_coverage_oracle(ring, win, 3.0, closed=True)
        assert np.array_equal(got, want)
        # The closing segment must actually be stroked.
        open_cov = ribbon_coverage(ring, win, 3.0, closed=False)
        assert got.sum() > open_cov.sum()

    def test_single_repeated_point(self):
        win = TileWindow(0, 10, 10, 10, 1.0)
        cov = ribbon_coverage(((5, 5), (5, 5)), win, 4.0)
        want = ribbon_coverage_oracle(((5, 5), (5, 5)), win, 4.0)
        assert np.array_equal(cov, want)
        assert cov[5, 5] or cov[4, 4]


class TestGridSpans:
    def test_multiples_inside_window_only(self):
        win = TileWindow(0, 0, 500, 500, 1.0)
        cols, rows = grid_spans(win, 500.0, 1.0)
        assert cols == [(0, 1)]
        assert rows == [(0, 1)]

    def test_spacing_larger_than_extent(self):
        win = TileWindow(10, 90, 80, 80, 1.0)
        cols, rows = grid_spans(win, 1000.0, 1.0)
        assert cols == [] and rows == []

    def test_thin_line_widened_to_one_pixel(self):
        win = TileWindow(0, 100, 100, 100, 1.0)
        cols, _ = grid_spans(win, 50.0, 0.2)
        assert all(stop - start == 1 for start, stop in cols)

    def test_wide_line_span(self):
        win = TileWindow(0, 100, 100, 100, 1.0)
        cols, _ = grid_spans(win, 50.0, 4.0)
        # Line at pixel 50 with width 4: [48, 52).
        assert (48, 52) in cols

    def test_interior_count(self):
        win = TileWindow(0, 1000, 1000, 1000, 1.0)
        cols, rows = grid_spans(win, 250.0, 1.0)
        # Lines at 0, 250, 500, 750; the far-edge line lands on pixel
        # 1000 which is outside a 1000 px window.
        assert cols == [(0, 1), (250, 251), (500, 501), (750, 751)]
        assert rows == [(0, 1), (250, 251), (500, 501), (750, 751)]


class TestSupersampling:
    def test_downsample_box_mean_half_up(self):
        img = np.zeros((4, 4, 3), dtype=np.uint8)
        img[0:2, 0:2] = (10, 20, 30)
        img[0:2, 2:4] = (11, 21, 31)
        out = downsample_box(img, 2)
        assert out.shape == (2, 2, 3)
        assert tuple(out[0, 0]) == (10, 20, 30)
        # Mean of 10,10,11,11 = 10.5 rounds half-up to 11 when mixed.
        mixed = np.zeros((2, 2, 3), dtype=np.uint8)
        mixed[:, 0] = 10
        mixed[:, 1] = 11
        assert tuple(downsample_box(mixed, 2)[0, 0]) == (11, 11, 11)

    def test_supersampled_window_scales_consistently(self):
        win = TileWindow(3.0, 7.0, 50, 40, 2.0, tile_id=9)
        big = supersampled_window(win, 4)
        assert (big.width_px, big.height_px) == (200, 160)
        assert big.scale == 8.0
        assert (big.origin_x, big.origin_y) == (3.0, 7.0)
        assert big.map_width == win.map_width

    def test_new_image_fill(self):
        win = TileWindow(0, 4, 4, 4, 1.0)
        img = new_image(win, (230, 220, 200))
        assert img.shape == (4, 4, 3)
        assert (img == (230, 220, 200)).all()
