"""Synthetic training-data bootstrapping and evaluation toolkit for
historical-map segmentation.

Renders semantically classed vector data in a configurable historical
cartographic style, degrades the rendered tiles with simulated
data-dependent noise, and ships the evaluation stack (segmentation
metrics, Frechet distance, mosaic reassembly) needed to measure
synthetic-data quality against a real map corpus.
"""

__version__ = "0.1.0"

CLASS_COUNT = 5

# Land-cover classes carried by every mask pixel.
CLASS_BUILDINGS = 1
CLASS_INFRASTRUCTURE = 2
CLASS_RECREATIONAL = 3
CLASS_SEALED = 4
CLASS_WATER = 5

CLASS_NAMES = {
    CLASS_BUILDINGS: "buildings",
    CLASS_INFRASTRUCTURE: "infrastructure",
    CLASS_RECREATIONAL: "recreational",
    CLASS_SEALED: "sealed",
    CLASS_WATER: "water",
}

# Fixed palette used for the human-viewable "colorized" mask sidecar.
CLASS_PALETTE = {
    CLASS_BUILDINGS: (170, 60, 50),
    CLASS_INFRASTRUCTURE: (250, 250, 245),
    CLASS_RECREATIONAL: (120, 170, 90),
    CLASS_SEALED: (230, 220, 200),
    CLASS_WATER: (140, 170, 200),
}
