"""Declarative cartographic style: per-class colors and strokes, the
coordinate grid, label rules, and the anti-alias switch.

Styles live in a JSON config file with one block per class:

    {
      "background_class": 4,
      "anti_alias": true,
      "font": null,
      "classes": {
        "1": {"fill_rgb": [170, 60, 50], "stroke_rgb": [60, 30, 20],
              "stroke_width_px": 1.5},
        ...
      },
      "grid": {"spacing": 500.0, "rgb": [90, 90, 110], "width_px": 1.0},
      "labels": {
        "house_number": {"enabled": true, "font_px": 10, "rgb": [40, 40, 40]},
        "street_name":  {"enabled": true, "font_px": 12, "rgb": [40, 40, 40],
                          "repeat_gap_px": 100},
        "place_name":   {"enabled": false, "font_px": 14, "rgb": [40, 40, 40]}
      }
    }

"grid": null disables the grid; omitting a label kind disables it.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError, ParseError
from .geo import CLASS_IDS

LABEL_RULE_KINDS = ("house_number", "street_name", "place_name")


def _check_rgb(rgb, what):
    rgb = tuple(int(v) for v in rgb)
    if len(rgb) != 3 or any(v < 0 or v > 255 for v in rgb):
        raise ConfigError(f"{what}: rgb must be three values in 0..255")
    return rgb


@dataclass(frozen=True)
class ClassStyle:
    fill_rgb: tuple
    stroke_rgb: tuple
    stroke_width_px: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.stroke_width_px) and self.stroke_width_px >= 0):
            raise ConfigError("stroke_width_px must be finite and >= 0")


@dataclass(frozen=True)
class GridSpec:
    spacing: float
    rgb: tuple
    width_px: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.spacing) and self.spacing > 0):
            raise ConfigError("grid spacing must be a positive map distance")
        if not (math.isfinite(self.width_px) and self.width_px >= 0):
            raise ConfigError("grid width_px must be finite and >= 0")


@dataclass(frozen=True)
class LabelRule:
    enabled: bool
    font_px: int
    rgb: tuple
    repeat_gap_px: float = 100.0

    def __post_init__(self):
        if self.font_px < 1:
            raise ConfigError("label font_px must be >= 1")


@dataclass(frozen=True)
class StyleSpec:
    classes: dict
    background_class: int
    anti_alias: bool = True
    grid: GridSpec | None = None
    labels: dict = field(default_factory=dict)
    font: str | None = None

    def __post_init__(self):
        if self.background_class not in CLASS_IDS:
            raise ConfigError(f"background_class {self.background_class} outside 1..5")
        missing = [c for c in CLASS_IDS if c not in self.classes]
        if missing:
            raise ConfigError(f"style missing class blocks for {missing}")

    def label_rule(self, kind: str) -> LabelRule | None:
        rule = self.labels.get(kind)
        return rule if rule is not None and rule.enabled else None

    def labels_enabled(self) -> bool:
        return any(rule.enabled for rule in self.labels.values())


def default_style(anti_alias: bool = True) -> StyleSpec:
    """Built-in style loosely following late-19th-century urban sheet
    conventions; all values user-overridable via the JSON config."""
    return StyleSpec(
        classes={
            1: ClassStyle((170, 60, 50), (60, 30, 20), 1.0),
            2: ClassStyle((250, 250, 245), (80, 70, 60), 2.0),
            3: ClassStyle((120, 170, 90), (70, 100, 50), 1.0),
            4: ClassStyle((230, 220, 200), (120, 110, 90), 1.0),
            5: ClassStyle((140, 170, 200), (70, 90, 120), 1.0),
        },
        background_class=4,
        anti_alias=anti_alias,
        grid=GridSpec(spacing=500.0, rgb=(90, 90, 110), width_px=1.0),
        labels={
            "house_number": LabelRule(True, 8, (40, 40, 40)),
            "street_name": LabelRule(True, 10, (40, 40, 40), repeat_gap_px=100.0),
            "place_name": LabelRule(False, 12, (40, 40, 40)),
        },
        font=None,
    )


def style_from_dict(doc: dict) -> StyleSpec:
    try:
        classes = {}
        for key, block in doc.get("classes", {}).items():
            cid = int(key)
            classes[cid] = ClassStyle(
                fill_rgb=_check_rgb(block["fill_rgb"], f"class {cid} fill"),
                stroke_rgb=_check_rgb(block.get("stroke_rgb", block["fill_rgb"]), f"class {cid} stroke"),
                stroke_width_px=float(block.get("stroke_width_px", 0.0)),
            )
        grid = None
        if doc.get("grid") is not None:
            g = doc["grid"]
            grid = GridSpec(float(g["spacing"]), _check_rgb(g["rgb"], "grid"), float(g.get("width_px", 1.0)))
        labels = {}
        for kind, block in (doc.get("labels") or {}).items():
            if kind not in LABEL_RULE_KINDS:
                raise ConfigError(f"unknown label kind {kind!r}")
            labels[kind] = LabelRule(
                enabled=bool(block.get("enabled", True)),
                font_px=int(block.get("font_px", 10)),
                rgb=_check_rgb(block.get("rgb", (0, 0, 0)), f"label {kind}"),
                repeat_gap_px=float(block.get("repeat_gap_px", 100.0)),
            )
        return StyleSpec(
            classes=classes,
            background_class=int(doc.get("background_class", 4)),
            anti_alias=bool(doc.get("anti_alias", True)),
            grid=grid,
            labels=labels,
            font=doc.get("font"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed style config: {exc}") from exc


def style_to_dict(style: StyleSpec) -> dict:
    doc = {
        "background_class": style.background_class,
        "anti_alias": style.anti_alias,
        "font": style.font,
        "classes": {
            str(cid): {
                "fill_rgb": list(cs.fill_rgb),
                "stroke_rgb": list(cs.stroke_rgb),
                "stroke_width_px": cs.stroke_width_px,
            }
            for cid, cs in sorted(style.classes.items())
        },
        "grid": None
        if style.grid is None
        else {
            "spacing": style.grid.spacing,
            "rgb": list(style.grid.rgb),
            "width_px": style.grid.width_px,
        },
        "labels": {
            kind: {
                "enabled": rule.enabled,
                "font_px": rule.font_px,
                "rgb": list(rule.rgb),
                "repeat_gap_px": rule.repeat_gap_px,
            }
            for kind, rule in sorted(style.labels.items())
        },
    }
    return doc


def load_style(path) -> StyleSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read style: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"style config: {exc.msg}", exc.lineno, exc.colno) from exc
    return style_from_dict(doc)


def save_style(style: StyleSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(style_to_dict(style), fh, indent=2)
        fh.write("\n")


def style_hash(style: StyleSpec) -> str:
    canonical = json.dumps(style_to_dict(style), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()
