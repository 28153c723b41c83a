"""Classed vector data: parsing, class mapping, and tile enumeration.

The input format is a GeoJSON-subset FeatureCollection: Polygon (outer
ring plus holes), MultiPolygon (expanded to one record per polygon) and
LineString geometries with free-form string properties. Anything else is
skipped and counted. Coordinates are assumed pre-projected to a planar
system in map units.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fnmatch import fnmatchcase

from .errors import ClassificationError, ConfigError, ParseError, ValidationError

CLASS_IDS = (1, 2, 3, 4, 5)

# Draw priority when a feature does not override it: ground surfaces
# first, buildings last so they occlude everything underneath.
DEFAULT_Z_ORDER = {4: 0, 3: 1, 5: 2, 2: 3, 1: 4}

LABEL_KINDS = ("none", "house_number", "street_name", "place_name")

# Property keys the parser recognizes directly; they take precedence
# over ClassMap rules and make parse -> serialize -> parse an identity.
RESERVED_CLASS_KEY = "class_id"
RESERVED_Z_KEY = "z_order"
RESERVED_LABEL_KEY = "label"
RESERVED_LABEL_KIND_KEY = "label_kind"


@dataclass(frozen=True)
class Polygon:
    """Outer ring plus zero or more hole rings, each a tuple of (x, y)."""

    rings: tuple

    @property
    def exterior(self):
        return self.rings[0]


@dataclass(frozen=True)
class Polyline:
    points: tuple


@dataclass(frozen=True)
class FeatureRecord:
    geometry: object
    class_id: int
    z_order: int
    label: str | None = None
    label_kind: str = "none"

    def __post_init__(self):
        if self.class_id not in CLASS_IDS:
            raise ValidationError(f"class_id {self.class_id} outside 1..5")
        if self.label_kind not in LABEL_KINDS:
            raise ValidationError(f"unknown label_kind {self.label_kind!r}")
        if isinstance(self.geometry, Polygon):
            for ring in self.geometry.rings:
                if len(set(ring)) < 3:
                    raise ValidationError("polygon ring needs >= 3 distinct vertices")
                _check_finite(ring)
        elif isinstance(self.geometry, Polyline):
            if len(self.geometry.points) < 2:
                raise ValidationError("polyline needs >= 2 vertices")
            _check_finite(self.geometry.points)
        else:
            raise ValidationError(f"unsupported geometry {type(self.geometry).__name__}")


def _check_finite(points):
    for x, y in points:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValidationError("non-finite coordinate")


@dataclass(frozen=True)
class ClassRule:
    key: str
    pattern: str
    class_id: int


@dataclass(frozen=True)
class ClassMap:
    """Ordered first-match rules from property (key, value glob) to class."""

    rules: tuple
    default_class: int | None = None

    def __post_init__(self):
        for rule in self.rules:
            if rule.class_id not in CLASS_IDS:
                raise ConfigError(f"rule targets invalid class {rule.class_id}")
        if self.default_class is not None and self.default_class not in CLASS_IDS:
            raise ConfigError(f"invalid default_class {self.default_class}")

    def classify(self, properties: dict) -> int | None:
        for rule in self.rules:
            if rule.key in properties:
                value = str(properties[rule.key])
                if fnmatchcase(value, rule.pattern):
                    return rule.class_id
        return self.default_class


def load_class_map(path) -> ClassMap:
    """Read a ClassMap from its JSON config file.

    Schema: {"default_class": int|null,
             "rules": [{"key": str, "pattern": str, "class": int}, ...]}
    Patterns are shell-style globs matched against the stringified
    property value; "*" accepts any value.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read class map: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"class map: {exc.msg}", exc.lineno, exc.colno) from exc
    try:
        rules = tuple(
            ClassRule(str(r["key"]), str(r.get("pattern", "*")), int(r["class"]))
            for r in doc.get("rules", [])
        )
        return ClassMap(rules=rules, default_class=doc.get("default_class"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed class map entry: {exc}") from exc


@dataclass(frozen=True)
class TileWindow:
    """One rendered patch: a map-space window plus pixel dimensions.

    origin is the top-left corner in map units (origin_y is the window's
    maximum y); pixel column i, row j has its center at
    (origin_x + (i + 0.5) / scale, origin_y - (j + 0.5) / scale).
    """

    origin_x: float
    origin_y: float
    width_px: int
    height_px: int
    scale: float
    tile_id: int = 0

    def __post_init__(self):
        if self.width_px < 1 or self.height_px < 1:
            raise ValidationError("window pixel dimensions must be >= 1")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValidationError("scale must be a positive finite number")

    @property
    def map_width(self) -> float:
        return self.width_px / self.scale

    @property
    def map_height(self) -> float:
        return self.height_px / self.scale

    def contains_map_point(self, x: float, y: float) -> bool:
        return (
            self.origin_x <= x <= self.origin_x + self.map_width
            and self.origin_y - self.map_height <= y <= self.origin_y
        )


@dataclass
class ParseResult:
    features: list
    skipped: int = 0
    warnings: list = field(default_factory=list)


def _ring_from_coords(coords, index):
    pts = [(float(x), float(y)) for x, y in (c[:2] for c in coords)]
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(set(pts)) < 3:
        raise ParseError(f"feature {index}: ring with fewer than 3 distinct vertices")
    return tuple(pts)


def _feature_label(props, geometry):
    if RESERVED_LABEL_KEY in props:
        label = props[RESERVED_LABEL_KEY]
        kind = props.get(RESERVED_LABEL_KIND_KEY, "none")
        return (str(label), str(kind)) if label is not None else (None, "none")
    if isinstance(geometry, Polygon):
        if "addr:housenumber" in props:
            return str(props["addr:housenumber"]), "house_number"
        if "name" in props:
            return str(props["name"]), "place_name"
    elif "name" in props:
        return str(props["name"]), "street_name"
    return None, "none"


def parse_feature_collection(text: str, class_map: ClassMap) -> ParseResult:
    """Parse a GeoJSON-subset document into FeatureRecords.

    Unsupported geometry kinds are skipped and counted; a feature whose
    properties match no rule raises ClassificationError naming its index.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc

    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError("document is not a FeatureCollection")
    raw_features = doc.get("features", [])
    if not isinstance(raw_features, list):
        raise ParseError("features member must be a list")

    result = ParseResult(features=[])
    for index, raw in enumerate(raw_features):
        if not isinstance(raw, dict) or raw.get("type") != "Feature":
            raise ParseError(f"feature {index} is not a Feature object")
        geom = raw.get("geometry")
        if not isinstance(geom, dict):
            result.skipped += 1
            result.warnings.append(f"feature {index}: null geometry skipped")
            continue
        props = raw.get("properties") or {}
        gtype = geom.get("type")
        try:
            coords = geom.get("coordinates", [])
            if gtype == "Polygon":
                geometries = [Polygon(tuple(_ring_from_coords(r, index) for r in coords))]
            elif gtype == "MultiPolygon":
                geometries = [
                    Polygon(tuple(_ring_from_coords(r, index) for r in poly))
                    for poly in coords
                ]
            elif gtype == "LineString":
                pts = tuple((float(x), float(y)) for x, y in (c[:2] for c in coords))
                geometries = [Polyline(pts)]
            else:
                result.skipped += 1
                result.warnings.append(f"feature {index}: {gtype} skipped")
                continue
        except (TypeError, ValueError) as exc:
            raise ParseError(f"feature {index}: bad coordinates: {exc}") from exc

        if RESERVED_CLASS_KEY in props:
            try:
                class_id = int(props[RESERVED_CLASS_KEY])
            except (TypeError, ValueError) as exc:
                raise ParseError(f"feature {index}: bad {RESERVED_CLASS_KEY}") from exc
        else:
            class_id = class_map.classify(props)
            if class_id is None:
                raise ClassificationError(
                    f"feature {index} matches no rule and the class map has no default"
                )

        if RESERVED_Z_KEY in props:
            z_order = int(props[RESERVED_Z_KEY])
        else:
            z_order = DEFAULT_Z_ORDER[class_id]

        for geometry in geometries:
            label, label_kind = _feature_label(props, geometry)
            try:
                result.features.append(
                    FeatureRecord(geometry, class_id, z_order, label, label_kind)
                )
            except ValidationError as exc:
                raise ParseError(f"feature {index}: {exc}") from exc
    return result


def serialize_feature_collection(features) -> str:
    """Write FeatureRecords back to the subset format. Class, draw order
    and labels travel as reserved properties so a reparse reproduces the
    records exactly."""
    out = []
    for rec in features:
        props = {RESERVED_CLASS_KEY: rec.class_id, RESERVED_Z_KEY: rec.z_order}
        if rec.label is not None:
            props[RESERVED_LABEL_KEY] = rec.label
            props[RESERVED_LABEL_KIND_KEY] = rec.label_kind
        if isinstance(rec.geometry, Polygon):
            geom = {
                "type": "Polygon",
                "coordinates": [
                    [list(pt) for pt in ring] + [list(ring[0])]
                    for ring in rec.geometry.rings
                ],
            }
        else:
            geom = {
                "type": "LineString",
                "coordinates": [list(pt) for pt in rec.geometry.points],
            }
        out.append({"type": "Feature", "geometry": geom, "properties": props})
    return json.dumps({"type": "FeatureCollection", "features": out}, indent=1)


def features_bbox(features) -> tuple[float, float, float, float]:
    """Tight (x0, y0, x1, y1) bounds over every vertex of every feature."""
    xs: list[float] = []
    ys: list[float] = []
    for rec in features:
        if isinstance(rec.geometry, Polygon):
            for ring in rec.geometry.rings:
                for x, y in ring:
                    xs.append(x)
                    ys.append(y)
        else:
            for x, y in rec.geometry.points:
                xs.append(x)
                ys.append(y)
    if not xs:
        raise ValidationError("cannot compute a bounding box of zero features")
    return (min(xs), min(ys), max(xs), max(ys))


def tile_windows(bbox, patch_px, scale: float, overlap_px: int = 0) -> list:
    """Enumerate fixed-size tile windows over a bounding box.

    Windows step by (patch - overlap) pixels in row-major order, rows
    from the top edge of the bbox downward. The final row/column starts
    on the regular stride grid, so it extends past the bbox edge rather
    than shrinking; every emitted window is full pixel size and the
    union always covers the bbox.
    """
    x0, y0, x1, y1 = (float(v) for v in bbox)
    if not (x1 > x0 and y1 > y0):
        raise ValidationError("bbox must satisfy x1 > x0 and y1 > y0")
    w_px, h_px = int(patch_px[0]), int(patch_px[1])
    if w_px < 1 or h_px < 1:
        raise ValidationError("patch dimensions must be >= 1 px")
    overlap_px = int(overlap_px)
    if overlap_px < 0:
        raise ConfigError("overlap must be >= 0")
    if overlap_px >= w_px or overlap_px >= h_px:
        raise ConfigError("overlap must be smaller than the patch dimensions")

    stride_x = w_px - overlap_px
    stride_y = h_px - overlap_px
    extent_x_px = (x1 - x0) * scale
    extent_y_px = (y1 - y0) * scale

    def origins(extent_px, stride, patch):
        # One window when the patch already covers the extent; otherwise
        # enough stride steps that the last window reaches the far edge.
        # The relative epsilon absorbs float dust in extent * scale.
        rem = extent_px - patch
        if rem <= extent_px * 1e-12:
            return [0]
        count = math.ceil(rem / stride) + 1
        return [k * stride for k in range(count)]

    cols = origins(extent_x_px, stride_x, w_px)
    rows = origins(extent_y_px, stride_y, h_px)

    windows = []
    tile_id = 0
    for row_px in rows:
        for col_px in cols:
            windows.append(
                TileWindow(
                    origin_x=x0 + col_px / scale,
                    origin_y=y1 - row_px / scale,
                    width_px=w_px,
                    height_px=h_px,
                    scale=scale,
                    tile_id=tile_id,
                )
            )
            tile_id += 1
    return windows
