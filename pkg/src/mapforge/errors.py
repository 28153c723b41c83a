"""Exception hierarchy shared across the toolkit."""


class MapforgeError(Exception):
    """Base class for all toolkit errors. `kind` feeds the machine-parsable
    CLI error line and the service error payload."""

    kind = "error"


class ParseError(MapforgeError):
    """Malformed input document. Carries the line/column when known."""

    kind = "parse"

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ClassificationError(MapforgeError):
    """A feature could not be mapped onto a land-cover class."""

    kind = "classification"


class ConfigError(MapforgeError):
    """Invalid style, degradation, or run configuration."""

    kind = "config"


class ValidationError(MapforgeError):
    """Inputs violate an operation precondition."""

    kind = "validation"


class PixelRangeError(MapforgeError):
    """A pixel coordinate lies outside the raster."""

    kind = "range"


class AssetError(MapforgeError):
    """An external asset (dust image, font) is missing or unreadable."""

    kind = "asset"


class FormatError(MapforgeError):
    """A binary interchange file is malformed. Carries the byte offset."""

    kind = "format"

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class LayoutError(MapforgeError):
    """Mosaic layout is inconsistent or references missing patches."""

    kind = "layout"


class PipelineError(MapforgeError):
    """A dataset build step failed. Carries the failing tile id."""

    kind = "pipeline"

    def __init__(self, message, tile_id=None):
        if tile_id is not None:
            message = f"tile {tile_id}: {message}"
        super().__init__(message)
        self.tile_id = tile_id
