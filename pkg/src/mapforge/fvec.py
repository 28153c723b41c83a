"""Feature-vector interchange file.

Layout, all little-endian: 4 magic bytes "FVEC", u32 row count n,
u32 dimension d, then n*d IEEE-754 f32 values row-major. The format is
the contract between this package and external embedding tools, so
errors carry the byte offset where parsing failed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import AssetError, FormatError, ValidationError

MAGIC = b"FVEC"
_HEADER = struct.Struct("<4sII")


@dataclass
class FeatureSet:
    """n rows of d-dimensional features, finite, n >= 2."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValidationError("feature data must be a 2-d matrix")
        n, d = self.data.shape
        if n < 2:
            raise ValidationError(f"need at least 2 feature rows, got {n}")
        if d < 1:
            raise ValidationError("feature dimension must be at least 1")
        if not np.isfinite(self.data).all():
            bad = np.argwhere(~np.isfinite(self.data))[0]
            raise ValidationError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def write_feature_file(fs: FeatureSet, path) -> None:
    payload = fs.data.astype("<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, fs.n, fs.d))
        fh.write(payload)


def read_feature_file(path) -> FeatureSet:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise AssetError(f"cannot read feature file {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise FormatError(
            f"truncated header: {len(raw)} bytes, need {_HEADER.size}", offset=len(raw)
        )
    magic, n, d = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    expected = _HEADER.size + n * d * 4
    if len(raw) < expected:
        raise FormatError(
            f"truncated payload: {len(raw)} bytes, need {expected} for {n}x{d}",
            offset=len(raw),
        )
    if len(raw) > expected:
        raise FormatError(f"{len(raw) - expected} trailing bytes after payload", offset=expected)
    values = np.frombuffer(raw, dtype="<f4", count=n * d, offset=_HEADER.size)
    finite = np.isfinite(values)
    if not finite.all():
        i = int(np.argmin(finite))
        raise FormatError(
            f"non-finite value at element {i}", offset=_HEADER.size + i * 4
        )
    try:
        return FeatureSet(values.reshape(n, d))
    except ValidationError as exc:
        raise FormatError(f"invalid feature set in file: {exc}", offset=_HEADER.size) from exc
