"""Request/response bodies for every toolkit operation.

Paths in requests are interpreted on the machine running the handler,
which is the local filesystem for in-process CLI dispatch and the
server's filesystem when posted over HTTP.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class RenderRequest(BaseModel):
    features_path: str
    out_dir: str
    class_map_path: Optional[str] = None
    style_path: Optional[str] = None
    bbox: Optional[tuple[float, float, float, float]] = None
    patch: tuple[int, int] = (500, 500)
    overlap_px: int = Field(default=0, ge=0)
    scale: float = Field(default=1.0, gt=0)
    jobs: int = Field(default=1, ge=1)


class RenderResponse(BaseModel):
    out_dir: str
    manifest_path: str
    pair_count: int
    skipped_features: int
    style_hash: str
    degradation_hash: str


class DegradeRequest(BaseModel):
    manifest_path: str
    out_dir: str
    config_path: Optional[str] = None
    seed: Optional[int] = Field(default=None, ge=0)
    jobs: int = Field(default=1, ge=1)


class DegradeResponse(BaseModel):
    out_dir: str
    manifest_path: str
    pair_count: int
    degradation_hash: str


class SplitRequest(BaseModel):
    manifest_path: str
    ratio: float = 0.8
    seed: int = Field(default=0, ge=0)
    out_path: Optional[str] = None


class SplitResponse(BaseModel):
    out_path: str
    train_count: int
    val_count: int


class FidRequest(BaseModel):
    features_a: str
    features_b: str


class FidResponse(BaseModel):
    fid: float
    n_a: int
    n_b: int
    dim: int


class EvalRequest(BaseModel):
    pred_dir: str
    truth_dir: str
    report_path: Optional[str] = None
    class_count: int = Field(default=5, ge=1)


class EvalResponse(BaseModel):
    pairs_evaluated: int
    report: dict
    confusion: list[list[int]]


class MosaicRequest(BaseModel):
    manifest_path: str
    kind: Literal["rgb", "mask"] = "rgb"
    out_path: str
    worldfile_path: Optional[str] = None


class MosaicResponse(BaseModel):
    out_path: str
    width_px: int
    height_px: int
    worldfile_path: Optional[str] = None


class ProbeColorRequest(BaseModel):
    image_path: str
    x: int
    y: int


class ProbeColorResponse(BaseModel):
    rgb: tuple[int, int, int]


class DustGenRequest(BaseModel):
    out_path: str
    width: int = Field(default=1024, ge=8)
    height: int = Field(default=1024, ge=8)
    seed: int = Field(default=0, ge=0)
    density: float = Field(default=1.0, gt=0)


class DustGenResponse(BaseModel):
    out_path: str
    width: int
    height: int


class HealthResponse(BaseModel):
    status: str
    version: str
