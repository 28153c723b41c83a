"""One handler per operation; the HTTP layer and the CLI both call these.

Handlers take a request model, do the work on the local filesystem,
and return a response model. Failures raise MapforgeError subclasses;
callers translate those into HTTP 400 payloads or CLI error lines.
"""

from __future__ import annotations

import contextlib
import dataclasses
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..degrade import (
    DegradationConfig,
    degradation_hash,
    degrade_tile,
    generate_dust_asset,
    get_dust_asset,
    load_degradation_config,
)
from ..errors import AssetError, ValidationError
from ..fid import fid_between_sets, load_features
from ..geo import ClassMap, features_bbox, load_class_map, parse_feature_collection, tile_windows
from ..metrics import (
    ConfusionMatrix,
    accumulate_confusion,
    metrics_report,
    report_to_dict,
    write_report,
)
from ..mosaic import layout_from_manifest, stitch, write_worldfile
from ..pipeline import (
    MANIFEST_NAME,
    SPLIT_NAME,
    DatasetManifest,
    _atomic_write_bytes,
    build_dataset,
    read_manifest,
    split_manifest,
    write_manifest,
    write_split,
)
from ..pngio import read_map_png, read_mask_png, write_map_png, write_mask_png, write_rgba_png
from ..render import estimate_class_color
from ..seeding import derive_tile_seed
from ..style import default_style, load_style
from . import models


def handle_health() -> models.HealthResponse:
    return models.HealthResponse(status="ok", version=__version__)


def handle_render(req: models.RenderRequest) -> models.RenderResponse:
    try:
        text = Path(req.features_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise AssetError(f"cannot read features file: {exc}") from exc
    class_map = load_class_map(req.class_map_path) if req.class_map_path else ClassMap((), None)
    parsed = parse_feature_collection(text, class_map)
    style = load_style(req.style_path) if req.style_path else default_style()
    bbox = req.bbox if req.bbox else features_bbox(parsed.features)
    windows = tile_windows(bbox, req.patch, req.scale, req.overlap_px)
    config = DegradationConfig(blur_enabled=False, dust_enabled=False, fade_enabled=False)
    manifest = build_dataset(parsed.features, style, windows, config, req.out_dir, jobs=req.jobs)
    return models.RenderResponse(
        out_dir=req.out_dir,
        manifest_path=str(Path(req.out_dir) / MANIFEST_NAME),
        pair_count=len(manifest.entries),
        skipped_features=parsed.skipped,
        style_hash=manifest.style_hash,
        degradation_hash=manifest.degradation_hash,
    )


def _degrade_one(entry, src_base: Path, out_dir: Path, config, asset):
    img = read_map_png(src_base / entry.map_path)
    degraded = degrade_tile(img, config, entry.tile_id, asset=asset)
    suffix = f".tmp-{os.getpid()}-{threading.get_ident()}"
    map_tmp = out_dir / (entry.map_path + suffix)
    mask_tmp = out_dir / (entry.mask_path + suffix)
    try:
        write_map_png(degraded, map_tmp)
        os.replace(map_tmp, out_dir / entry.map_path)
        # Masks are never degraded; carry the bytes over untouched.
        _atomic_write_bytes(out_dir / entry.mask_path, (src_base / entry.mask_path).read_bytes())
    except BaseException:
        for tmp in (map_tmp, mask_tmp):
            with contextlib.suppress(OSError):
                os.unlink(tmp)
        raise
    variant = "stochastic" if (config.fade_enabled or config.dust_enabled or config.blur_enabled) else entry.variant
    return dataclasses.replace(
        entry,
        seed=derive_tile_seed(config.master_seed, entry.tile_id),
        variant=variant,
    )


def handle_degrade(req: models.DegradeRequest) -> models.DegradeResponse:
    manifest_path = Path(req.manifest_path)
    manifest = read_manifest(manifest_path)
    src_base = manifest_path.parent
    config = load_degradation_config(req.config_path) if req.config_path else DegradationConfig()
    if req.seed is not None:
        config = dataclasses.replace(config, master_seed=req.seed)
    out_dir = Path(req.out_dir)
    if out_dir.resolve() == src_base.resolve():
        raise ValidationError("degrade output directory must differ from the source dataset")
    (out_dir / "maps").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    asset = get_dust_asset(config) if config.dust_enabled else None

    if req.jobs == 1 or len(manifest.entries) <= 1:
        entries = [_degrade_one(e, src_base, out_dir, config, asset) for e in manifest.entries]
    else:
        with ThreadPoolExecutor(max_workers=req.jobs) as pool:
            futures = [
                pool.submit(_degrade_one, e, src_base, out_dir, config, asset)
                for e in manifest.entries
            ]
            entries = [f.result() for f in futures]

    out_manifest = DatasetManifest(
        entries=entries,
        style_hash=manifest.style_hash,
        degradation_hash=degradation_hash(config),
        class_count=manifest.class_count,
    )
    write_manifest(out_manifest, out_dir / MANIFEST_NAME)
    return models.DegradeResponse(
        out_dir=req.out_dir,
        manifest_path=str(out_dir / MANIFEST_NAME),
        pair_count=len(entries),
        degradation_hash=out_manifest.degradation_hash,
    )


def handle_split(req: models.SplitRequest) -> models.SplitResponse:
    manifest_path = Path(req.manifest_path)
    manifest = read_manifest(manifest_path)
    split = split_manifest(manifest, req.ratio, req.seed)
    out_path = Path(req.out_path) if req.out_path else manifest_path.parent / SPLIT_NAME
    write_split(split, out_path)
    return models.SplitResponse(
        out_path=str(out_path),
        train_count=len(split.train),
        val_count=len(split.val),
    )


def handle_fid(req: models.FidRequest) -> models.FidResponse:
    fa = load_features(req.features_a)
    fb = load_features(req.features_b)
    if fa.d != fb.d:
        raise ValidationError(f"feature dimensions differ: {fa.d} vs {fb.d}")
    return models.FidResponse(fid=fid_between_sets(fa, fb), n_a=fa.n, n_b=fb.n, dim=fa.d)


def handle_eval(req: models.EvalRequest) -> models.EvalResponse:
    pred_dir, truth_dir = Path(req.pred_dir), Path(req.truth_dir)
    pred_names = sorted(p.name for p in pred_dir.glob("*.png"))
    truth_names = sorted(p.name for p in truth_dir.glob("*.png"))
    if not pred_names:
        raise ValidationError(f"no .png masks under {pred_dir}")
    if pred_names != truth_names:
        only_pred = sorted(set(pred_names) - set(truth_names))[:3]
        only_truth = sorted(set(truth_names) - set(pred_names))[:3]
        raise ValidationError(
            f"mask sets differ: only in pred {only_pred}, only in truth {only_truth}"
        )
    cm = ConfusionMatrix(req.class_count)
    for name in pred_names:
        pred = read_mask_png(pred_dir / name, class_count=req.class_count)
        truth = read_mask_png(truth_dir / name, class_count=req.class_count)
        accumulate_confusion(pred, truth, cm)
    report = metrics_report(cm)
    if req.report_path:
        write_report(report, req.report_path)
    return models.EvalResponse(
        pairs_evaluated=len(pred_names),
        report=report_to_dict(report),
        confusion=cm.counts.tolist(),
    )


def handle_mosaic(req: models.MosaicRequest) -> models.MosaicResponse:
    layout = layout_from_manifest(req.manifest_path, req.kind)
    out = stitch(layout, req.kind)
    out_path = Path(req.out_path)
    if out_path.parent != Path("."):
        out_path.parent.mkdir(parents=True, exist_ok=True)
    if req.kind == "rgb":
        write_map_png(out, out_path)
    else:
        write_mask_png(out, out_path)
    if req.worldfile_path:
        write_worldfile(layout, req.worldfile_path)
    return models.MosaicResponse(
        out_path=str(out_path),
        width_px=layout.width_px,
        height_px=layout.height_px,
        worldfile_path=req.worldfile_path,
    )


def handle_probe_color(req: models.ProbeColorRequest) -> models.ProbeColorResponse:
    image = read_map_png(req.image_path)
    return models.ProbeColorResponse(rgb=estimate_class_color(image, (req.x, req.y)))


def handle_dust_gen(req: models.DustGenRequest) -> models.DustGenResponse:
    asset = generate_dust_asset(req.width, req.height, seed=req.seed, density=req.density)
    write_rgba_png(asset, req.out_path)
    return models.DustGenResponse(out_path=req.out_path, width=req.width, height=req.height)
