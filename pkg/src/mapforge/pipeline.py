"""Dataset assembly: render, degrade, persist, split.

A dataset directory holds maps/{pair_id}.png, masks/{pair_id}.png, a
manifest.txt describing every pair, and optionally a split.txt. The
manifest is a block of # header lines followed by one JSON object per
line; it is written only after every tile landed, so a crashed build
never leaves a directory that parses as a dataset. All files go
through write-to-temp-then-rename, keeping partial output quarantined
under names no reader accepts.
"""

from __future__ import annotations

import contextlib
import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .degrade import DegradationConfig, degradation_hash, degrade_tile, get_dust_asset
from .errors import ParseError, PipelineError, ValidationError
from .geo import TileWindow
from .pngio import write_map_png, write_mask_png
from .render import render_pair
from .seeding import Rng, derive_tile_seed
from .style import StyleSpec, style_hash

__all__ = [
    "ManifestEntry",
    "DatasetManifest",
    "SplitAssignment",
    "build_dataset",
    "split_manifest",
    "read_manifest",
    "write_manifest",
    "read_split",
    "write_split",
    "derive_tile_seed",
]

VARIANTS = ("style_transferred", "stochastic", "external")
MANIFEST_NAME = "manifest.txt"
SPLIT_NAME = "split.txt"


@dataclass
class ManifestEntry:
    pair_id: str
    tile_id: int
    map_path: str
    mask_path: str
    window: TileWindow
    seed: int
    variant: str

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    style_hash: str
    degradation_hash: str
    class_count: int = 5

    def __post_init__(self):
        ids = [e.pair_id for e in self.entries]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})[0]
            raise ValidationError(f"duplicate pair_id {dup!r} in manifest")

    def pair_ids(self) -> list[str]:
        return [e.pair_id for e in self.entries]


def _window_to_dict(w: TileWindow) -> dict:
    return {
        "origin_x": w.origin_x,
        "origin_y": w.origin_y,
        "width_px": w.width_px,
        "height_px": w.height_px,
        "scale": w.scale,
        "tile_id": w.tile_id,
    }


def _window_from_dict(d: dict) -> TileWindow:
    return TileWindow(
        origin_x=float(d["origin_x"]),
        origin_y=float(d["origin_y"]),
        width_px=int(d["width_px"]),
        height_px=int(d["height_px"]),
        scale=float(d["scale"]),
        tile_id=int(d["tile_id"]),
    )


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}-{threading.get_ident()}")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}-{threading.get_ident()}")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def write_manifest(manifest: DatasetManifest, path, check_paths: bool = True) -> None:
    path = Path(path)
    if check_paths:
        base = path.parent
        for e in manifest.entries:
            for rel in (e.map_path, e.mask_path):
                if not (base / rel).exists():
                    raise ValidationError(f"manifest references missing file {rel}")
    lines = [
        "# mapforge dataset manifest v1",
        f"# style_hash: {manifest.style_hash}",
        f"# degradation_hash: {manifest.degradation_hash}",
        f"# class_count: {manifest.class_count}",
    ]
    for e in manifest.entries:
        lines.append(
            json.dumps(
                {
                    "pair_id": e.pair_id,
                    "tile_id": e.tile_id,
                    "map_path": e.map_path,
                    "mask_path": e.mask_path,
                    "window": _window_to_dict(e.window),
                    "seed": e.seed,
                    "variant": e.variant,
                },
                sort_keys=True,
            )
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    header: dict[str, str] = {}
    entries: list[ManifestEntry] = []
    saw_version = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body == "mapforge dataset manifest v1":
                saw_version = True
            elif ":" in body:
                key, value = body.split(":", 1)
                header[key.strip()] = value.strip()
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"manifest line is not valid JSON: {exc.msg}", line=lineno) from exc
        try:
            entries.append(
                ManifestEntry(
                    pair_id=str(obj["pair_id"]),
                    tile_id=int(obj["tile_id"]),
                    map_path=str(obj["map_path"]),
                    mask_path=str(obj["mask_path"]),
                    window=_window_from_dict(obj["window"]),
                    seed=int(obj["seed"]),
                    variant=str(obj["variant"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"manifest entry is malformed: {exc}", line=lineno) from exc
    if not saw_version:
        raise ParseError(f"{path} is not a mapforge manifest (missing version header)")
    return DatasetManifest(
        entries=entries,
        style_hash=header.get("style_hash", ""),
        degradation_hash=header.get("degradation_hash", ""),
        class_count=int(header.get("class_count", "5")),
    )


def _build_one(features, style, window, config, asset, out_dir: Path):
    pair_id = f"{window.tile_id:06d}"
    try:
        map_rgb, mask = render_pair(features, style, window)
        degraded = degrade_tile(map_rgb, config, window.tile_id, asset=asset)
        map_rel = f"maps/{pair_id}.png"
        mask_rel = f"masks/{pair_id}.png"
        map_tmp = out_dir / (map_rel + f".tmp-{os.getpid()}-{threading.get_ident()}")
        mask_tmp = out_dir / (mask_rel + f".tmp-{os.getpid()}-{threading.get_ident()}")
        try:
            write_map_png(degraded, map_tmp)
            write_mask_png(mask, mask_tmp)
            os.replace(map_tmp, out_dir / map_rel)
            os.replace(mask_tmp, out_dir / mask_rel)
        except BaseException:
            for tmp in (map_tmp, mask_tmp):
                with contextlib.suppress(OSError):
                    os.unlink(tmp)
            raise
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(str(exc), tile_id=window.tile_id) from exc
    return ManifestEntry(
        pair_id=pair_id,
        tile_id=window.tile_id,
        map_path=map_rel,
        mask_path=mask_rel,
        window=window,
        seed=derive_tile_seed(config.master_seed, window.tile_id),
        variant="stochastic" if _any_stage(config) else "style_transferred",
    )


def _any_stage(config: DegradationConfig) -> bool:
    return config.fade_enabled or config.dust_enabled or config.blur_enabled


def build_dataset(
    features,
    style: StyleSpec,
    windows: list[TileWindow],
    config: DegradationConfig,
    out_dir,
    jobs: int = 1,
) -> DatasetManifest:
    """Render and degrade every window into out_dir and return the manifest.

    Tile builds fan out over `jobs` workers; the manifest is assembled
    in tile order afterwards, so output never depends on scheduling.
    """
    if jobs < 1:
        raise ValidationError("jobs must be at least 1")
    out_dir = Path(out_dir)
    (out_dir / "maps").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    asset = get_dust_asset(config) if config.dust_enabled else None
    ordered = sorted(windows, key=lambda w: w.tile_id)
    seen = set()
    for w in ordered:
        if w.tile_id in seen:
            raise ValidationError(f"duplicate tile_id {w.tile_id} in window list")
        seen.add(w.tile_id)

    if jobs == 1 or len(ordered) <= 1:
        entries = [_build_one(features, style, w, config, asset, out_dir) for w in ordered]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_build_one, features, style, w, config, asset, out_dir)
                for w in ordered
            ]
            entries = [f.result() for f in futures]

    manifest = DatasetManifest(
        entries=entries,
        style_hash=style_hash(style),
        degradation_hash=degradation_hash(config),
        class_count=5,
    )
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


# --- train/validation split ---------------------------------------------------


@dataclass
class SplitAssignment:
    train: frozenset[str]
    val: frozenset[str]
    seed: int
    ratio: float


def split_manifest(manifest: DatasetManifest, ratio: float, seed: int) -> SplitAssignment:
    """Partition pair_ids into train/val by a seeded Fisher-Yates shuffle.

    Ids are sorted lexicographically first, so two manifests with the
    same ids split identically regardless of entry order. Train size is
    floor(ratio * N) with ratio read at decimal face value, so 0.8 of
    2269 is exactly 1815 even though 0.8 has no binary representation.
    """
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"split ratio must lie strictly between 0 and 1, got {ratio}")
    ids = sorted(manifest.pair_ids())
    if not ids:
        raise ValidationError("cannot split an empty manifest")
    rng = Rng(seed)
    for i in range(len(ids) - 1, 0, -1):
        j = rng.next_u64() % (i + 1)
        ids[i], ids[j] = ids[j], ids[i]
    n_train = int(Fraction(str(ratio)) * len(ids))
    return SplitAssignment(
        train=frozenset(ids[:n_train]),
        val=frozenset(ids[n_train:]),
        seed=seed,
        ratio=ratio,
    )


def write_split(split: SplitAssignment, path) -> None:
    lines = [
        "# mapforge split v1",
        f"# seed: {split.seed}",
        f"# ratio: {split.ratio}",
    ]
    for pid in sorted(split.train | split.val):
        lines.append(f"{pid}\t{'train' if pid in split.train else 'val'}")
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_split(path) -> SplitAssignment:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read split {path}: {exc}") from exc
    seed = 0
    ratio = 0.0
    train: set[str] = set()
    val: set[str] = set()
    saw_version = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body == "mapforge split v1":
                saw_version = True
            elif body.startswith("seed:"):
                seed = int(body.split(":", 1)[1])
            elif body.startswith("ratio:"):
                ratio = float(body.split(":", 1)[1])
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1] not in ("train", "val"):
            raise ParseError("split line must be '<pair_id>\\t<train|val>'", line=lineno)
        (train if parts[1] == "train" else val).add(parts[0])
    if not saw_version:
        raise ParseError(f"{path} is not a mapforge split file (missing version header)")
    if train & val:
        raise ParseError("split assigns some pair_ids to both train and val")
    return SplitAssignment(train=frozenset(train), val=frozenset(val), seed=seed, ratio=ratio)
