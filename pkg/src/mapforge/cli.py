"""Command-line entry point.

Every subcommand builds the same request model the HTTP service
accepts, then either runs the handler in this process (the default) or
posts it to a running server given via --server. Data results (fid
score, probe color, eval report) go to stdout; progress lines go to
stderr; domain failures print one `error: <kind>: <message>` line on
stderr and exit 1. Argument errors exit 2 via argparse.
"""

from __future__ import annotations

import argparse
import sys

from .errors import MapforgeError
from .metrics import report_text_from_dict
from .service import handlers, models

_ENDPOINTS = {
    "render": ("/render", models.RenderResponse, handlers.handle_render),
    "degrade": ("/degrade", models.DegradeResponse, handlers.handle_degrade),
    "split": ("/split", models.SplitResponse, handlers.handle_split),
    "fid": ("/fid", models.FidResponse, handlers.handle_fid),
    "eval": ("/eval", models.EvalResponse, handlers.handle_eval),
    "mosaic": ("/mosaic", models.MosaicResponse, handlers.handle_mosaic),
    "probe-color": ("/probe-color", models.ProbeColorResponse, handlers.handle_probe_color),
    "dust-gen": ("/dust-gen", models.DustGenResponse, handlers.handle_dust_gen),
}


class _RemoteError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _dispatch(command: str, request, server: str | None):
    endpoint, response_type, handler = _ENDPOINTS[command]
    if not server:
        return handler(request)
    import httpx

    url = server.rstrip("/") + endpoint
    try:
        resp = httpx.post(url, json=request.model_dump(mode="json"), timeout=600.0)
    except httpx.HTTPError as exc:
        raise _RemoteError("server", f"cannot reach {url}: {exc}") from exc
    if resp.status_code == 400:
        payload = resp.json()
        raise _RemoteError(payload.get("error", "error"), payload.get("message", resp.text))
    if resp.status_code != 200:
        raise _RemoteError("server", f"{url} answered {resp.status_code}: {resp.text[:200]}")
    return response_type.model_validate(resp.json())


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapforge",
        description="Bootstrap paired training data for historical-map segmentation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--server",
        default=None,
        help="base URL of a running mapforge service; default runs in-process",
    )

    p = sub.add_parser("render", parents=[common], help="render vector features into map/mask pairs")
    p.add_argument("--features", required=True, help="feature collection JSON file")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--class-map", default=None, help="classification rules JSON")
    p.add_argument("--style", default=None, help="style JSON (default: built-in style)")
    p.add_argument("--bbox", type=float, nargs=4, metavar=("X0", "Y0", "X1", "Y1"), default=None,
                   help="map-unit bounds (default: tight bounds of the features)")
    p.add_argument("--patch", type=int, nargs=2, metavar=("W", "H"), default=(500, 500))
    p.add_argument("--overlap", type=int, default=0, help="window overlap in pixels")
    p.add_argument("--scale", type=float, default=1.0, help="pixels per map unit")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("degrade", parents=[common], help="write a degraded variant of a dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--config", default=None, help="degradation config JSON")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("split", parents=[common], help="deterministic train/val split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="split file path (default: split.txt beside manifest)")

    p = sub.add_parser("fid", parents=[common], help="Fréchet distance between two feature sets")
    p.add_argument("--features-a", required=True, help=".fvec file or directory of PNGs")
    p.add_argument("--features-b", required=True, help=".fvec file or directory of PNGs")

    p = sub.add_parser("eval", parents=[common], help="segmentation metrics for predicted masks")
    p.add_argument("--pred", required=True, help="directory of predicted mask PNGs")
    p.add_argument("--truth", required=True, help="directory of ground-truth mask PNGs")
    p.add_argument("--json", default=None, help="also write the report as JSON here")
    p.add_argument("--classes", type=int, default=5)

    p = sub.add_parser("mosaic", parents=[common], help="stitch dataset patches into one raster")
    p.add_argument("--manifest", required=True)
    p.add_argument("--kind", choices=["rgb", "mask"], default="rgb")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--worldfile", default=None, help="also write a 6-line world file here")

    p = sub.add_parser("probe-color", parents=[common], help="mean RGB of a 5x5 patch")
    p.add_argument("--image", required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)

    p = sub.add_parser("dust-gen", parents=[common], help="generate a procedural dust asset")
    p.add_argument("--out", required=True, help="output RGBA PNG path")
    p.add_argument("--width", type=int, default=1024)
    p.add_argument("--height", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=1.0)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8747)

    return parser


def _run_command(args: argparse.Namespace) -> int:
    cmd = args.command
    if cmd == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
        return 0

    if cmd == "render":
        req = models.RenderRequest(
            features_path=args.features,
            out_dir=args.out,
            class_map_path=args.class_map,
            style_path=args.style,
            bbox=tuple(args.bbox) if args.bbox else None,
            patch=tuple(args.patch),
            overlap_px=args.overlap,
            scale=args.scale,
            jobs=args.jobs,
        )
        resp = _dispatch(cmd, req, args.server)
        if resp.skipped_features:
            _log(f"skipped {resp.skipped_features} unsupported features")
        _log(f"rendered {resp.pair_count} pairs into {resp.out_dir}")
        return 0

    if cmd == "degrade":
        req = models.DegradeRequest(
            manifest_path=args.manifest,
            out_dir=args.out,
            config_path=args.config,
            seed=args.seed,
            jobs=args.jobs,
        )
        resp = _dispatch(cmd, req, args.server)
        _log(f"degraded {resp.pair_count} pairs into {resp.out_dir}")
        return 0

    if cmd == "split":
        req = models.SplitRequest(
            manifest_path=args.manifest, ratio=args.ratio, seed=args.seed, out_path=args.out
        )
        resp = _dispatch(cmd, req, args.server)
        _log(f"split {resp.train_count} train / {resp.val_count} val -> {resp.out_path}")
        return 0

    if cmd == "fid":
        req = models.FidRequest(features_a=args.features_a, features_b=args.features_b)
        resp = _dispatch(cmd, req, args.server)
        print(f"{resp.fid:.6f}")
        return 0

    if cmd == "eval":
        req = models.EvalRequest(
            pred_dir=args.pred, truth_dir=args.truth, report_path=args.json, class_count=args.classes
        )
        resp = _dispatch(cmd, req, args.server)
        sys.stdout.write(report_text_from_dict(resp.report))
        _log(f"evaluated {resp.pairs_evaluated} mask pairs")
        return 0

    if cmd == "mosaic":
        req = models.MosaicRequest(
            manifest_path=args.manifest,
            kind=args.kind,
            out_path=args.out,
            worldfile_path=args.worldfile,
        )
        resp = _dispatch(cmd, req, args.server)
        _log(f"stitched {resp.width_px}x{resp.height_px} {args.kind} mosaic -> {resp.out_path}")
        return 0

    if cmd == "probe-color":
        req = models.ProbeColorRequest(image_path=args.image, x=args.x, y=args.y)
        resp = _dispatch(cmd, req, args.server)
        print(f"{resp.rgb[0]} {resp.rgb[1]} {resp.rgb[2]}")
        return 0

    if cmd == "dust-gen":
        req = models.DustGenRequest(
            out_path=args.out,
            width=args.width,
            height=args.height,
            seed=args.seed,
            density=args.density,
        )
        resp = _dispatch(cmd, req, args.server)
        _log(f"wrote {resp.width}x{resp.height} dust asset -> {resp.out_path}")
        return 0

    raise AssertionError(f"unhandled command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run_command(args)
    except MapforgeError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return 1
    except _RemoteError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
