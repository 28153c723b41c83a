"""FastAPI application: one POST endpoint per operation plus /health.

Domain errors surface as HTTP 400 with {"error": <kind>, "message": ...};
malformed request bodies get FastAPI's standard 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import MapforgeError
from . import handlers, models


def create_app() -> "FastAPI":
    app = FastAPI(title="mapforge", version=__version__)

    @app.exception_handler(MapforgeError)
    async def _domain_error(request: Request, exc: MapforgeError):
        return JSONResponse(status_code=400, content={"error": exc.kind, "message": str(exc)})

    @app.get("/health", response_model=models.HealthResponse)
    def health():
        return handlers.handle_health()

    @app.post("/render", response_model=models.RenderResponse)
    def render(req: models.RenderRequest):
        return handlers.handle_render(req)

    @app.post("/degrade", response_model=models.DegradeResponse)
    def degrade(req: models.DegradeRequest):
        return handlers.handle_degrade(req)

    @app.post("/split", response_model=models.SplitResponse)
    def split(req: models.SplitRequest):
        return handlers.handle_split(req)

    @app.post("/fid", response_model=models.FidResponse)
    def fid(req: models.FidRequest):
        return handlers.handle_fid(req)

    @app.post("/eval", response_model=models.EvalResponse)
    def eval_masks(req: models.EvalRequest):
        return handlers.handle_eval(req)

    @app.post("/mosaic", response_model=models.MosaicResponse)
    def mosaic(req: models.MosaicRequest):
        return handlers.handle_mosaic(req)

    @app.post("/probe-color", response_model=models.ProbeColorResponse)
    def probe_color(req: models.ProbeColorRequest):
        return handlers.handle_probe_color(req)

    @app.post("/dust-gen", response_model=models.DustGenResponse)
    def dust_gen(req: models.DustGenRequest):
        return handlers.handle_dust_gen(req)

    return app
