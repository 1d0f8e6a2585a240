"""FastAPI application exposing the retrieval/pipeline handlers."""
from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import GestureGraspError, StageFailure
from ..pipeline import PipelineConfig
from . import handlers, schemas


def create_app() -> FastAPI:
    app = FastAPI(title="gesturegrasp", version=__version__)

    @app.exception_handler(GestureGraspError)
    async def _package_error(request, exc: GestureGraspError):
        stage = exc.stage if isinstance(exc, StageFailure) else None
        return JSONResponse(
            status_code=400,
            content={"error": type(exc).__name__, "message": str(exc), "stage": stage},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "message": str(exc), "stage": None},
        )

    @app.get("/health")
    async def health():
        return {"status": "ok", "version": __version__}

    @app.post(
        "/v1/canon",
        response_model=schemas.CanonResponse,
        responses={400: {"model": schemas.ErrorResponse}},
    )
    async def canon(req: schemas.CanonRequest):
        return handlers.canon_handler(req.keypoints.model_dump())

    @app.post(
        "/v1/retrieve",
        response_model=schemas.RetrieveResponse,
        responses={400: {"model": schemas.ErrorResponse}},
    )
    async def retrieve(req: schemas.RetrieveRequest):
        return handlers.retrieve_handler(
            req.bank, req.keypoints.model_dump(), req.embedding, req.k
        )

    @app.post(
        "/v1/rot",
        response_model=schemas.RotResponse,
        responses={400: {"model": schemas.ErrorResponse}},
    )
    async def rot(req: schemas.RotRequest):
        return handlers.rot_handler(req.keypoints.model_dump())

    @app.post(
        "/v1/pipeline",
        response_model=schemas.PipelineResponse,
        responses={400: {"model": schemas.ErrorResponse}},
    )
    async def pipeline(req: schemas.PipelineRequest):
        config = PipelineConfig.from_dict(req.config, req.base_dir)
        return handlers.pipeline_handler(config, req.include_timings)

    @app.post(
        "/v1/validate",
        response_model=schemas.ValidateResponse,
        responses={400: {"model": schemas.ErrorResponse}},
    )
    async def validate(req: schemas.ValidateRequest):
        return handlers.validate_handler(req.bank)

    return app
