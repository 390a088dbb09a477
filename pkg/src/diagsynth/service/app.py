"""FastAPI application.  A long-lived process keeps the RZ lookup tables and memo warm."""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..rz import warm_tables
from . import handlers
from .handlers import EXIT_USAGE, ServiceError
from .schemas import (BenchRequest, BenchResponse, ErrorResponse, SynthRequest, SynthResponse, TranspileRequest,
                      TranspileResponse)


def create_app(warm: bool = True) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        if warm:
            warm_tables()
        yield

    app = FastAPI(title="diagsynth", version=__version__, lifespan=lifespan)
    errors = {400: {"model": ErrorResponse}, 422: {"model": ErrorResponse}, 502: {"model": ErrorResponse}}

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.http_status,
                            content=ErrorResponse(detail=str(exc), exit_code=exc.exit_code).model_dump())

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_: Request, exc: RequestValidationError):
        detail = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())
        return JSONResponse(status_code=422, content=ErrorResponse(detail=detail, exit_code=EXIT_USAGE).model_dump())

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    # sync endpoints run in the threadpool; the RZ memo is lock-protected
    @app.post("/synth", response_model=SynthResponse, responses=errors)
    def synth(req: SynthRequest) -> SynthResponse:
        return handlers.synth(req)

    @app.post("/transpile", response_model=TranspileResponse, responses=errors)
    def transpile(req: TranspileRequest) -> TranspileResponse:
        return handlers.transpile_program(req)

    @app.post("/bench", response_model=BenchResponse, responses=errors)
    def bench(req: BenchRequest) -> BenchResponse:
        return handlers.bench(req)

    return app
