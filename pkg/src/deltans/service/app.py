"""FastAPI application wrapping the computation handlers."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .. import __version__
from ..errors import DeltansError
from . import handlers
from .schemas import (
    CoefficientsResponse,
    ComputeRequest,
    ComputeResponse,
    FitRequest,
    FitResponse,
    FTestRequest,
    FTestResponse,
    GenerateRequest,
    GenerateResponse,
    PlotRequest,
    StressRequest,
    StressResponse,
    VariabilityRequest,
    VariabilityResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="deltans", version=__version__)

    @app.exception_handler(DeltansError)
    async def _domain_error(request: Request, exc: DeltansError) -> JSONResponse:
        # The error class name travels with the payload so API clients
        # can distinguish config, data and numerical failures.
        return JSONResponse(
            status_code=400,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/coefficients", response_model=CoefficientsResponse)
    async def coefficients() -> CoefficientsResponse:
        return handlers.handle_coefficients()

    @app.post("/compute", response_model=ComputeResponse)
    async def compute(request: ComputeRequest) -> ComputeResponse:
        return handlers.handle_compute(request)

    @app.post("/stress", response_model=StressResponse)
    async def stress(request: StressRequest) -> StressResponse:
        return handlers.handle_stress(request)

    @app.post("/ftest", response_model=FTestResponse)
    async def ftest(request: FTestRequest) -> FTestResponse:
        return handlers.handle_ftest(request)

    @app.post("/fit", response_model=FitResponse)
    async def fit(request: FitRequest) -> FitResponse:
        return handlers.handle_fit(request)

    @app.post("/generate", response_model=GenerateResponse)
    async def generate(request: GenerateRequest) -> GenerateResponse:
        return handlers.handle_generate(request)

    @app.post("/variability", response_model=VariabilityResponse)
    async def variability(request: VariabilityRequest) -> VariabilityResponse:
        return handlers.handle_variability(request)

    @app.post("/plot")
    async def plot(request: PlotRequest) -> Response:
        svg = handlers.handle_plot(request)
        return Response(content=svg, media_type="image/svg+xml")

    return app
