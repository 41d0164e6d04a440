"""FastAPI application: POST /solve, /verify, /stats and GET /health."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..problem import InstanceError
from . import core
from .schemas import SolveRequest, SolveResponse, StatsRequest, StatsResponse, VerifyRequest, VerifyResponse


def _guard(fn, req):
    try:
        return fn(req)
    except core.ParameterError as exc:
        raise HTTPException(status_code=400, detail={"kind": "parameter", "message": str(exc)}) from exc
    except InstanceError as exc:
        raise HTTPException(status_code=422, detail={"kind": "instance", "message": str(exc)}) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="tfqlsa", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/solve", response_model=SolveResponse)
    def solve(req: SolveRequest):
        return _guard(core.run_solve, req)

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest):
        return _guard(core.run_verify, req)

    @app.post("/stats", response_model=StatsResponse)
    def stats(req: StatsRequest):
        return _guard(core.run_stats, req)

    return app


app = create_app()
