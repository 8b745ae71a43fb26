"""HTTP front end: one POST endpoint per subcommand.

Errors come back as JSON bodies with a machine-readable ``error`` field:
422 for configuration problems (including schema validation), 507 when a
state would exceed the configured support cap and 500 when a check aborts
on its own tolerance.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from .. import experiments
from ..errors import QDoubleError, SupportBudgetExceeded, ToleranceExceeded
from ..harness import build_report
from ..state import support_budget
from .schemas import SUBCOMMANDS, ErrorBody, ExperimentConfig, Report

app = FastAPI(title="qdouble", version="0.1.0",
              description="Exact checks of quantum double lattice models.")


class RunFailed(Exception):
    def __init__(self, status, kind, detail):
        self.status, self.kind, self.detail = status, kind, detail


@app.exception_handler(RunFailed)
async def _failed(request, exc: RunFailed):
    return JSONResponse(status_code=exc.status,
                        content=ErrorBody(error=exc.kind, detail=exc.detail).model_dump())


@app.exception_handler(RequestValidationError)
async def _invalid(request, exc: RequestValidationError):
    return JSONResponse(status_code=422,
                        content=ErrorBody(error="config", detail=str(exc.errors())).model_dump())


def execute(subcommand: str, config: ExperimentConfig) -> dict:
    """Validate parameters, run and return the report as a plain dict."""
    try:
        params = config.validated_params(subcommand)
    except (ValidationError, ValueError) as exc:
        raise RunFailed(422, "config", str(exc)) from None
    try:
        with support_budget(config.support_cap):
            rec = experiments.run(subcommand, params, config.tolerance)
    except SupportBudgetExceeded as exc:
        raise RunFailed(507, "budget", str(exc)) from None
    except ToleranceExceeded as exc:
        raise RunFailed(500, "check", str(exc)) from None
    except QDoubleError as exc:
        raise RunFailed(422, "config", f"{type(exc).__name__}: {exc}") from None
    cfg = config.model_dump(mode="json")
    cfg["params"] = {k: v for k, v in params.items() if k != "seed"}
    return build_report(subcommand, cfg, rec)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/subcommands")
def subcommands():
    return {"subcommands": list(SUBCOMMANDS)}


@app.post("/run/{subcommand}", response_model=Report,
          responses={422: {"model": ErrorBody}, 507: {"model": ErrorBody}})
def run(subcommand: str, config: ExperimentConfig):
    if subcommand not in SUBCOMMANDS:
        raise HTTPException(status_code=404, detail=f"unknown subcommand {subcommand!r}")
    return execute(subcommand, config)
