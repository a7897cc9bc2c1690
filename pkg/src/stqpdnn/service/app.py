"""FastAPI application exposing the solver pipeline."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import CapExceededError, MatrixFormatError
from . import handlers
from . import schemas as sc

app = FastAPI(
    title="stqpdnn",
    version=__version__,
    description="Standard quadratic programs: exact solutions, DNN relaxations, "
    "exactness certificates, and instance generators.",
)


@app.exception_handler(CapExceededError)
async def _cap_handler(request: Request, exc: CapExceededError):
    return JSONResponse(status_code=422, content={"error": "cap-exceeded", "detail": str(exc)})


@app.exception_handler(MatrixFormatError)
async def _format_handler(request: Request, exc: MatrixFormatError):
    return JSONResponse(status_code=422, content={"error": "parse", "detail": str(exc)})


@app.exception_handler(ValueError)
async def _value_handler(request: Request, exc: ValueError):
    return JSONResponse(status_code=422, content={"error": "invalid", "detail": str(exc)})


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/solve", response_model=sc.SolveResponse, response_model_by_alias=True)
def solve(req: sc.SolveRequest):
    return handlers.solve(req)


@app.post("/relax", response_model=sc.RelaxResponse, response_model_by_alias=True)
def relax(req: sc.RelaxRequest):
    return handlers.relax(req)


@app.post("/classify", response_model=sc.ClassifyResponse, response_model_by_alias=True)
def classify(req: sc.ClassifyRequest):
    return handlers.classify(req)


@app.post("/theta", response_model=sc.ThetaResponse, response_model_by_alias=True)
def theta(req: sc.ThetaRequest):
    return handlers.theta_numbers(req)


@app.post("/analyze-graph", response_model=sc.AnalyzeGraphResponse, response_model_by_alias=True)
def analyze_graph(req: sc.AnalyzeGraphRequest):
    return handlers.analyze_graph(req)


@app.post("/generate", response_model=sc.GenerateResponse, response_model_by_alias=True)
def generate(req: sc.GenerateRequest):
    return handlers.generate(req)
