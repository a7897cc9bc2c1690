"""Pydantic request/response models for the HTTP service and the CLI reports.

All graph vertices, supports, cliques, and permutations are 1-based in the
wire format; report JSON is deterministic (no timestamps).
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field, field_validator

Rows = list[list[float]]


class GraphPayload(BaseModel):
    n: int
    edges: list[list[int]] = Field(default_factory=list)

    @field_validator("edges")
    @classmethod
    def _pairs(cls, v):
        for e in v:
            if len(e) != 2:
                raise ValueError("each edge must be a pair of vertices")
        return v


class SolveRequest(BaseModel):
    matrix: Rows
    tol: float = 1e-9
    cap_n: int = 14


class MinimizerOut(BaseModel):
    x: list[float]
    support: list[int]
    value: float


class KktOut(BaseModel):
    s: list[float]
    value: float
    max_complementarity: float


class SolveResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    model_config = {"populate_by_name": True}

    n: int
    nu: float
    minimizers: list[MinimizerOut]
    kkt: list[KktOut]


class RelaxRequest(BaseModel):
    matrix: Rows
    tol: float = 1e-8
    verbose: bool = False


class RelaxResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    model_config = {"populate_by_name": True}

    n: int
    ell: float
    sigma: float
    status: str
    iterations: int
    relative_gap: float
    X: Rows
    S: Rows
    P: Rows
    N: Rows


class ClassifyRequest(BaseModel):
    matrix: Rows
    tol: float = 1e-5
    cap_n: int = 14


class ExactnessReportOut(BaseModel):
    n: int
    nu: float
    ell: float
    gap: float
    verdict: str
    witness_x: Optional[list[float]] = None
    lam: Optional[float] = Field(default=None, alias="lambda")
    P: Optional[Rows] = None
    N: Optional[Rows] = None
    margins: dict[str, float]
    solver_stats: dict[str, Any]
    model_config = {"populate_by_name": True}


class FamiliesOut(BaseModel):
    in_Q1: bool
    in_Q2: bool
    in_Q3: bool
    in_concave: bool
    evidence: dict[str, Any]


class CliqueBoundsOut(BaseModel):
    ell_full: float
    ell_min_clique: float
    nu_min_clique: float
    nu_full: float
    per_clique: list[dict[str, Any]]
    first_tight: bool
    second_tight: bool


class GraphAnalysisOut(BaseModel):
    n: int
    edges: list[list[int]]
    maximal_cliques: list[list[int]]
    spn_completable: bool
    spn_witness: Optional[list[int]] = None
    perfect: bool
    perfect_witness: Optional[dict[str, Any]] = None
    clique_bounds: CliqueBoundsOut
    spn_completable_exactness: str


class ClassifyResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    model_config = {"populate_by_name": True}

    report: ExactnessReportOut
    families: FamiliesOut
    graph: GraphAnalysisOut


class ThetaRequest(BaseModel):
    graph: GraphPayload
    weights: Optional[list[float]] = None


class ThetaResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    model_config = {"populate_by_name": True}

    n: int
    omega: float
    omega_clique: list[int]
    theta: float
    theta_prime: float
    sandwich_ok: bool


class AnalyzeGraphRequest(BaseModel):
    matrix: Rows
    cap_n: int = 14


class AnalyzeGraphResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    model_config = {"populate_by_name": True}

    analysis: GraphAnalysisOut


class GenerateRequest(BaseModel):
    recipe: dict[str, Any]
    count: int = 1
    seed: int = 0
    cap_n: int = 14


class InstanceResult(BaseModel):
    index: int
    promised: dict[str, Any]
    measured: dict[str, Any]
    ok: bool


class GenerateResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    model_config = {"populate_by_name": True}

    kind: str
    count: int
    seed: int
    all_ok: bool
    results: list[InstanceResult]
    matrices: list[Rows]
