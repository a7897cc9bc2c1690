"""Request handlers shared by the FastAPI endpoints and the CLI.

Each handler turns a request model into a response model using the core
package; the HTTP layer and the CLI stay thin on top of these.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .. import families as fam
from .. import graphs as gr
from .. import relax as rx
from ..conic import SolverOptions
from ..exact import check_kkt, solve_stqp
from ..matrices import SimplexPoint, SymMatrix
from . import schemas as sc


def _matrix(rows, cap_n=None) -> SymMatrix:
    Q = SymMatrix(rows)
    if cap_n is not None and Q.n > cap_n:
        from ..errors import CapExceededError

        raise CapExceededError(f"instance size {Q.n} exceeds cap {cap_n}")
    return Q


def _rows(M: SymMatrix) -> list:
    return M.array.tolist()


def _one_based(indices) -> list:
    return [int(i) + 1 for i in indices]


def _jsonable(obj) -> Any:
    """Recursively convert core values into JSON-safe structures (1-based indices)."""
    if isinstance(obj, gr.Graph):
        return {"n": obj.n, "edges": [[i + 1, j + 1] for i, j in sorted(obj.edges)]}
    if isinstance(obj, SymMatrix):
        return obj.array.tolist()
    if isinstance(obj, SimplexPoint):
        return obj.x.tolist()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def solve(req: sc.SolveRequest) -> sc.SolveResponse:
    Q = _matrix(req.matrix, req.cap_n)
    result = solve_stqp(Q, cap=req.cap_n, dedup_tol=req.tol)
    minimizers = []
    kkt = []
    for point in result.minimizers:
        cert = check_kkt(Q, point, tol=1e-6)
        value = float(point.x @ Q.array @ point.x)
        minimizers.append(
            sc.MinimizerOut(x=point.x.tolist(), support=_one_based(point.support), value=value)
        )
        s = cert.s if cert is not None else Q.array @ point.x - value
        kkt.append(
            sc.KktOut(
                s=np.asarray(s).tolist(),
                value=value,
                max_complementarity=float(np.max(np.abs(point.x * np.asarray(s)))),
            )
        )
    return sc.SolveResponse(n=Q.n, nu=result.nu, minimizers=minimizers, kkt=kkt)


def relax(req: sc.RelaxRequest) -> sc.RelaxResponse:
    Q = _matrix(req.matrix)
    options = SolverOptions(tol_gap=req.tol, tol_feas=req.tol, verbose=req.verbose)
    res = rx.ell(Q, options)
    P, N = res.spn_split
    return sc.RelaxResponse(
        n=Q.n,
        ell=res.ell,
        sigma=res.dual_sigma,
        status=res.solver_status,
        iterations=res.iterations,
        relative_gap=res.gap,
        X=_rows(res.primal_X),
        S=_rows(res.dual_S),
        P=_rows(P),
        N=_rows(N),
    )


def _graph_analysis(Q: SymMatrix) -> sc.GraphAnalysisOut:
    G = gr.convexity_graph(Q)
    cliques = gr.maximal_cliques(G)
    completable, spn_witness = gr.is_spn_completable(G)
    perfect, hole = gr.is_perfect(G)
    bounds = gr.clique_bounds(Q)
    verdict = gr.spn_completable_exactness(Q)
    return sc.GraphAnalysisOut(
        n=Q.n,
        edges=[[i + 1, j + 1] for i, j in sorted(G.edges)],
        maximal_cliques=[_one_based(c) for c in cliques],
        spn_completable=completable,
        spn_witness=None if spn_witness is None else _one_based(spn_witness),
        perfect=perfect,
        perfect_witness=None
        if hole is None
        else {"side": hole[0], "cycle": _one_based(hole[1])},
        clique_bounds=sc.CliqueBoundsOut(
            ell_full=bounds.ell_full,
            ell_min_clique=bounds.ell_min_clique,
            nu_min_clique=bounds.nu_min_clique,
            nu_full=bounds.nu_full,
            per_clique=[
                {"clique": _one_based(c), "ell": e, "nu": v} for c, e, v in bounds.per_clique
            ],
            first_tight=bounds.first_tight,
            second_tight=bounds.second_tight,
        ),
        spn_completable_exactness=verdict,
    )


def classify(req: sc.ClassifyRequest) -> sc.ClassifyResponse:
    Q = _matrix(req.matrix, req.cap_n)
    report = rx.classify_exactness(Q, rel_tol=req.tol, cap=req.cap_n)
    verdict = fam.family_verdict(Q)
    rep_dict = report.to_json_dict()
    rep_out = sc.ExactnessReportOut(
        n=rep_dict["n"],
        nu=rep_dict["nu"],
        ell=rep_dict["ell"],
        gap=rep_dict["gap"],
        verdict=rep_dict["verdict"],
        witness_x=rep_dict["witness_x"],
        lam=rep_dict["lambda"],
        P=rep_dict["P"],
        N=rep_dict["N"],
        margins=rep_dict["margins"],
        solver_stats=rep_dict["solver_stats"],
    )
    return sc.ClassifyResponse(
        report=rep_out,
        families=sc.FamiliesOut(
            in_Q1=verdict.in_Q1,
            in_Q2=verdict.in_Q2,
            in_Q3=verdict.in_Q3,
            in_concave=verdict.in_concave,
            evidence=_jsonable(verdict.evidence),
        ),
        graph=_graph_analysis(Q),
    )


def analyze_graph(req: sc.AnalyzeGraphRequest) -> sc.AnalyzeGraphResponse:
    Q = _matrix(req.matrix, req.cap_n)
    return sc.AnalyzeGraphResponse(analysis=_graph_analysis(Q))


def theta_numbers(req: sc.ThetaRequest) -> sc.ThetaResponse:
    G = gr.Graph(req.graph.n, [(i - 1, j - 1) for i, j in req.graph.edges])
    w = np.ones(G.n) if req.weights is None else np.asarray(req.weights, dtype=float)
    clique, omega = gr.max_weight_clique(G, w)
    gbar = G.complement()
    th = gr.theta(gbar, w)
    thp = gr.theta_prime(gbar, w)
    sandwich = omega <= thp + 1e-6 and thp <= th + 1e-6
    return sc.ThetaResponse(
        n=G.n,
        omega=omega,
        omega_clique=_one_based(clique),
        theta=th,
        theta_prime=thp,
        sandwich_ok=bool(sandwich),
    )


# --- generation -------------------------------------------------------------------


def _recipe_exact(params: dict, n: int, rng) -> fam.ExactRecipe:
    if params.get("x") is not None:
        base = fam.random_exact_recipe(n, rng)
        x = SimplexPoint(np.asarray(params["x"], dtype=float))
        K = SymMatrix(params["K"]) if params.get("K") is not None else base.K
        if params.get("N_pattern") is not None:
            N = SymMatrix(params["N_pattern"])
        else:
            supp = set(x.support)
            N = SymMatrix(
                np.array(
                    [
                        [
                            0.0 if (i in supp and j in supp) else base.N_pattern.array[i, j]
                            for j in range(n)
                        ]
                        for i in range(n)
                    ]
                )
            )
        lam = params.get("lam")
        return fam.ExactRecipe(x=x, K=K, N_pattern=N, lam=0.0 if lam is None else float(lam))
    return fam.random_exact_recipe(
        n, rng, density=float(params.get("density", 0.5)), lam=params.get("lam")
    )


def _recipe_gap(params: dict, n: int, rng) -> fam.GapRecipe:
    base = fam.random_gap_recipe(n, rng, lam=params.get("lam"))
    B = SymMatrix(params["B"]) if params.get("B") is not None else base.B
    C = np.asarray(params["C"], dtype=float) if params.get("C") is not None else base.C
    if params.get("perm") is not None:
        perm = tuple(int(v) - 1 for v in params["perm"])
    else:
        perm = base.perm
    d = np.asarray(params["d"], dtype=float) if params.get("d") is not None else base.d
    lam = float(params["lam"]) if params.get("lam") is not None else base.lam
    return fam.GapRecipe(n=n, B=B, C=C, perm=perm, d=d, lam=lam)


def _recipe_mgw(params: dict, n: int, rng) -> fam.MgwRecipe:
    if params.get("graph") is not None:
        payload = params["graph"]
        G = gr.Graph(int(payload["n"]), [(i - 1, j - 1) for i, j in payload.get("edges", [])])
    else:
        G = gr.random_graph(n, float(params.get("edge_prob", 0.5)), rng)
    w = (
        np.asarray(params["w"], dtype=float)
        if params.get("w") is not None
        else rng.uniform(0.5, 3.0, size=G.n)
    )
    slacks = np.asarray(params["slacks"], dtype=float) if params.get("slacks") is not None else None
    return fam.MgwRecipe(graph=G, w=w, slacks=slacks)


def _verify_instance(kind: str, Q: SymMatrix, recipe, cap_n: int):
    if kind == "exact":
        rep = rx.classify_exactness(Q, cap=cap_n)
        promised = {"verdict": "exact", "lambda": recipe.lam}
        measured = {"verdict": rep.verdict, "nu": rep.nu, "ell": rep.ell}
        ok = (
            rep.verdict == rx.EXACT
            and abs(rep.nu - recipe.lam) <= 1e-9 * max(1.0, abs(recipe.lam))
            and abs(rep.ell - recipe.lam) <= 1e-5 * max(1.0, abs(recipe.lam))
        )
        return promised, measured, ok
    if kind == "gap":
        rep = rx.classify_exactness(Q, cap=cap_n)
        promised = {"verdict": "positive-gap", "lambda": recipe.lam}
        measured = {"verdict": rep.verdict, "nu": rep.nu, "ell": rep.ell, "gap": rep.gap}
        ok = (
            rep.verdict == rx.POSITIVE_GAP
            and abs(rep.nu - recipe.lam) <= 1e-9 * max(1.0, abs(recipe.lam))
            and rep.gap >= 1e-4
        )
        return promised, measured, ok
    # mgw: the two defining identities
    _, omega = gr.max_weight_clique(recipe.graph, recipe.w)
    thp = gr.theta_prime(recipe.graph.complement(), recipe.w)
    nu = solve_stqp(Q, cap=cap_n).nu
    ell_val = rx.ell(Q).ell
    promised = {"nu": 1.0 / omega, "ell": 1.0 / thp}
    measured = {"nu": nu, "ell": ell_val}
    ok = abs(nu - 1.0 / omega) <= 1e-6 and abs(ell_val * thp - 1.0) <= 1e-4
    return promised, measured, ok


def generate(req: sc.GenerateRequest) -> sc.GenerateResponse:
    params = dict(req.recipe)
    kind = str(params.get("kind", "")).lower()
    if kind not in ("exact", "gap", "mgw"):
        raise ValueError(f"recipe kind must be exact | gap | mgw, got {kind!r}")
    n = int(params.get("n", 5))
    results = []
    matrices = []
    for index in range(req.count):
        rng = np.random.default_rng([req.seed, index])
        if kind == "exact":
            recipe = _recipe_exact(params, n, rng)
            Q = fam.gen_exact(recipe)
        elif kind == "gap":
            recipe = _recipe_gap(params, n, rng)
            Q = fam.gen_gap(recipe, cap=req.cap_n)
        else:
            recipe = _recipe_mgw(params, n, rng)
            Q = fam.gen_mgw(recipe)
        promised, measured, ok = _verify_instance(kind, Q, recipe, req.cap_n)
        results.append(
            sc.InstanceResult(
                index=index,
                promised=_jsonable(promised),
                measured=_jsonable(measured),
                ok=bool(ok),
            )
        )
        matrices.append(Q.array.tolist())
    return sc.GenerateResponse(
        kind=kind,
        count=req.count,
        seed=req.seed,
        all_ok=all(r.ok for r in results),
        results=results,
        matrices=matrices,
    )
