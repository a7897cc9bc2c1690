"""Command-line front end: a thin client over the service handlers.

Every command builds a request model, dispatches it either in-process or to
a running server (``--server``), and emits the response as JSON.  Exit
codes: 0 success, 1 failure (including generator verification failures),
2 parse error, 3 size cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from .errors import CapExceededError, MatrixFormatError
from .matrices import SymMatrix, read_matrix, write_matrix
from .service import handlers
from .service import schemas as sc

PARSE_ERROR = 2
CAP_ERROR = 3


def _dump(model) -> str:
    return json.dumps(model.model_dump(by_alias=True), indent=2) + "\n"


def _write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(model, args) -> None:
    text = _dump(model)
    if args.json_out:
        _write_text_atomic(args.json_out, text)
        if args.verbose:
            print(f"wrote {args.json_out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _post(server: str, endpoint: str, request_model):
    import httpx

    url = server.rstrip("/") + endpoint
    resp = httpx.post(url, json=request_model.model_dump(by_alias=True), timeout=600.0)
    if resp.status_code != 200:
        detail = resp.json() if resp.headers.get("content-type", "").startswith("application/json") else {}
        kind = detail.get("error", "")
        print(f"server error {resp.status_code}: {detail}", file=sys.stderr)
        sys.exit(CAP_ERROR if kind == "cap-exceeded" else PARSE_ERROR)
    return resp.json()


def _dispatch(args, endpoint: str, request_model, handler, response_cls):
    if args.server:
        payload = _post(args.server, endpoint, request_model)
        return response_cls.model_validate(payload)
    return handler(request_model)


def _load_matrix_rows(path: str):
    return read_matrix(path).array.tolist()


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None, help="decision tolerance override")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--cap-n", type=int, default=14, help="instance size cap")
    p.add_argument("--json-out", default=None, help="write the JSON report to this path")
    p.add_argument("--verbose", action="store_true", help="progress/trace output on stderr")
    p.add_argument("--server", default=None, help="base URL of a running service to use instead")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stqpdnn",
        description="Standard quadratic programs: solve, relax, classify, generate, theta.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="exact global solution of an instance")
    p.add_argument("matrix", help="matrix file (text format: n then n rows)")
    _add_common(p)

    p = sub.add_parser("relax", help="DNN relaxation bound with SPN certificate")
    p.add_argument("matrix")
    _add_common(p)

    p = sub.add_parser("classify", help="exactness verdict, families, graph analysis")
    p.add_argument("matrix")
    _add_common(p)

    p = sub.add_parser("analyze-graph", help="convexity graph and clique decomposition")
    p.add_argument("matrix")
    p.add_argument("--dot", default=None, help="also write the convexity graph in DOT format")
    _add_common(p)

    p = sub.add_parser("theta", help="max-weight clique and theta numbers of a graph")
    p.add_argument("graph", help="graph JSON file: {n, edges: [[i, j], ...]} (1-based)")
    p.add_argument("--weights", default=None, help="comma-separated vertex weights")
    _add_common(p)

    p = sub.add_parser("generate", help="generate instances from a recipe and verify them")
    p.add_argument("recipe", help="recipe JSON file (kind: exact | gap | mgw)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out-dir", default=None, help="write matrices + manifest here")
    _add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)

    return parser


def cmd_solve(args) -> int:
    req = sc.SolveRequest(matrix=_load_matrix_rows(args.matrix), cap_n=args.cap_n)
    if args.tol is not None:
        req.tol = args.tol
    _emit(_dispatch(args, "/solve", req, handlers.solve, sc.SolveResponse), args)
    return 0


def cmd_relax(args) -> int:
    req = sc.RelaxRequest(matrix=_load_matrix_rows(args.matrix), verbose=args.verbose)
    if args.tol is not None:
        req.tol = args.tol
    _emit(_dispatch(args, "/relax", req, handlers.relax, sc.RelaxResponse), args)
    return 0


def cmd_classify(args) -> int:
    req = sc.ClassifyRequest(matrix=_load_matrix_rows(args.matrix), cap_n=args.cap_n)
    if args.tol is not None:
        req.tol = args.tol
    _emit(_dispatch(args, "/classify", req, handlers.classify, sc.ClassifyResponse), args)
    return 0


def cmd_analyze_graph(args) -> int:
    req = sc.AnalyzeGraphRequest(matrix=_load_matrix_rows(args.matrix), cap_n=args.cap_n)
    resp = _dispatch(args, "/analyze-graph", req, handlers.analyze_graph, sc.AnalyzeGraphResponse)
    if args.dot:
        from .graphs import Graph, graph_to_dot

        G = Graph(resp.analysis.n, [(i - 1, j - 1) for i, j in resp.analysis.edges])
        _write_text_atomic(args.dot, graph_to_dot(G))
    _emit(resp, args)
    return 0


def cmd_theta(args) -> int:
    try:
        with open(args.graph, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        graph = sc.GraphPayload(n=int(payload["n"]), edges=payload.get("edges", []))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"bad graph file: {exc}") from exc
    weights = None
    if args.weights:
        weights = [float(v) for v in args.weights.split(",")]
    req = sc.ThetaRequest(graph=graph, weights=weights)
    _emit(_dispatch(args, "/theta", req, handlers.theta_numbers, sc.ThetaResponse), args)
    return 0


def cmd_generate(args) -> int:
    try:
        with open(args.recipe, "r", encoding="utf-8") as fh:
            recipe = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MatrixFormatError(f"bad recipe file: {exc}") from exc
    req = sc.GenerateRequest(recipe=recipe, count=args.count, seed=args.seed, cap_n=args.cap_n)
    resp = _dispatch(args, "/generate", req, handlers.generate, sc.GenerateResponse)

    manifest = resp.model_dump(by_alias=True)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for result, rows in zip(manifest["results"], resp.matrices):
            name = f"{resp.kind}_{result['index']:03d}.txt"
            write_matrix(os.path.join(args.out_dir, name), SymMatrix(rows))
            result["file"] = name
        del manifest["matrices"]
        _write_text_atomic(
            os.path.join(args.out_dir, "manifest.json"), json.dumps(manifest, indent=2) + "\n"
        )
        if args.verbose:
            print(f"wrote {resp.count} instances to {args.out_dir}", file=sys.stderr)
    text = json.dumps(manifest, indent=2) + "\n"
    if args.json_out:
        _write_text_atomic(args.json_out, text)
    elif not args.out_dir:
        sys.stdout.write(text)
    if not resp.all_ok:
        offenders = [r.index for r in resp.results if not r.ok]
        print(f"verification failed for instances {offenders}", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    commands = {
        "solve": cmd_solve,
        "relax": cmd_relax,
        "classify": cmd_classify,
        "analyze-graph": cmd_analyze_graph,
        "theta": cmd_theta,
        "generate": cmd_generate,
        "serve": cmd_serve,
    }
    try:
        return commands[args.command](args)
    except MatrixFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_ERROR
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CAP_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_ERROR


if __name__ == "__main__":
    sys.exit(main())
