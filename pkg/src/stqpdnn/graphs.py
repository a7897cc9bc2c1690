"""Convexity graphs and graph-side machinery.

Covers maximal-clique enumeration, clique decomposition bounds, perfectness
and SPN-completability tests, max-weight cliques, and the weighted theta
numbers.  Vertices are 0-based internally; the JSON exchange format is
1-based.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .conic import ConicProgram, solve_conic, SolverOptions
from .errors import CapExceededError, MatrixFormatError
from .matrices import SymMatrix, principal_submatrix

CYCLE_SCAN_CAP = 16
CLIQUE_CAP = 32

EXACT = "exact"
NOT_EXACT = "not-exact"
INAPPLICABLE = "inapplicable"


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on {0, .., n-1}."""

    n: int
    edges: frozenset

    def __init__(self, n: int, edges: Iterable = ()) -> None:
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        norm = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) out of range for n={n}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(norm))

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def neighbors(self, i: int) -> set:
        return {b if a == i else a for a, b in self.edges if i in (a, b)}

    def adjacency_masks(self) -> list:
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return masks

    def complement(self) -> "Graph":
        comp = {
            (i, j)
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if (i, j) not in self.edges
        }
        return Graph(self.n, comp)

    def induced(self, vertices) -> "Graph":
        vs = sorted(set(int(v) for v in vertices))
        pos = {v: k for k, v in enumerate(vs)}
        return Graph(len(vs), {(pos[i], pos[j]) for i, j in self.edges if i in pos and j in pos})

    def is_clique(self, vertices) -> bool:
        vs = sorted(set(vertices))
        return all(self.has_edge(i, j) for i, j in itertools.combinations(vs, 2))


def convexity_graph(Q: SymMatrix) -> Graph:
    """Edge (i, j) iff 2 Q_ij < Q_ii + Q_jj (strict, exact comparison).

    No tolerance band: instances are taken at face value.  Ties (equality)
    are not edges; a tie is only reproducible under shifts when the entries
    are exact decimals.
    """
    a = Q.array
    edges = [
        (i, j)
        for i in range(Q.n)
        for j in range(i + 1, Q.n)
        if 2.0 * a[i, j] < a[i, i] + a[j, j]
    ]
    return Graph(Q.n, edges)


def maximal_cliques(G: Graph) -> list:
    """All maximal cliques via pivoting Bron-Kerbosch; each sorted, list lexicographic."""
    if G.n > CLIQUE_CAP:
        raise CapExceededError(f"clique enumeration supports n <= {CLIQUE_CAP}")
    adj = [G.neighbors(v) for v in range(G.n)]
    out = []

    def expand(R: list, P: set, X: set) -> None:
        if not P and not X:
            out.append(tuple(sorted(R)))
            return
        pivot = max(P | X, key=lambda v: len(adj[v] & P))
        for v in sorted(P - adj[pivot]):
            expand(R + [v], P & adj[v], X & adj[v])
            P.remove(v)
            X.add(v)

    expand([], set(range(G.n)), set())
    return sorted(out)


def max_weight_clique(G: Graph, w) -> tuple:
    """A clique maximizing total weight; ties broken lexicographically."""
    w = np.asarray(w, dtype=float)
    if w.shape != (G.n,) or np.min(w) <= 0:
        raise ValueError("weights must be a positive vector of length n")
    best, best_w = None, -np.inf
    for clique in maximal_cliques(G):
        weight = float(w[list(clique)].sum())
        if weight > best_w + 1e-12:
            best, best_w = clique, weight
    return best, best_w


# --- block (biconnected component) decomposition -------------------------------


def biconnected_components(G: Graph) -> list:
    """Vertex sets of the blocks of G; isolated vertices appear as singletons."""
    adj = [sorted(G.neighbors(v)) for v in range(G.n)]
    index = {}
    low = {}
    stack = []
    blocks = []
    counter = itertools.count()

    def dfs(root: int) -> None:
        work = [(root, None, iter(adj[root]))]
        index[root] = low[root] = next(counter)
        while work:
            v, parent, it = work[-1]
            advanced = False
            for u in it:
                if u == parent:
                    continue
                if u not in index:
                    stack.append((v, u))
                    index[u] = low[u] = next(counter)
                    work.append((u, v, iter(adj[u])))
                    advanced = True
                    break
                if index[u] < index[v]:
                    stack.append((v, u))
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
                if low[v] >= index[pv]:
                    comp = set()
                    while stack:
                        e = stack.pop()
                        comp.update(e)
                        if e == (pv, v):
                            break
                    if comp:
                        blocks.append(tuple(sorted(comp)))

    for v in range(G.n):
        if v not in index:
            dfs(v)
            if not adj[v]:
                blocks.append((v,))
    return sorted(blocks)


def _is_bipartite(G: Graph, vertices) -> bool:
    vs = sorted(set(vertices))
    color = {}
    adj = {v: G.neighbors(v) & set(vs) for v in vs}
    for start in vs:
        if start in color:
            continue
        color[start] = 0
        queue = [start]
        while queue:
            v = queue.pop()
            for u in adj[v]:
                if u not in color:
                    color[u] = 1 - color[v]
                    queue.append(u)
                elif color[u] == color[v]:
                    return False
    return True


def _hamiltonian_cycle(G: Graph, vertices) -> Optional[list]:
    """A cycle visiting each vertex of the set exactly once, or None."""
    vs = sorted(set(vertices))
    k = len(vs)
    pos = {v: i for i, v in enumerate(vs)}
    adj = [0] * k
    for i, j in G.edges:
        if i in pos and j in pos:
            adj[pos[i]] |= 1 << pos[j]
            adj[pos[j]] |= 1 << pos[i]
    start = 0
    # dp maps (mask, last) -> predecessor, over paths from `start`
    dp = {(1 << start, start): -1}
    frontier = [(1 << start, start)]
    full = (1 << k) - 1
    while frontier:
        new = []
        for mask, last in frontier:
            nxt = adj[last] & ~mask
            while nxt:
                b = nxt & -nxt
                nxt ^= b
                u = b.bit_length() - 1
                key = (mask | b, u)
                if key not in dp:
                    dp[key] = last
                    new.append(key)
        frontier = new
    for last in range(1, k):
        if (full, last) in dp and (adj[last] >> start) & 1:
            path = []
            mask, v = full, last
            while v != -1:
                path.append(vs[v])
                prev = dp[(mask, v)]
                mask ^= 1 << v
                v = prev
            return path[::-1]
    return None


def is_spn_completable(G: Graph):
    """(verdict, witness): every odd cycle must induce a complete subgraph.

    Blocks that are cliques or bipartite cannot host a violating odd cycle,
    which settles most graphs immediately; otherwise odd vertex sets inside
    the offending blocks are scanned for a spanning cycle, smallest first,
    and the first violating cycle is returned as the witness.
    """
    if G.n > CYCLE_SCAN_CAP:
        raise CapExceededError(f"SPN-completability scan supports n <= {CYCLE_SCAN_CAP}")
    offending = [
        blk
        for blk in biconnected_components(G)
        if len(blk) >= 5 and not G.is_clique(blk) and not _is_bipartite(G, blk)
    ]
    if not offending:
        return True, None
    for blk in offending:
        for size in range(5, len(blk) + 1, 2):
            for sub in itertools.combinations(blk, size):
                if G.is_clique(sub) or _is_bipartite(G, sub):
                    continue
                cycle = _hamiltonian_cycle(G, sub)
                if cycle is not None:
                    return False, tuple(cycle)
    return True, None


def _odd_hole(G: Graph):
    """An induced chordless odd cycle of length >= 5, or None."""
    masks = G.adjacency_masks()
    for size in range(5, G.n + 1, 2):
        for sub in itertools.combinations(range(G.n), size):
            smask = 0
            for v in sub:
                smask |= 1 << v
            degs = [(masks[v] & smask).bit_count() for v in sub]
            if any(d != 2 for d in degs):
                continue
            # connected 2-regular graph on `sub` => a single chordless cycle
            seen = 1 << sub[0]
            frontier = masks[sub[0]] & smask
            while frontier:
                seen |= frontier
                nxt = 0
                m = frontier
                while m:
                    b = m & -m
                    m ^= b
                    nxt |= masks[b.bit_length() - 1] & smask
                frontier = nxt & ~seen
            if seen != smask:
                continue
            order = [sub[0]]
            prev = None
            while len(order) < size:
                cur = order[-1]
                nxt = [u for u in sub if u != prev and (masks[cur] >> u) & 1]
                prev = cur
                order.append(nxt[0])
            return tuple(order)
    return None


def is_perfect(G: Graph):
    """(verdict, witness): no induced odd hole of length >= 5 in G or its complement."""
    if G.n > CYCLE_SCAN_CAP:
        raise CapExceededError(f"perfect-graph scan supports n <= {CYCLE_SCAN_CAP}")
    hole = _odd_hole(G)
    if hole is not None:
        return False, ("graph", hole)
    hole = _odd_hole(G.complement())
    if hole is not None:
        return False, ("complement", hole)
    return True, None


# --- theta numbers --------------------------------------------------------------


def _pair_basis(n: int, i: int, j: int) -> SymMatrix:
    B = np.zeros((n, n))
    if i == j:
        B[i, i] = 1.0
    else:
        B[i, j] = B[j, i] = 0.5
    return SymMatrix(B)


def theta(gbar: Graph, w, options: Optional[SolverOptions] = None) -> float:
    """Weighted Lovasz theta of the given graph (entries forced to zero on its edges)."""
    w = np.asarray(w, dtype=float)
    n = gbar.n
    if w.shape != (n,) or np.min(w) <= 0:
        raise ValueError("weights must be a positive vector of length n")
    Wm = np.sqrt(np.outer(w, w))
    cons = [(SymMatrix(np.eye(n)), None, 1.0)]
    for i, j in sorted(gbar.edges):
        cons.append((_pair_basis(n, i, j), None, 0.0))
    sol = solve_conic(ConicProgram(n, 0, SymMatrix(-Wm), None, cons), options)
    if not sol.converged:
        raise RuntimeError(f"theta SDP did not converge: {sol.status}")
    return -sol.pobj


def theta_prime(gbar: Graph, w, options: Optional[SolverOptions] = None) -> float:
    """Schrijver-strengthened theta: the theta SDP with an entrywise nonnegative matrix."""
    w = np.asarray(w, dtype=float)
    n = gbar.n
    if w.shape != (n,) or np.min(w) <= 0:
        raise ValueError("weights must be a positive vector of length n")
    Wm = np.sqrt(np.outer(w, w))
    cons = [(SymMatrix(np.eye(n)), None, 1.0)]
    for i, j in sorted(gbar.edges):
        cons.append((_pair_basis(n, i, j), None, 0.0))
    link = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if (i, j) not in gbar.edges
    ]
    m = len(link)
    for k, (i, j) in enumerate(link):
        a = np.zeros(m)
        a[k] = -1.0
        cons.append((_pair_basis(n, i, j), a, 0.0))
    sol = solve_conic(ConicProgram(n, m, SymMatrix(-Wm), None, cons), options)
    if not sol.converged:
        raise RuntimeError(f"theta' SDP did not converge: {sol.status}")
    return -sol.pobj


def zero_nonedge_entries(X: np.ndarray, pairs) -> np.ndarray:
    """Apply X -> X + alpha (e_i - e_j)(e_i - e_j)^T to clear the listed entries.

    For matrices in the max-weight-clique class this keeps the iterate DNN
    feasible and never increases the relaxation objective.
    """
    Y = np.array(X, dtype=float)
    for i, j in pairs:
        alpha = Y[i, j]  # may be a tolerance-level negative on solver output
        Y[i, i] += alpha
        Y[j, j] += alpha
        Y[i, j] = 0.0
        Y[j, i] = 0.0
    return Y


# --- clique decomposition bounds -------------------------------------------------


@dataclass(frozen=True)
class CliqueBounds:
    ell_full: float
    ell_min_clique: float
    nu_min_clique: float
    nu_full: float
    per_clique: tuple  # (clique, ell(Q_CC), nu(Q_CC)) triples
    first_tight: bool
    second_tight: bool


def clique_bounds(Q: SymMatrix, tol: float = 1e-6) -> CliqueBounds:
    """ell(Q) <= min-clique ell <= min-clique nu = nu(Q) over the convexity graph."""
    from . import relax
    from .exact import solve_stqp

    G = convexity_graph(Q)
    cliques = maximal_cliques(G)
    table = []
    for C in cliques:
        sub = principal_submatrix(Q, C)
        ell_c = relax.ell(sub).ell
        nu_c = solve_stqp(sub).nu
        table.append((C, ell_c, nu_c))
    ell_min = min(e for _, e, _ in table)
    nu_min = min(v for _, _, v in table)
    nu_full = solve_stqp(Q).nu
    ell_full = relax.ell(Q).ell
    return CliqueBounds(
        ell_full=ell_full,
        ell_min_clique=ell_min,
        nu_min_clique=nu_min,
        nu_full=nu_full,
        per_clique=tuple(table),
        first_tight=abs(ell_full - ell_min) <= tol,
        second_tight=abs(ell_min - nu_full) <= tol,
    )


def spn_completable_exactness(Q: SymMatrix, tol: float = 1e-6) -> str:
    """Exactness by clique decomposition when the convexity graph is SPN completable."""
    completable, _ = is_spn_completable(convexity_graph(Q))
    if not completable:
        return INAPPLICABLE
    bounds = clique_bounds(Q, tol=tol)
    return EXACT if bounds.second_tight else NOT_EXACT


# --- exchange formats -------------------------------------------------------------


def graph_to_json(G: Graph) -> str:
    payload = {"n": G.n, "edges": [[i + 1, j + 1] for i, j in sorted(G.edges)]}
    return json.dumps(payload)


def graph_from_json(text: str) -> Graph:
    try:
        payload = json.loads(text)
        n = int(payload["n"])
        edges = [(int(i) - 1, int(j) - 1) for i, j in payload.get("edges", [])]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"bad graph JSON: {exc}") from exc
    return Graph(n, edges)


def graph_to_dot(G: Graph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in range(G.n):
        lines.append(f"  {v + 1};")
    for i, j in sorted(G.edges):
        lines.append(f"  {i + 1} -- {j + 1};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_json(fh.read())


# --- random graph helpers ----------------------------------------------------------


def random_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    edges = [
        (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p
    ]
    return Graph(n, edges)


def random_chordal_graph(n: int, rng: np.random.Generator, density: float = 0.35) -> Graph:
    """Chordal (hence perfect) graph: random graph plus elimination-game fill edges.

    Filling each vertex's later neighborhood into a clique makes the chosen
    ordering a perfect elimination ordering of the result.
    """
    base = random_graph(n, density, rng)
    order = [int(v) for v in rng.permutation(n)]
    pos = {v: i for i, v in enumerate(order)}
    adj = {v: set(base.neighbors(v)) for v in range(n)}
    edges = set(base.edges)
    for v in order:
        later = sorted(u for u in adj[v] if pos[u] > pos[v])
        for a, b in itertools.combinations(later, 2):
            if b not in adj[a]:
                adj[a].add(b)
                adj[b].add(a)
                edges.add((min(a, b), max(a, b)))
    return Graph(n, edges)
