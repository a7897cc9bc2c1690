"""Membership tests for the exact families and generators for exact/gapped instances.

The families:
  * minimum entry on the diagonal,
  * convex objective over the simplex (PSD on the centered subspace),
  * max-weight-clique matrices of perfect graphs, up to a uniform shift,
plus the concave class sitting inside the first family.

Generators produce instances with a prescribed optimal solution that are
provably exact (PSD-plus-pattern construction) or provably gapped (Horn
block embedding), and the max-weight-clique class itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapExceededError
from .exact import DEFAULT_CAP, is_copositive
from .graphs import Graph, is_perfect, random_graph
from .matrices import SimplexPoint, SymMatrix, diag_scale, horn, permute

PERFECT_CHECK_CAP = 16
Q3_EDGE_VALUE_TOL = 1e-9
PSD_TOL = 1e-8


@dataclass(frozen=True)
class FamilyVerdict:
    in_Q1: bool
    in_Q2: bool
    in_Q3: bool
    in_concave: bool
    evidence: dict = field(default_factory=dict)


def in_Q1(Q: SymMatrix):
    """True iff the minimum entry of Q lies on the diagonal.

    Evidence on success is the attaining diagonal index (the corresponding
    vertex of the simplex is then optimal); on failure, the off-diagonal
    entry strictly below every diagonal one.
    """
    a = Q.array
    diag = np.diag(a)
    k = int(np.argmin(diag))
    min_diag = float(diag[k])
    min_all = float(np.min(a))
    if min_diag <= min_all:
        return True, {"diag_index": k, "min_entry": min_diag}
    i, j = np.unravel_index(int(np.argmin(a)), a.shape)
    return False, {
        "min_entry": min_all,
        "min_entry_at": (int(i), int(j)),
        "min_diag": min_diag,
        "min_diag_at": k,
    }


def _centered(Q: SymMatrix) -> np.ndarray:
    n = Q.n
    proj = np.eye(n) - np.ones((n, n)) / n
    B = proj @ Q.array @ proj
    return 0.5 * (B + B.T)


def in_Q2(Q: SymMatrix, tol: float = PSD_TOL):
    """True iff Q is PSD on the centered subspace (convex objective over the simplex)."""
    B = _centered(Q)
    w, V = np.linalg.eigh(B)
    scale = max(1.0, float(np.max(np.abs(B))))
    if w[0] >= -tol * scale:
        return True, {"min_eig": float(w[0])}
    d = V[:, 0]
    d = d - d.mean()  # already centered up to rounding
    value = float(d @ Q.array @ d)
    return False, {"witness_d": d, "dQd": value, "min_eig": float(w[0])}


def in_concave(Q: SymMatrix, tol: float = PSD_TOL) -> bool:
    """True iff the objective is concave over the simplex; equals in_Q2(-Q)."""
    member, _ = in_Q2(SymMatrix(-Q.array), tol)
    return member


def in_Q3(Q: SymMatrix, cap: int = PERFECT_CHECK_CAP):
    """Shifted max-weight-clique class membership, decided by the paper-facing procedure.

    Build the strict-convexity edge set; with no edges any matrix qualifies
    after a downward shift.  Otherwise all edge entries must share a common
    value kappa, the shifted diagonal must stay positive, and the edge graph
    must be perfect.  Evidence records the (graph, weights, kappa) witness or
    the failing step.
    """
    n = Q.n
    if n > cap:
        raise CapExceededError(f"Q3 membership supports n <= {cap}, got {n}")
    a = Q.array
    edges = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if 2.0 * a[i, j] < a[i, i] + a[j, j]
    ]
    G = Graph(n, edges)
    if not edges:
        gamma = float(np.min(a)) - 1.0
        w = 1.0 / (np.diag(a) - gamma)
        return True, {"graph": G, "w": w, "kappa": gamma}
    vals = np.array([a[i, j] for i, j in edges])
    if float(vals.max() - vals.min()) > Q3_EDGE_VALUE_TOL:
        return False, {
            "failing_step": "edge-values-differ",
            "kappa_min": float(vals.min()),
            "kappa_max": float(vals.max()),
        }
    kappa = float(vals.min())
    shifted_diag = np.diag(a) - kappa
    if np.min(shifted_diag) <= 0:
        return False, {"failing_step": "nonpositive-diagonal", "kappa": kappa}
    perfect, hole = is_perfect(G)
    if not perfect:
        return False, {"failing_step": "not-perfect", "kappa": kappa, "hole": hole}
    return True, {"graph": G, "w": 1.0 / shifted_diag, "kappa": kappa}


def family_verdict(Q: SymMatrix, cap: int = PERFECT_CHECK_CAP) -> FamilyVerdict:
    q1, e1 = in_Q1(Q)
    q2, e2 = in_Q2(Q)
    q3, e3 = in_Q3(Q, cap=cap)
    conc = in_concave(Q)
    return FamilyVerdict(
        in_Q1=q1,
        in_Q2=q2,
        in_Q3=q3,
        in_concave=conc,
        evidence={"Q1": e1, "Q2": e2, "Q3": e3},
    )


# --- generators ------------------------------------------------------------------


@dataclass(frozen=True)
class ExactRecipe:
    """Q = P + N + lam*E with P = (I - e x^T) K (I - x e^T), N zero on the support block."""

    x: SimplexPoint
    K: SymMatrix
    N_pattern: SymMatrix
    lam: float = 0.0


@dataclass(frozen=True)
class GapRecipe:
    """Q = lam*E + J D [[B, C], [C^T, H]] D J^T with B copositive, C >= 0, d > 0."""

    n: int
    B: Optional[SymMatrix]  # (n-5) x (n-5); None for n = 5
    C: Optional[np.ndarray]  # (n-5) x 5 nonnegative coupling
    perm: tuple
    d: np.ndarray
    lam: float = 0.0


@dataclass(frozen=True)
class MgwRecipe:
    """Max-weight-clique matrix of (G, w): diagonal 1/w, zero on edges, tight elsewhere."""

    graph: Graph
    w: np.ndarray
    slacks: Optional[np.ndarray] = None  # nonnegative off-edge increments


def gen_exact(recipe: ExactRecipe) -> SymMatrix:
    """Instance with ell = nu = lam and the recipe's x optimal, by construction."""
    x = recipe.x.x
    n = x.size
    K = recipe.K.array
    if recipe.K.n != n or recipe.N_pattern.n != n:
        raise ValueError("recipe pieces have mismatched dimensions")
    wmin = float(np.min(np.linalg.eigvalsh(K)))
    if wmin < -PSD_TOL * max(1.0, float(np.max(np.abs(K)))):
        raise ValueError(f"seed K is not PSD (min eigenvalue {wmin:.3g})")
    N = recipe.N_pattern.array
    if np.min(N) < 0:
        raise ValueError("N pattern must be entrywise nonnegative")
    support = list(recipe.x.support)
    if np.max(np.abs(N[np.ix_(support, support)])) > 0:
        raise ValueError("N pattern must vanish on the support block of x")
    reducer = np.eye(n) - np.outer(np.ones(n), x)
    P = reducer @ K @ reducer.T
    return SymMatrix(0.5 * (P + P.T) + N + recipe.lam * np.ones((n, n)))


def gen_gap(recipe: GapRecipe, cap: int = DEFAULT_CAP) -> SymMatrix:
    """Instance with nu = lam and a strictly positive relaxation gap.

    Embeds the Horn matrix as the trailing block, couples it nonnegatively
    to a copositive block, then applies a positive diagonal scaling and a
    permutation; neither operation can repair the missing SPN split.  The
    Horn block is the only seed implemented; any other extreme copositive
    matrix without an SPN split would work here as a drop-in replacement.
    """
    n = recipe.n
    if n < 5:
        raise ValueError("gap construction needs n >= 5")
    k = n - 5
    H = horn().array
    if k == 0:
        Mhat = H
    else:
        B = recipe.B
        if B is None or B.n != k:
            raise ValueError(f"copositive block B must be {k} x {k}")
        if k > cap:
            raise CapExceededError(f"copositivity oracle limited to n <= {cap}")
        if not is_copositive(B, cap=cap):
            raise ValueError("block B failed the copositivity oracle")
        C = np.zeros((k, 5)) if recipe.C is None else np.asarray(recipe.C, dtype=float)
        if C.shape != (k, 5):
            raise ValueError(f"coupling C must be {k} x 5")
        if np.min(C) < 0:
            raise ValueError("coupling C must be entrywise nonnegative")
        Mhat = np.block([[B.array, C], [C.T, H]])
    d = np.asarray(recipe.d, dtype=float)
    if d.shape != (n,) or np.min(d) <= 0:
        raise ValueError("scaling d must be a positive vector of length n")
    M = permute(diag_scale(SymMatrix(Mhat), d), recipe.perm)
    return SymMatrix(M.array + recipe.lam * np.ones((n, n)))


def gen_mgw(recipe: MgwRecipe) -> SymMatrix:
    """Member of the max-weight-clique class: nu = 1/omega(G,w), ell = 1/theta'(Gbar,w).

    Zero slacks produce tight off-edge entries; these reproduce G as the
    convexity graph exactly as generated, but a later uniform shift can flip
    a tight pair through rounding.  Use positive slacks when that matters.
    """
    G = recipe.graph
    n = G.n
    w = np.asarray(recipe.w, dtype=float)
    if w.shape != (n,) or np.min(w) <= 0:
        raise ValueError("weights must be a positive vector of length n")
    slacks = np.zeros((n, n)) if recipe.slacks is None else np.asarray(recipe.slacks, dtype=float)
    if slacks.shape != (n, n) or np.min(slacks) < 0:
        raise ValueError("slacks must be a nonnegative n x n array")
    a = np.zeros((n, n))
    np.fill_diagonal(a, 1.0 / w)
    for i in range(n):
        for j in range(i + 1, n):
            if G.has_edge(i, j):
                continue
            v = 0.5 * (a[i, i] + a[j, j]) + 0.5 * (slacks[i, j] + slacks[j, i])
            a[i, j] = a[j, i] = v
    return SymMatrix(a)


# --- randomized recipes ------------------------------------------------------------


def random_exact_recipe(
    n: int, rng: np.random.Generator, density: float = 0.5, lam: Optional[float] = None
) -> ExactRecipe:
    support_size = int(rng.integers(1, n + 1))
    support = sorted(rng.choice(n, size=support_size, replace=False).tolist())
    x = np.zeros(n)
    x[support] = rng.uniform(0.1, 1.0, size=support_size)
    x /= x.sum()
    G = rng.normal(size=(n, n))
    K = SymMatrix(G @ G.T)
    N = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            if i in support and j in support:
                continue
            if rng.random() < density:
                N[i, j] = N[j, i] = rng.uniform(0.0, 1.0)
    lam_val = float(rng.uniform(-2.0, 2.0)) if lam is None else float(lam)
    return ExactRecipe(x=SimplexPoint(x), K=K, N_pattern=SymMatrix(N), lam=lam_val)


def random_gap_recipe(
    n: int, rng: np.random.Generator, lam: Optional[float] = None
) -> GapRecipe:
    k = n - 5
    if k > 0:
        Braw = np.abs(rng.normal(size=(k, k)))
        B = SymMatrix(0.5 * (Braw + Braw.T))
        C = rng.uniform(0.0, 1.0, size=(k, 5))
    else:
        B, C = None, None
    perm = tuple(int(v) for v in rng.permutation(n))
    d = rng.uniform(0.5, 2.0, size=n)
    lam_val = float(rng.uniform(-2.0, 2.0)) if lam is None else float(lam)
    return GapRecipe(n=n, B=B, C=C, perm=perm, d=d, lam=lam_val)


def random_mgw_recipe(
    n: int,
    rng: np.random.Generator,
    edge_prob: float = 0.5,
    weight_range: tuple = (0.5, 3.0),
) -> MgwRecipe:
    G = random_graph(n, edge_prob, rng)
    w = rng.uniform(weight_range[0], weight_range[1], size=n)
    return MgwRecipe(graph=G, w=w, slacks=None)
