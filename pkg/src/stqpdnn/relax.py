"""The DNN relaxation pipeline: lower bounds, SPN certificates, exactness verdicts.

The relaxation bound ell(Q) comes from

    min <Q, X>  s.t.  <E, X> = 1,  X PSD,  X entrywise nonnegative,

whose dual certificate is a shift sigma and an SPN split Q - sigma*E = P + N.
Membership of a matrix in the SPN cone is decided by maximizing the uniform
entrywise margin delta such that M - P >= delta holds for some PSD P.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conic import ConicProgram, SolverOptions, solve_conic, CONVERGED
from .exact import DEFAULT_CAP, is_copositive, solve_stqp
from .graphs import Graph, maximal_cliques
from .matrices import SimplexPoint, SymMatrix, quadratic_form

MEMBER = "member"
NON_MEMBER = "non-member"
BORDERLINE = "borderline"

EXACT = "exact"
POSITIVE_GAP = "positive-gap"

MEMBERSHIP_TOL = 1e-7
EXACTNESS_REL_TOL = 1e-5


@dataclass(frozen=True)
class RelaxResult:
    ell: float
    primal_X: SymMatrix
    dual_sigma: float
    dual_S: SymMatrix
    spn_split: tuple  # (P, N) with dual_S = P + N
    solver_status: str
    iterations: int
    gap: float

    @property
    def converged(self) -> bool:
        return self.solver_status == CONVERGED


@dataclass(frozen=True)
class SpnCertificate:
    M: SymMatrix
    margin: float
    P: SymMatrix
    N: SymMatrix
    verdict: str
    status: str

    @property
    def is_member(self) -> bool:
        """Membership within tolerance; borderline counts as member."""
        return self.margin >= -MEMBERSHIP_TOL


@dataclass(frozen=True)
class QxMembership:
    member: bool
    lam: float
    P: SymMatrix
    N: SymMatrix
    certificate: SpnCertificate


@dataclass(frozen=True)
class ExactnessReport:
    n: int
    nu: float
    ell: float
    gap: float
    verdict: str
    witness_x: Optional[SimplexPoint]
    lam: Optional[float]
    P: Optional[SymMatrix]
    N: Optional[SymMatrix]
    spn_margin: float
    solver_stats: dict

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "n": self.n,
            "nu": self.nu,
            "ell": self.ell,
            "gap": self.gap,
            "verdict": self.verdict,
            "witness_x": None if self.witness_x is None else self.witness_x.x.tolist(),
            "lambda": self.lam,
            "P": None if self.P is None else self.P.array.tolist(),
            "N": None if self.N is None else self.N.array.tolist(),
            "margins": {"spn_margin": self.spn_margin},
            "solver_stats": self.solver_stats,
        }


def _pair_basis(n: int, i: int, j: int) -> np.ndarray:
    B = np.zeros((n, n))
    if i == j:
        B[i, i] = 1.0
    else:
        B[i, j] = B[j, i] = 0.5
    return B


def build_dnn_program(Q: SymMatrix) -> ConicProgram:
    """(DN-P): trace constraint against E plus orthant links z_ij = X_ij."""
    n = Q.n
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    m = len(pairs)
    cons = [(SymMatrix(np.ones((n, n))), None, 1.0)]
    for k, (i, j) in enumerate(pairs):
        a = np.zeros(m)
        a[k] = -1.0
        cons.append((SymMatrix(_pair_basis(n, i, j)), a, 0.0))
    return ConicProgram(n, m, Q, None, cons)


def ell(Q: SymMatrix, options: Optional[SolverOptions] = None) -> RelaxResult:
    """The doubly nonnegative relaxation bound with its dual SPN certificate."""
    sol = solve_conic(build_dnn_program(Q), options)
    sigma = float(sol.y[0])
    S = SymMatrix(Q.array - sigma * np.ones((Q.n, Q.n)))
    P = sol.S
    N = SymMatrix(S.array - P.array)
    return RelaxResult(
        ell=float(sol.pobj),
        primal_X=sol.X,
        dual_sigma=sigma,
        dual_S=S,
        spn_split=(P, N),
        solver_status=sol.status,
        iterations=sol.iterations,
        gap=sol.gap,
    )


def is_spn(M: SymMatrix, options: Optional[SolverOptions] = None) -> SpnCertificate:
    """Maximum uniform margin delta with M - P >= delta entrywise for some PSD P.

    The verdict is member / non-member away from the tolerance band and
    borderline inside it (or on solver failure).
    """
    n = M.n
    a = M.array
    if n == 1:
        margin = float(a[0, 0])
        P = SymMatrix([[0.0]])
        verdict = MEMBER if margin >= MEMBERSHIP_TOL else (
            NON_MEMBER if margin <= -MEMBERSHIP_TOL else BORDERLINE
        )
        return SpnCertificate(M, margin, P, M, verdict, CONVERGED)

    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    m = len(pairs)
    # delta is eliminated against the (0, 0) constraint:
    #   P_ij + t_ij + delta = M_ij   with  delta = M_00 - P_00 - t_00
    cons = []
    for k, (i, j) in enumerate(pairs):
        if (i, j) == (0, 0):
            continue
        A = _pair_basis(n, i, j) - _pair_basis(n, 0, 0)
        avec = np.zeros(m)
        avec[k] = 1.0
        avec[0] = -1.0
        cons.append((SymMatrix(A), avec, a[i, j] - a[0, 0]))
    cvec = np.zeros(m)
    cvec[0] = 1.0
    prog = ConicProgram(n, m, SymMatrix(_pair_basis(n, 0, 0)), cvec, cons)
    sol = solve_conic(prog, options)
    margin = float(a[0, 0] - sol.pobj)
    P = sol.X
    N = SymMatrix(a - P.array)
    if sol.status != CONVERGED:
        return SpnCertificate(M, margin, P, N, BORDERLINE, sol.status)
    if margin >= MEMBERSHIP_TOL:
        verdict = MEMBER
    elif margin <= -MEMBERSHIP_TOL:
        verdict = NON_MEMBER
    else:
        verdict = BORDERLINE
    return SpnCertificate(M, margin, P, N, verdict, sol.status)


def in_Qx(Q: SymMatrix, x: SimplexPoint, options: Optional[SolverOptions] = None) -> QxMembership:
    """Is x an optimal solution with an exact relaxation, i.e. Q - (x^T Q x) E SPN?

    On membership the returned split gives the decomposition
    Q = P + N + lam * E with P x = 0 and N vanishing on the support of x.
    """
    lam = quadratic_form(Q, x)
    shifted = SymMatrix(Q.array - lam * np.ones((Q.n, Q.n)))
    cert = is_spn(shifted, options)
    return QxMembership(
        member=cert.is_member,
        lam=lam,
        P=cert.P,
        N=cert.N,
        certificate=cert,
    )


def classify_exactness(
    Q: SymMatrix,
    rel_tol: float = EXACTNESS_REL_TOL,
    cap: int = DEFAULT_CAP,
    options: Optional[SolverOptions] = None,
) -> ExactnessReport:
    """Compare nu(Q) with ell(Q) and attach the matching witness.

    Exact instances carry the decomposition Q = P + N + nu*E from the SPN
    membership of Q - nu*E at a global minimizer; gapped instances carry the
    non-member certificate for the same shifted matrix.  Values inside the
    band between the exact and gap thresholds are labeled borderline.
    """
    result = solve_stqp(Q, cap=cap)
    relaxation = ell(Q, options)
    nu = result.nu
    gap = nu - relaxation.ell
    scale = max(1.0, abs(nu))
    stats = {
        "status": relaxation.solver_status,
        "iterations": relaxation.iterations,
        "relative_gap": relaxation.gap,
    }
    shifted = SymMatrix(Q.array - nu * np.ones((Q.n, Q.n)))
    cert = is_spn(shifted, options)
    if not relaxation.converged:
        verdict = BORDERLINE
    elif gap <= rel_tol * scale:
        verdict = EXACT
    elif gap >= 10.0 * rel_tol * scale:
        verdict = POSITIVE_GAP
    else:
        verdict = BORDERLINE
    if verdict == EXACT:
        witness = result.minimizers[0]
        return ExactnessReport(
            n=Q.n,
            nu=nu,
            ell=relaxation.ell,
            gap=gap,
            verdict=verdict,
            witness_x=witness,
            lam=nu,
            P=cert.P,
            N=cert.N,
            spn_margin=cert.margin,
            solver_stats=stats,
        )
    return ExactnessReport(
        n=Q.n,
        nu=nu,
        ell=relaxation.ell,
        gap=gap,
        verdict=verdict,
        witness_x=None,
        lam=None,
        P=cert.P,
        N=cert.N,
        spn_margin=cert.margin,
        solver_stats=stats,
    )


def search_exact_witness(
    Q: SymMatrix, relaxation: RelaxResult, zero_tol: float = 1e-4
) -> Optional[SimplexPoint]:
    """Search the dual split for x with P x = 0 and x^T N x = 0 on the simplex.

    N's diagonal is folded into P first (any witness must vanish where the
    diagonal of N is positive).  Candidate supports are the maximal cliques
    of the zero-pattern graph of N.  Every feasible point of the clique
    system lands on the optimal face, so the face is searched through its
    stationary representatives, and a candidate is accepted only when its
    objective value matches the relaxation bound and P x vanishes within the
    accuracy of the dual split.  An empty return is a valid outcome: the
    split produced by the solver need not admit a witness even for exact
    instances.

    Near-zero entries of the numerical dual split are resolved only to about
    the square root of the solver gap, so the zero-pattern threshold is much
    wider than machine precision; the value re-check keeps the search sound.
    """
    if not relaxation.converged:
        return None
    from .exact import enumerate_candidates

    P0, N0 = relaxation.spn_split
    n = Q.n
    diag = np.clip(np.diag(N0.array), 0.0, None)
    P = P0.array + np.diag(diag)
    N = N0.array - np.diag(np.diag(N0.array))
    edges = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if N[i, j] <= zero_tol
    ]
    graph = Graph(n, edges)
    band = 1e-3 * (1.0 + float(np.max(np.abs(P))))
    value_tol = 1e-5 * max(1.0, abs(relaxation.ell))
    for clique in maximal_cliques(graph):
        cols = list(clique)
        sub = SymMatrix(Q.array[np.ix_(cols, cols)])
        for cand in sorted(enumerate_candidates(sub), key=lambda c: (c.value, c.support)):
            if cand.value > relaxation.ell + value_tol:
                continue
            x = np.zeros(n)
            x[cols] = cand.x
            if np.max(np.abs(P @ x)) > band:
                continue
            return SimplexPoint(x)
    return None


def special_support_exactness(
    Q: SymMatrix, x: SimplexPoint, cap: int = DEFAULT_CAP
) -> Optional[str]:
    """Exactness without any SDP solve for large supports, or vertices when n = 5.

    Requires x to be globally optimal (checked through the copositivity
    oracle); raises otherwise.
    """
    lam = quadratic_form(Q, x)
    shifted = SymMatrix(Q.array - lam * np.ones((Q.n, Q.n)))
    if not is_copositive(shifted, tol=1e-8, cap=cap):
        raise ValueError("x is not a global minimizer of the instance")
    support = len(x.support)
    if support >= Q.n - 1:
        return EXACT
    if Q.n == 5 and support == 1:
        return EXACT
    return None
