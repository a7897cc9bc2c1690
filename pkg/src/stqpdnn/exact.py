"""Exact global solution of small standard quadratic programs.

Enumerates the stationary point of every support's KKT system; the global
minimum over the simplex is always attained at one of them.  Also provides
the copositivity oracle, zero-set extraction, and first/second order
optimality checks built on the same machinery.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import CapExceededError
from .matrices import DEFAULT_TOL_ZERO, SimplexPoint, SymMatrix, quadratic_form

DEFAULT_CAP = 14
_RANK_TOL = 1e-10
_FEAS_TOL = 1e-10


@dataclass(frozen=True)
class KktCertificate:
    """First-order certificate: s = Qx - (x^T Q x) e with s >= 0 and x_j s_j = 0."""

    x: SimplexPoint
    s: np.ndarray
    value: float


@dataclass(frozen=True)
class FeasibleDirectionCone:
    """Directions d with e^T d = 0, d^T Qx = 0, and d_j >= 0 on the zero set of x."""

    x: SimplexPoint
    eq_rows: np.ndarray  # 2 x n: the rows e^T and (Qx)^T
    signed: tuple  # coordinates constrained to be nonnegative

    def contains(self, d: np.ndarray, tol: float = 1e-9) -> bool:
        if np.max(np.abs(self.eq_rows @ d)) > tol:
            return False
        return all(d[j] >= -tol for j in self.signed)


@dataclass(frozen=True)
class SolveResult:
    nu: float
    minimizers: tuple
    multipliers: tuple


@dataclass(frozen=True)
class _Candidate:
    value: float
    support: tuple
    x: np.ndarray


def _candidate_from_vector(Q: np.ndarray, support, x_sub, tol_zero: float) -> _Candidate:
    n = Q.shape[0]
    x = np.zeros(n)
    x[list(support)] = x_sub
    x = np.maximum(x, 0.0)
    total = x.sum()
    if total <= 0:
        raise ValueError("degenerate candidate with zero mass")
    x /= total
    value = float(x @ Q @ x)
    actual = tuple(int(j) for j in np.nonzero(x > tol_zero)[0])
    return _Candidate(value=value, support=actual, x=x)


def _relative_interior_point(x0: np.ndarray, null_basis: np.ndarray):
    """Maximize the minimum coordinate over the affine slice x0 + null_basis @ alpha."""
    d = null_basis.shape[1]
    m = x0.size
    # variables: (alpha_1..alpha_d, t); maximize t s.t. x0 + N alpha >= t e
    A_ub = np.hstack([-null_basis, np.ones((m, 1))])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=x0,
        bounds=[(None, None)] * (d + 1),
        method="highs",
    )
    if not res.success:
        return None, -np.inf
    alpha = res.x[:d]
    return x0 + null_basis @ alpha, float(res.x[-1])


def enumerate_candidates(Q: SymMatrix, tol_zero: float = DEFAULT_TOL_ZERO):
    """One stationary candidate per support whose KKT system is feasible.

    Supports are scanned in lexicographic order per size; for a singular
    bordered system the affine solution set is intersected with the
    nonnegative orthant by maximizing the minimum coordinate (all KKT points
    on a flat face share the same objective value).

    The quadratic block is normalized to unit magnitude before bordering so
    that rank decisions are not distorted by the scale gap between Q and the
    unit border; stationary points are scale invariant and objective values
    are recomputed from the original matrix.
    """
    n = Q.n
    A = Q.array
    qscale = float(np.max(np.abs(A)))
    A_unit = A / qscale if qscale > 0 else A
    rhs_template = {}
    out = []
    for k in range(1, n + 1):
        combs = np.array(list(itertools.combinations(range(n), k)), dtype=int)
        mk = combs.shape[0]
        Qsub = A_unit[combs[:, :, None], combs[:, None, :]]
        # bordered stationarity system; the multiplier component carries an
        # internal sign, objective values are always recomputed from x
        B = np.zeros((mk, k + 1, k + 1))
        B[:, :k, :k] = Qsub
        B[:, k, :k] = 1.0
        B[:, :k, k] = 1.0
        if k + 1 not in rhs_template:
            r = np.zeros(k + 1)
            r[-1] = 1.0
            rhs_template[k + 1] = r
        rhs = rhs_template[k + 1]

        U, sv, Vt = np.linalg.svd(B)
        full_rank = sv[:, -1] > np.maximum(sv[:, 0], 1.0) * _RANK_TOL

        if np.any(full_rank):
            idx = np.nonzero(full_rank)[0]
            Uf, svf, Vtf = U[idx], sv[idx], Vt[idx]
            coeff = np.einsum("mji,j->mi", Uf, rhs) / svf
            sol = np.einsum("mji,mj->mi", Vtf, coeff)
            feas = sol[:, :k].min(axis=1) >= -_FEAS_TOL
            for row, m_i in zip(np.nonzero(feas)[0], idx[feas]):
                support = tuple(int(j) for j in combs[m_i])
                out.append(_candidate_from_vector(A, support, sol[row, :k], tol_zero))

        for m_i in np.nonzero(~full_rank)[0]:
            support = tuple(int(j) for j in combs[m_i])
            Bi, Ui, svi, Vti = B[m_i], U[m_i], sv[m_i], Vt[m_i]
            rank = int(np.sum(svi > max(svi[0], 1.0) * _RANK_TOL))
            inv = np.zeros_like(svi)
            inv[:rank] = 1.0 / svi[:rank]
            particular = Vti.T @ (inv * (Ui.T @ rhs))
            if np.max(np.abs(Bi @ particular - rhs)) > 1e-8 * max(1.0, np.max(np.abs(Bi))):
                continue  # no stationary point on this face
            null_basis = Vti[rank:].T[:k, :]  # x-part; the mu-component of null vectors is 0
            x0 = particular[:k]
            point, tmin = _relative_interior_point(x0, null_basis)
            if point is None or tmin < -_FEAS_TOL:
                continue
            out.append(_candidate_from_vector(A, support, point, tol_zero))
    return out


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise CapExceededError(f"exact solver supports n <= {cap}, got n = {n}")


def solve_stqp(
    Q: SymMatrix,
    cap: int = DEFAULT_CAP,
    tol_zero: float = DEFAULT_TOL_ZERO,
    dedup_tol: float = 1e-9,
    verify: bool = False,
) -> SolveResult:
    """Global minimum of x^T Q x over the simplex, with one minimizer per optimal support."""
    _check_cap(Q.n, cap)
    cands = enumerate_candidates(Q, tol_zero)
    if not cands:
        raise RuntimeError("internal error: no KKT candidate found (vertices are always candidates)")
    nu = min(c.value for c in cands)
    best = sorted(
        (c for c in cands if c.value <= nu + dedup_tol),
        key=lambda c: (c.value, c.support),
    )
    seen = set()
    minimizers = []
    multipliers = []
    for c in best:
        if c.support in seen:
            continue
        seen.add(c.support)
        point = SimplexPoint(c.x, tol_zero=tol_zero)
        minimizers.append(point)
        multipliers.append(Q.array @ c.x - c.value * np.ones(Q.n))
    order = sorted(range(len(minimizers)), key=lambda i: minimizers[i].support)
    minimizers = tuple(minimizers[i] for i in order)
    multipliers = tuple(multipliers[i] for i in order)
    result = SolveResult(nu=float(nu), minimizers=minimizers, multipliers=multipliers)
    if verify:
        shifted = SymMatrix(Q.array - result.nu * np.ones((Q.n, Q.n)))
        check = solve_stqp(shifted, cap=cap, tol_zero=tol_zero, verify=False)
        if check.nu < -1e-8 * max(1.0, abs(result.nu)):
            raise RuntimeError("global optimality verification failed")
    return result


def optimal_set(Q: SymMatrix, tol: float = 1e-9, cap: int = DEFAULT_CAP,
                tol_zero: float = DEFAULT_TOL_ZERO):
    """All stationary representatives within tol of the optimum, one per support."""
    _check_cap(Q.n, cap)
    cands = enumerate_candidates(Q, tol_zero)
    nu = min(c.value for c in cands)
    seen = set()
    points = []
    for c in sorted(cands, key=lambda c: (c.value, c.support)):
        if c.value > nu + tol or c.support in seen:
            continue
        seen.add(c.support)
        points.append(SimplexPoint(c.x, tol_zero=tol_zero))
    return sorted(points, key=lambda p: p.support)


def is_copositive(M: SymMatrix, tol: float = 1e-9, cap: int = DEFAULT_CAP) -> bool:
    """True iff the minimum of x^T M x over the simplex is >= -tol."""
    return solve_stqp(M, cap=cap).nu >= -tol


def copositive_zeros(M: SymMatrix, tol: float = 1e-9, cap: int = DEFAULT_CAP):
    """Zeros of a copositive matrix: simplex points with x^T M x = 0 (one per support)."""
    _check_cap(M.n, cap)
    nu = solve_stqp(M, cap=cap).nu
    if nu < -tol:
        raise ValueError(f"matrix is not copositive: nu = {nu:.3g}")
    if nu > tol:
        return []
    return optimal_set(M, tol=tol, cap=cap)


def check_kkt(Q: SymMatrix, x: SimplexPoint, tol: float = 1e-8) -> Optional[KktCertificate]:
    """Build s = Qx - (x^T Q x) e; certificate iff s >= -tol and complementarity holds."""
    if Q.n != x.n:
        raise ValueError("dimension mismatch")
    value = quadratic_form(Q, x)
    s = Q.array @ x.x - value * np.ones(Q.n)
    if np.min(s) < -tol:
        return None
    if np.max(np.abs(x.x * s)) > tol:
        return None
    return KktCertificate(x=x, s=s, value=value)


def feasible_direction_cone(Q: SymMatrix, x: SimplexPoint) -> FeasibleDirectionCone:
    rows = np.vstack([np.ones(Q.n), Q.array @ x.x])
    return FeasibleDirectionCone(x=x, eq_rows=rows, signed=x.zero_set)


def check_second_order(
    Q: SymMatrix, cert: KktCertificate, tol: float = 1e-8, cap: int = DEFAULT_CAP
) -> Optional[bool]:
    """d^T Q d >= -tol over the feasible-direction cone at a KKT point.

    The two equality rows are eliminated against the support; the multipliers
    split the zero set into inactive coordinates (pinned to 0) and active
    ones (sign constrained).  After requiring PSD on the free block and
    Schur-complementing it out, the residual test is a copositivity check in
    dimension strictly below n.  Returns None when the free block is singular
    with an incompatible coupling (indeterminate).
    """
    x = cert.x
    free = list(x.support)
    if not free:
        raise ValueError("certificate has empty support")
    # s_j > 0 pins d_j to 0 through the gradient-orthogonality row
    zero_zero = [j for j in x.zero_set if cert.s[j] <= tol]

    pivot = free[0]
    u_coords = free[1:]
    g = len(zero_zero)
    f = len(u_coords)
    n = Q.n

    cols = []
    for q in u_coords + zero_zero:
        col = np.zeros(n)
        col[q] = 1.0
        col[pivot] = -1.0
        cols.append(col)
    if not cols:
        return True  # D(x) = {0}
    T = np.column_stack(cols)
    R = T.T @ Q.array @ T
    R = 0.5 * (R + R.T)
    scale = max(1.0, float(np.max(np.abs(R))))

    if f == 0:
        return is_copositive(SymMatrix(R), tol=tol * scale, cap=cap)

    Ruu = R[:f, :f]
    Ruv = R[:f, f:]
    Rvv = R[f:, f:]
    w, V = np.linalg.eigh(Ruu)
    if w[0] < -tol * scale:
        return False
    sing_tol = max(np.abs(w).max(), 1.0) * 1e-10
    nonsing = w > sing_tol
    if g == 0:
        return True  # PSD free block, no sign-constrained directions left
    coeff = V.T @ Ruv
    if not np.all(nonsing):
        resid = coeff[~nonsing]
        if np.max(np.abs(resid)) > tol * scale:
            return None  # indeterminate: flat free direction couples to the cone block
        coeff = coeff[nonsing]
        w = w[nonsing]
    schur = Rvv - coeff.T @ (coeff / w[:, None])
    schur = 0.5 * (schur + schur.T)
    return is_copositive(SymMatrix(schur), tol=tol * scale, cap=cap)
