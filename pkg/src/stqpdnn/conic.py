"""Dense primal-dual interior-point solver for linear conic programs.

Handles programs over the product of one positive-semidefinite block and one
nonnegative-orthant block:

    minimize    <C, X> + c.z
    subject to  <A_i, X> + a_i.z = b_i,   i = 1..p
                X PSD,  z >= 0

The algorithm is infeasible-start path following with Nesterov-Todd scaling
on the PSD block and a Mehrotra predictor-corrector step.  A solve owns all
of its workspace; distinct solves can run concurrently.
"""

from __future__ import annotations

import sys
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .matrices import SymMatrix

MAX_PSD_DIM = 50

CONVERGED = "converged"
MAX_ITER = "max-iter"
NUMERICAL_FAILURE = "numerical-failure"


@dataclass(frozen=True)
class SolverOptions:
    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98
    presolve_tol: float = 1e-10
    verbose: bool = False


@dataclass(frozen=True)
class ConicProgram:
    """Problem data.  ``constraints`` holds triples (A_i, a_i, b_i)."""

    psd_dim: int
    nonneg_dim: int
    C: SymMatrix
    c: np.ndarray
    constraints: tuple

    def __init__(self, psd_dim: int, nonneg_dim: int, C: SymMatrix, c=None, constraints=()):
        if psd_dim < 1 or psd_dim > MAX_PSD_DIM:
            raise ValueError(f"psd_dim must be in 1..{MAX_PSD_DIM}, got {psd_dim}")
        if nonneg_dim < 0:
            raise ValueError("nonneg_dim must be nonnegative")
        if C.n != psd_dim:
            raise ValueError("objective matrix C has wrong dimension")
        cvec = np.zeros(nonneg_dim) if c is None else np.array(c, dtype=float)
        if cvec.shape != (nonneg_dim,):
            raise ValueError("objective vector c has wrong length")
        rows = []
        for A, a, b in constraints:
            if not isinstance(A, SymMatrix):
                A = SymMatrix(A)
            if A.n != psd_dim:
                raise ValueError("constraint matrix has wrong dimension")
            avec = np.zeros(nonneg_dim) if a is None else np.array(a, dtype=float)
            if avec.shape != (nonneg_dim,):
                raise ValueError("constraint vector has wrong length")
            rows.append((A, avec, float(b)))
        if not rows:
            raise ValueError("program needs at least one constraint")
        object.__setattr__(self, "psd_dim", int(psd_dim))
        object.__setattr__(self, "nonneg_dim", int(nonneg_dim))
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "c", cvec)
        object.__setattr__(self, "constraints", tuple(rows))

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)


@dataclass
class ConicSolution:
    X: SymMatrix
    z: np.ndarray
    y: np.ndarray
    S: SymMatrix
    s: np.ndarray
    status: str
    iterations: int
    gap: float
    pobj: float
    dobj: float
    pfeas: float
    dfeas: float
    dropped_rows: tuple = field(default_factory=tuple)
    trace: tuple = field(default_factory=tuple)  # per-iteration (pfeas, dfeas, gap, pobj, dobj)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def _svec_indices(n: int):
    iu = np.triu_indices(n)
    scale = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return iu, scale


def svec(M: np.ndarray, iu, scale) -> np.ndarray:
    return M[..., iu[0], iu[1]] * scale


def smat(v: np.ndarray, n: int, iu, scale) -> np.ndarray:
    M = np.zeros((n, n))
    M[iu] = v / scale
    M = M + M.T
    M[np.diag_indices(n)] /= 2.0
    return M


def _presolve(R: np.ndarray, b: np.ndarray, tol: float):
    """Select a maximal independent subset of rows; verify dropped rows are consistent."""
    p = R.shape[0]
    if p == 1:
        return list(range(p)), []
    _, rdiag, piv = sla.qr(R.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(rdiag))
    ref = d[0] if d.size and d[0] > 0 else 1.0
    rank = int(np.sum(d > tol * ref))
    rank = max(rank, 1)
    keep = sorted(int(i) for i in piv[:rank])
    drop = [i for i in range(p) if i not in set(keep)]
    if drop:
        coeff, *_ = np.linalg.lstsq(R[keep].T, R[drop].T, rcond=None)
        resid = np.abs(b[drop] - coeff.T @ b[keep])
        if np.any(resid > 1e-8 * (1.0 + np.max(np.abs(b)))):
            raise ValueError("inconsistent constraints detected in presolve")
    return keep, drop


def _max_step_psd(L: np.ndarray, dM: np.ndarray) -> float:
    """Largest alpha with M + alpha*dM PSD, given M = L L^T."""
    T = sla.solve_triangular(L, dM, lower=True)
    T = sla.solve_triangular(L, T.T, lower=True)
    lam_min = float(np.min(np.linalg.eigvalsh(0.5 * (T + T.T))))
    if lam_min >= 0.0:
        return np.inf
    return -1.0 / lam_min


def _max_step_orthant(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def solve_conic(prog: ConicProgram, opts: Optional[SolverOptions] = None) -> ConicSolution:
    """Solve the conic program; always returns the best iterate with a status."""
    opts = opts or SolverOptions()
    n, m = prog.psd_dim, prog.nonneg_dim
    iu, scale = _svec_indices(n)

    A_mats = np.stack([A.array for A, _, _ in prog.constraints])
    Apsd = svec(A_mats, iu, scale)
    Alin = np.stack([a for _, a, _ in prog.constraints]) if m else np.zeros((len(prog.constraints), 0))
    b_full = np.array([bi for _, _, bi in prog.constraints])

    keep, drop = _presolve(np.hstack([Apsd, Alin]), b_full, opts.presolve_tol)
    if drop:
        warnings.warn(f"presolve dropped dependent constraint rows {drop}", stacklevel=2)
    A_mats, Apsd, Alin, b = A_mats[keep], Apsd[keep], Alin[keep], b_full[keep]
    p = len(keep)

    Cmat = prog.C.array
    cvec = prog.c
    qnorm = max(np.max(np.abs(Cmat)), np.max(np.abs(cvec)) if m else 0.0, 1.0)
    bnorm = max(np.max(np.abs(b)), 1.0)

    tau_p = 1.0 + np.max(np.abs(b))
    tau_d = 1.0 + qnorm
    X = tau_p * np.eye(n)
    z = tau_p * np.ones(m)
    y = np.zeros(p)
    S = tau_d * np.eye(n)
    s = tau_d * np.ones(m)

    degree = n + m
    status = MAX_ITER
    it = 0

    def objective_values():
        pobj = float(np.sum(Cmat * X) + cvec @ z)
        dobj = float(b @ y)
        return pobj, dobj

    def residuals():
        rp = b - (Apsd @ svec(X, iu, scale) + (Alin @ z if m else 0.0))
        Rd = Cmat - S - np.tensordot(y, A_mats, axes=1)
        rd_lin = cvec - s - Alin.T @ y if m else np.zeros(0)
        return rp, 0.5 * (Rd + Rd.T), rd_lin

    pobj = dobj = 0.0
    pfeas = dfeas = relgap = np.inf
    trace = []

    for it in range(1, opts.max_iter + 1):
        rp, Rd, rd_lin = residuals()
        pobj, dobj = objective_values()
        pfeas = float(np.max(np.abs(rp))) / bnorm
        dfeas = float(max(np.max(np.abs(Rd)), np.max(np.abs(rd_lin)) if m else 0.0)) / qnorm
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        mu = (float(np.sum(X * S)) + (float(z @ s) if m else 0.0)) / degree
        trace.append((pfeas, dfeas, relgap, pobj, dobj))

        if opts.verbose:
            print(
                f"iter {it - 1:3d}  pfeas={pfeas:9.2e}  dfeas={dfeas:9.2e}  "
                f"relgap={relgap:9.2e}  mu={mu:9.2e}",
                file=sys.stderr,
            )
        if pfeas <= opts.tol_feas and dfeas <= opts.tol_feas and relgap <= opts.tol_gap:
            status = CONVERGED
            break

        # Nesterov-Todd scaling point for the PSD block.
        try:
            Lx = np.linalg.cholesky(X)
            M0 = Lx.T @ S @ Lx
            lam0, Q0 = np.linalg.eigh(0.5 * (M0 + M0.T))
            if np.min(lam0) <= 0:
                status = NUMERICAL_FAILURE
                break
            W = Lx @ (Q0 * lam0 ** -0.5) @ Q0.T @ Lx.T
            W = 0.5 * (W + W.T)
            lw, Uw = np.linalg.eigh(W)
            if np.min(lw) <= 0:
                status = NUMERICAL_FAILURE
                break
            Whalf = (Uw * np.sqrt(lw)) @ Uw.T
            Whalfinv = (Uw / np.sqrt(lw)) @ Uw.T
        except np.linalg.LinAlgError:
            status = NUMERICAL_FAILURE
            break

        lam_mat = 0.5 * (Whalfinv @ X @ Whalfinv + Whalf @ S @ Whalf)
        lam_mat = 0.5 * (lam_mat + lam_mat.T)
        lev, Ulam = np.linalg.eigh(lam_mat)
        if np.min(lev) <= 0:
            status = NUMERICAL_FAILURE
            break
        pair = 0.5 * (lev[:, None] + lev[None, :])

        def lop_inv(R):
            Rh = Ulam.T @ R @ Ulam
            out = Ulam @ (Rh / pair) @ Ulam.T
            return 0.5 * (out + out.T)

        w_lin = np.sqrt(z / s) if m else np.zeros(0)
        lam_lin = np.sqrt(z * s) if m else np.zeros(0)

        # Schur complement.
        WAW = W @ np.matmul(A_mats, W)
        WAW_flat = svec(WAW, iu, scale)
        Mschur = WAW_flat @ Apsd.T
        if m:
            Mschur = Mschur + (Alin * (w_lin ** 2)) @ Alin.T
        Mschur = 0.5 * (Mschur + Mschur.T)
        try:
            cho = sla.cho_factor(Mschur + 1e-14 * np.trace(Mschur) / p * np.eye(p))
        except np.linalg.LinAlgError:
            status = NUMERICAL_FAILURE
            break

        WRdW = W @ Rd @ W

        def newton(Dpsi, dpsi):
            g = Apsd @ svec(Whalf @ Dpsi @ Whalf, iu, scale) - Apsd @ svec(WRdW, iu, scale)
            if m:
                g = g + Alin @ (w_lin * dpsi - (w_lin ** 2) * rd_lin)
            dy = sla.cho_solve(cho, rp - g)
            dS = Rd - np.tensordot(dy, A_mats, axes=1)
            dS = 0.5 * (dS + dS.T)
            ds = rd_lin - Alin.T @ dy if m else np.zeros(0)
            dX = Whalf @ Dpsi @ Whalf - W @ dS @ W
            dX = 0.5 * (dX + dX.T)
            dz = w_lin * dpsi - (w_lin ** 2) * ds if m else np.zeros(0)
            return dX, dz, dy, dS, ds

        # Predictor (affine scaling direction).
        dX_a, dz_a, dy_a, dS_a, ds_a = newton(-lam_mat, -lam_lin)

        try:
            Ls = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            status = NUMERICAL_FAILURE
            break
        ap = min(1.0, _max_step_psd(Lx, dX_a), _max_step_orthant(z, dz_a))
        ad = min(1.0, _max_step_psd(Ls, dS_a), _max_step_orthant(s, ds_a))
        mu_aff = (
            float(np.sum((X + ap * dX_a) * (S + ad * dS_a)))
            + (float((z + ap * dz_a) @ (s + ad * ds_a)) if m else 0.0)
        ) / degree
        sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)

        # Corrector (combined direction).
        dXt = Whalfinv @ dX_a @ Whalfinv
        dSt = Whalf @ dS_a @ Whalf
        cross = 0.5 * (dXt @ dSt + dSt @ dXt)
        Dpsi = lop_inv(sigma * mu * np.eye(n) - (Ulam * lev ** 2) @ Ulam.T - cross)
        dpsi = (sigma * mu - z * s - dz_a * ds_a) / lam_lin if m else np.zeros(0)

        dX, dz, dy, dS, ds = newton(Dpsi, dpsi)

        ap = min(1.0, opts.step_fraction * min(_max_step_psd(Lx, dX), _max_step_orthant(z, dz)))
        ad = min(1.0, opts.step_fraction * min(_max_step_psd(Ls, dS), _max_step_orthant(s, ds)))
        if ap < 1e-8 and ad < 1e-8:
            status = NUMERICAL_FAILURE
            break

        X = X + ap * dX
        z = z + ap * dz
        y = y + ad * dy
        S = S + ad * dS
        s = s + ad * ds
        X = 0.5 * (X + X.T)
        S = 0.5 * (S + S.T)

    y_full = np.zeros(len(prog.constraints))
    y_full[keep] = y
    return ConicSolution(
        X=SymMatrix(X),
        z=z,
        y=y_full,
        S=SymMatrix(S),
        s=s,
        status=status,
        iterations=it,
        gap=relgap,
        pobj=pobj,
        dobj=dobj,
        pfeas=pfeas,
        dfeas=dfeas,
        dropped_rows=tuple(drop),
        trace=tuple(trace),
    )


def extract_dual_certificate(sol: ConicSolution, prog: ConicProgram):
    """Return (y, S, s) from a converged solution after checking dual residuals."""
    if not sol.converged:
        raise ValueError(f"dual certificate requires a converged solution, status={sol.status}")
    m = prog.nonneg_dim
    A_mats = np.stack([A.array for A, _, _ in prog.constraints])
    Rd = prog.C.array - sol.S.array - np.tensordot(sol.y, A_mats, axes=1)
    resid = float(np.max(np.abs(Rd)))
    if m:
        Alin = np.stack([a for _, a, _ in prog.constraints])
        resid = max(resid, float(np.max(np.abs(prog.c - sol.s - Alin.T @ sol.y))))
    if resid > 1e-7 * max(1.0, float(np.max(np.abs(prog.C.array)))):
        raise ValueError(f"dual residual {resid:.3g} too large for a certificate")
    return sol.y, sol.S, sol.s
