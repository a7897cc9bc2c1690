import numpy as np
import pytest
from scipy.optimize import linprog

from stqpdnn.conic import (
    ConicProgram,
    SolverOptions,
    extract_dual_certificate,
    solve_conic,
)
from stqpdnn.matrices import SymMatrix, all_ones, identity
from stqpdnn.relax import build_dnn_program

from util import EX2, HORN


def trace_one_program(C, n):
    return ConicProgram(n, 0, C, None, [(all_ones(n), None, 1.0)])


def test_trace_min_analytic():
    sol = solve_conic(trace_one_program(identity(2), 2))
    assert sol.converged
    assert abs(sol.pobj - 0.5) < 1e-7


def test_dnn_relaxation_of_all_ones():
    sol = solve_conic(build_dnn_program(all_ones(5)))
    assert sol.converged
    assert abs(sol.pobj - 1.0) < 1e-7


def test_dnn_relaxation_of_horn():
    sol = solve_conic(build_dnn_program(HORN))
    assert sol.converged
    assert abs(sol.pobj - (-0.1056)) < 1e-3
    assert abs(sol.pobj - (2.0 / np.sqrt(5.0) - 1.0)) < 1e-6


def _check_solution_invariants(prog, sol):
    assert np.min(np.linalg.eigvalsh(sol.X.array)) >= -1e-9
    assert np.min(np.linalg.eigvalsh(sol.S.array)) >= -1e-9
    if prog.nonneg_dim:
        assert np.min(sol.z) >= -1e-9
        assert np.min(sol.s) >= -1e-9
    assert sol.pfeas <= 1e-8
    assert sol.dfeas <= 1e-8
    assert sol.gap <= 1e-7


def test_solution_invariants_on_dnn_programs():
    for Q in (EX2, HORN, identity(4)):
        prog = build_dnn_program(Q)
        sol = solve_conic(prog)
        assert sol.converged
        _check_solution_invariants(prog, sol)
        # weak duality at every iterate once both residuals are small
        for pfeas, dfeas, _, pobj, dobj in sol.trace:
            if pfeas < 1e-6 and dfeas < 1e-6:
                assert pobj >= dobj - 1e-6


def test_dual_certificate_for_example_2():
    prog = build_dnn_program(EX2)
    sol = solve_conic(prog)
    y, S, s = extract_dual_certificate(sol, prog)
    sigma = y[0]
    assert abs(sigma - 0.4) < 1e-6
    # S is the PSD part; Q - sigma*E - S must be entrywise nonnegative (up to tol)
    N = EX2.array - sigma - S.array
    assert np.min(N) >= -1e-7
    assert np.min(np.linalg.eigvalsh(S.array)) >= -1e-9


def test_dual_certificate_for_all_ones_and_horn():
    for Q, sigma_expected in ((all_ones(5), 1.0), (HORN, 2.0 / np.sqrt(5.0) - 1.0)):
        prog = build_dnn_program(Q)
        sol = solve_conic(prog)
        y, S, s = extract_dual_certificate(sol, prog)
        assert abs(y[0] - sigma_expected) < 1e-5


def test_dual_certificate_requires_convergence():
    prog = build_dnn_program(HORN)
    sol = solve_conic(prog, SolverOptions(max_iter=1))
    assert not sol.converged
    with pytest.raises(ValueError):
        extract_dual_certificate(sol, prog)


def test_orthant_only_problems_match_linprog():
    rng = np.random.default_rng(8)
    dummy = SymMatrix([[0.0]])
    pin = SymMatrix([[1.0]])
    for _ in range(10):
        m, p = 6, 3
        A = rng.normal(size=(p, m))
        z0 = rng.uniform(0.5, 1.5, size=m)
        b = A @ z0  # feasible by construction
        c = rng.normal(size=m)
        res = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * m, method="highs")
        if not res.success:
            continue
        cons = [(pin, np.zeros(m), 1.0)]  # pin the dummy PSD block
        for i in range(p):
            cons.append((dummy, A[i], float(b[i])))
        sol = solve_conic(ConicProgram(1, m, dummy, c, cons))
        assert sol.converged
        assert abs(sol.pobj - res.fun) < 1e-6 * max(1.0, abs(res.fun))


def test_scaling_robustness():
    base = solve_conic(trace_one_program(identity(3), 3))
    scaled = solve_conic(trace_one_program(SymMatrix(1e3 * np.eye(3)), 3))
    assert abs(scaled.pobj - 1e3 * base.pobj) <= 1e-6 * abs(scaled.pobj)


def test_determinism():
    prog = build_dnn_program(HORN)
    a = solve_conic(prog)
    b = solve_conic(prog)
    assert a.iterations == b.iterations
    assert a.pobj == b.pobj
    assert np.array_equal(a.X.array, b.X.array)


def test_presolve_drops_duplicate_rows():
    prog = ConicProgram(
        2,
        0,
        identity(2),
        None,
        [(all_ones(2), None, 1.0), (all_ones(2), None, 1.0)],
    )
    with pytest.warns(UserWarning, match="dropped dependent"):
        sol = solve_conic(prog)
    assert sol.converged
    assert sol.dropped_rows == (1,)
    assert abs(sol.pobj - 0.5) < 1e-7


def test_presolve_detects_inconsistency():
    prog = ConicProgram(
        2,
        0,
        identity(2),
        None,
        [(all_ones(2), None, 1.0), (all_ones(2), None, 2.0)],
    )
    with pytest.raises(ValueError, match="inconsistent"):
        solve_conic(prog)


def test_program_validation():
    with pytest.raises(ValueError):
        ConicProgram(0, 0, identity(1), None, [(identity(1), None, 1.0)])
    with pytest.raises(ValueError):
        ConicProgram(60, 0, identity(60), None, [(identity(60), None, 1.0)])
    with pytest.raises(ValueError):
        ConicProgram(2, 0, identity(2), None, [])
    with pytest.raises(ValueError):
        ConicProgram(2, 0, identity(3), None, [(identity(2), None, 1.0)])
    with pytest.raises(ValueError):
        ConicProgram(2, 2, identity(2), [1.0], [(identity(2), [1.0, 1.0], 1.0)])


def test_verbose_trace(capsys):
    solve_conic(trace_one_program(identity(2), 2), SolverOptions(verbose=True))
    err = capsys.readouterr().err
    assert "pfeas" in err and "relgap" in err
