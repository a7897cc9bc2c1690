"""Shared helpers for the test suite: fixtures and independent oracles."""

from __future__ import annotations

import numpy as np

from stqpdnn.fixtures import fixture_matrix
from stqpdnn.matrices import SymMatrix

EX1 = fixture_matrix("ex1")
EX2 = fixture_matrix("ex2")
EX3 = fixture_matrix("ex3")
EX4 = fixture_matrix("ex4")
EX5 = fixture_matrix("ex5")
EX6 = fixture_matrix("ex6")
EX7 = fixture_matrix("ex7")
EX8 = fixture_matrix("ex8")
HORN = fixture_matrix("horn")


def random_symmetric(rng: np.random.Generator, n: int, lo: float = -2.0, hi: float = 2.0) -> SymMatrix:
    A = rng.uniform(lo, hi, size=(n, n))
    return SymMatrix(0.5 * (A + A.T))


def simplex_grid(n: int, k: int) -> np.ndarray:
    """All points of the simplex with coordinates that are multiples of 1/k."""
    comps = [np.zeros((1, 0), dtype=np.int64)]
    counts = [np.array([0], dtype=np.int64)]
    for _ in range(n - 1):
        prev, used = comps[-1], counts[-1]
        rows = []
        tallies = []
        for row, u in zip(prev, used):
            budget = k - u
            vals = np.arange(budget + 1)
            block = np.repeat(row[None, :], budget + 1, axis=0)
            rows.append(np.hstack([block, vals[:, None]]))
            tallies.append(u + vals)
        comps.append(np.vstack(rows))
        counts.append(np.concatenate(tallies))
    body, used = comps[-1], counts[-1]
    last = (k - used)[:, None]
    return np.hstack([body, last]).astype(float) / k


def grid_min_value(Q: SymMatrix, k: int = 24) -> float:
    """Brute-force minimum of the quadratic form over the denominator-k grid."""
    pts = simplex_grid(Q.n, k)
    vals = np.einsum("ij,jk,ik->i", pts, Q.array, pts)
    return float(vals.min())


def grid_slack(Q: SymMatrix, k: int = 24) -> float:
    """Bound on grid-min minus true min: rounding any x to the grid moves the
    value by at most ||Q||_max (2 eps + eps^2) with eps = (n + 1) / k."""
    eps = (Q.n + 1) / k
    return float(np.max(np.abs(Q.array))) * (2 * eps + eps * eps)
