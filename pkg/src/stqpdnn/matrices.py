"""Core value types: symmetric matrices, simplex points, and elementary transforms.

All types are immutable after construction; every transform returns a new value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import MatrixFormatError

SYMMETRY_ATOL = 1e-12
SIMPLEX_SUM_ATOL = 1e-12
DEFAULT_TOL_ZERO = 1e-8


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SymMatrix:
    """Dense real symmetric n x n matrix with exact entrywise symmetry.

    The constructor mirrors the upper triangle onto the lower one, so
    ``entry(i, j) == entry(j, i)`` holds bitwise for every stored matrix.
    Input that is not symmetric within ``SYMMETRY_ATOL`` is rejected.
    """

    data: np.ndarray = field(repr=False)

    def __init__(self, values) -> None:
        a = np.array(values, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise MatrixFormatError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise MatrixFormatError("matrix entries must be finite")
        if np.max(np.abs(a - a.T)) > SYMMETRY_ATOL:
            raise MatrixFormatError("matrix is not symmetric within 1e-12")
        upper = np.triu(a)
        a = upper + np.triu(a, 1).T
        object.__setattr__(self, "data", _freeze(a))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Read-only ndarray view of the entries."""
        return self.data

    def entry(self, i: int, j: int) -> float:
        return float(self.data[i, j])

    def close_to(self, other: "SymMatrix", atol: float = 1e-12) -> bool:
        return self.n == other.n and bool(np.max(np.abs(self.data - other.data)) <= atol)

    def __eq__(self, other) -> bool:
        return isinstance(other, SymMatrix) and self.n == other.n and bool(
            np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash(self.data.tobytes())

    def __repr__(self) -> str:
        return f"SymMatrix(n={self.n})"


def identity(n: int) -> SymMatrix:
    return SymMatrix(np.eye(n))


def all_ones(n: int) -> SymMatrix:
    """The matrix E = ee^T."""
    return SymMatrix(np.ones((n, n)))


def horn() -> SymMatrix:
    """The 5x5 Horn matrix, copositive but not a PSD-plus-nonnegative sum."""
    return SymMatrix(
        [
            [1, -1, 1, 1, -1],
            [-1, 1, -1, 1, 1],
            [1, -1, 1, -1, 1],
            [1, 1, -1, 1, -1],
            [-1, 1, 1, -1, 1],
        ]
    )


@dataclass(frozen=True)
class SimplexPoint:
    """A point of the unit simplex with an explicit zero threshold.

    Coordinates below ``tol_zero`` are treated as zero by :meth:`support`;
    the support and zero set always partition ``{0, .., n-1}``.
    """

    x: np.ndarray = field(repr=False)
    tol_zero: float = DEFAULT_TOL_ZERO

    def __init__(self, values, tol_zero: float = DEFAULT_TOL_ZERO) -> None:
        v = np.array(values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("simplex point must be a nonempty vector")
        if np.min(v) < -1e-9:
            raise ValueError(f"negative coordinate {np.min(v):.3g} in simplex point")
        if abs(v.sum() - 1.0) > max(SIMPLEX_SUM_ATOL, 1e-12 * v.size):
            raise ValueError(f"coordinates sum to {v.sum()!r}, expected 1")
        v = np.maximum(v, 0.0)
        object.__setattr__(self, "x", _freeze(v))
        object.__setattr__(self, "tol_zero", float(tol_zero))

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def support(self) -> tuple[int, ...]:
        """A(x): indices with x_j > tol_zero (0-based)."""
        return tuple(int(j) for j in np.nonzero(self.x > self.tol_zero)[0])

    @property
    def zero_set(self) -> tuple[int, ...]:
        """Z(x): complement of the support (0-based)."""
        return tuple(int(j) for j in np.nonzero(self.x <= self.tol_zero)[0])

    def __repr__(self) -> str:
        return f"SimplexPoint({np.array2string(self.x, precision=6)})"


def vertex(n: int, j: int) -> SimplexPoint:
    """The j-th unit vector e_j as a simplex point (0-based j)."""
    v = np.zeros(n)
    v[j] = 1.0
    return SimplexPoint(v)


def barycenter(n: int) -> SimplexPoint:
    return SimplexPoint(np.full(n, 1.0 / n))


def uniform_on(n: int, support: Iterable[int]) -> SimplexPoint:
    """The uniform point on a given support set (0-based indices)."""
    idx = sorted(set(int(j) for j in support))
    if not idx or idx[0] < 0 or idx[-1] >= n:
        raise ValueError("support must be a nonempty subset of {0,..,n-1}")
    v = np.zeros(n)
    v[idx] = 1.0 / len(idx)
    return SimplexPoint(v)


def quadratic_form(Q: SymMatrix, x: SimplexPoint) -> float:
    """x^T Q x."""
    if Q.n != x.n:
        raise ValueError(f"dimension mismatch: matrix is {Q.n}, point is {x.n}")
    return float(x.x @ Q.data @ x.x)


def shift(Q: SymMatrix, lam: float) -> SymMatrix:
    """Q + lam * E; shifts both the exact optimum and the relaxation bound by lam."""
    return SymMatrix(Q.data + float(lam))


def diag_scale(Q: SymMatrix, d) -> SymMatrix:
    """D Q D for D = diag(d) with d > 0; preserves cone memberships."""
    d = np.asarray(d, dtype=float)
    if d.shape != (Q.n,):
        raise ValueError(f"scaling vector has shape {d.shape}, expected ({Q.n},)")
    if np.min(d) <= 0:
        raise ValueError("diagonal scaling requires strictly positive entries")
    return SymMatrix(Q.data * np.outer(d, d))


def permute(Q: SymMatrix, pi: Sequence[int]) -> SymMatrix:
    """J^T Q J for the permutation matrix J of pi, i.e. entry (i,j) -> (pi[i], pi[j]).

    ``pi`` maps old indices to new positions: row i of Q lands on row pi[i].
    """
    p = np.asarray(pi, dtype=int)
    if p.shape != (Q.n,) or sorted(p.tolist()) != list(range(Q.n)):
        raise ValueError("pi must be a permutation of 0..n-1")
    out = np.empty_like(Q.data)
    out[np.ix_(p, p)] = Q.data
    return SymMatrix(out)


def permute_point(x: SimplexPoint, pi: Sequence[int]) -> SimplexPoint:
    """Image of a simplex point under the same permutation convention as :func:`permute`."""
    p = np.asarray(pi, dtype=int)
    out = np.empty_like(x.x)
    out[p] = x.x
    return SimplexPoint(out, tol_zero=x.tol_zero)


def principal_submatrix(Q: SymMatrix, indices: Iterable[int]) -> SymMatrix:
    """Q_AA for a nonempty index set A (0-based)."""
    idx = sorted(set(int(j) for j in indices))
    if not idx:
        raise ValueError("index set must be nonempty")
    if idx[0] < 0 or idx[-1] >= Q.n:
        raise ValueError(f"index set out of range for n={Q.n}")
    return SymMatrix(Q.data[np.ix_(idx, idx)])


# --- shared matrix text format ------------------------------------------------
#
# First line: n.  Then n rows of n whitespace-separated entries.  Values are
# written with 17 significant digits so that write/read round-trips bitwise.


def format_matrix_text(Q: SymMatrix) -> str:
    lines = [str(Q.n)]
    for row in Q.data:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def parse_matrix_text(text: str) -> SymMatrix:
    tokens = text.split()
    if not tokens:
        raise MatrixFormatError("empty matrix file")
    try:
        n = int(tokens[0])
    except ValueError as exc:
        raise MatrixFormatError(f"first token must be the dimension, got {tokens[0]!r}") from exc
    if n < 1:
        raise MatrixFormatError(f"dimension must be positive, got {n}")
    values = tokens[1:]
    if len(values) != n * n:
        raise MatrixFormatError(f"expected {n * n} entries for n={n}, got {len(values)}")
    try:
        a = np.array([float(v) for v in values]).reshape(n, n)
    except ValueError as exc:
        raise MatrixFormatError(f"non-numeric matrix entry: {exc}") from exc
    return SymMatrix(a)


def read_matrix(path) -> SymMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix_text(fh.read())


def write_matrix(path, Q: SymMatrix) -> None:
    import os
    import tempfile

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(format_matrix_text(Q))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
