import numpy as np
import pytest

from stqpdnn.errors import MatrixFormatError
from stqpdnn.matrices import (
    SimplexPoint,
    SymMatrix,
    all_ones,
    barycenter,
    diag_scale,
    format_matrix_text,
    horn,
    identity,
    parse_matrix_text,
    permute,
    permute_point,
    principal_submatrix,
    quadratic_form,
    read_matrix,
    shift,
    uniform_on,
    vertex,
    write_matrix,
)

from util import EX1, EX7, HORN, random_symmetric


def test_symmetry_exact_by_construction():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(6, 6))
    a = a + a.T + rng.normal(scale=1e-14, size=(6, 6))  # sub-tolerance asymmetry
    Q = SymMatrix(a)
    assert np.array_equal(Q.array, Q.array.T)


def test_rejects_bad_input():
    with pytest.raises(MatrixFormatError):
        SymMatrix([[1, 2], [3, 4]])  # not symmetric
    with pytest.raises(MatrixFormatError):
        SymMatrix([[1, 2, 3], [2, 1, 1]])  # not square
    with pytest.raises(MatrixFormatError):
        SymMatrix([[np.inf]])
    with pytest.raises(MatrixFormatError):
        SymMatrix(np.zeros((0, 0)))


def test_matrix_is_immutable():
    Q = identity(3)
    with pytest.raises(ValueError):
        Q.array[0, 0] = 5.0


def test_quadratic_form_fixtures():
    assert quadratic_form(EX1, vertex(5, 0)) == 0.0
    mid = SimplexPoint([0.5, 0.5, 0, 0, 0])
    assert abs(quadratic_form(HORN, mid)) < 1e-15
    rng = np.random.default_rng(1)
    for n in (2, 4, 7):
        x = rng.dirichlet(np.ones(n))
        assert abs(quadratic_form(all_ones(n), SimplexPoint(x)) - 1.0) < 1e-12
    with pytest.raises(ValueError):
        quadratic_form(EX1, vertex(4, 0))


def test_shift_identity_and_zero():
    assert shift(EX1, 0.0) == EX1
    assert np.allclose(shift(HORN, 1.0).array, HORN.array + 1.0)


def test_diag_scale():
    Q = random_symmetric(np.random.default_rng(2), 5)
    assert diag_scale(Q, np.ones(5)) == Q
    d = np.array([1.0, 2.0, 0.5, 3.0])
    assert np.allclose(np.diag(diag_scale(identity(4), d).array), d * d)
    with pytest.raises(ValueError):
        diag_scale(Q, np.array([1, 1, 0, 1, 1.0]))
    with pytest.raises(ValueError):
        diag_scale(Q, np.ones(4))


def test_diag_scale_preserves_copositivity():
    from stqpdnn.exact import is_copositive

    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        Q = random_symmetric(rng, n)
        d = rng.uniform(0.2, 3.0, size=n)
        assert is_copositive(diag_scale(Q, d)) == is_copositive(Q)


def test_permute_identity_and_inverse():
    Q = random_symmetric(np.random.default_rng(4), 6)
    idp = list(range(6))
    assert permute(Q, idp) == Q
    pi = [2, 0, 5, 1, 4, 3]
    inv = np.argsort(pi)
    assert permute(permute(Q, pi), inv) == Q
    with pytest.raises(ValueError):
        permute(Q, [0, 0, 1, 2, 3, 4])


def test_permute_value_invariance():
    from stqpdnn.exact import solve_stqp

    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        Q = random_symmetric(rng, n)
        pi = [int(v) for v in rng.permutation(n)]
        r1 = solve_stqp(Q)
        r2 = solve_stqp(permute(Q, pi))
        assert abs(r1.nu - r2.nu) < 1e-9
        supports1 = {tuple(sorted(pi[j] for j in m.support)) for m in r1.minimizers}
        supports2 = {m.support for m in r2.minimizers}
        assert supports1 == supports2


def test_permute_point_matches_matrix_convention():
    Q = random_symmetric(np.random.default_rng(12), 5)
    x = SimplexPoint(np.random.default_rng(13).dirichlet(np.ones(5)))
    pi = [3, 0, 4, 2, 1]
    assert abs(
        quadratic_form(Q, x) - quadratic_form(permute(Q, pi), permute_point(x, pi))
    ) < 1e-12


def test_principal_submatrix():
    assert principal_submatrix(EX1, range(5)) == EX1
    # the {3,4} block (1-based) of the Example 4/7 matrix
    sub = principal_submatrix(EX7, [2, 3])
    assert np.array_equal(sub.array, np.array([[2.0, 1.0], [1.0, 2.0]]))
    single = principal_submatrix(EX1, [3])
    assert single.array.shape == (1, 1) and single.entry(0, 0) == 1.0
    with pytest.raises(ValueError):
        principal_submatrix(EX1, [])
    with pytest.raises(ValueError):
        principal_submatrix(EX1, [5])


def test_simplex_point_support_partition():
    p = SimplexPoint([0.5, 0.5 - 1e-10, 1e-10, 0.0], tol_zero=1e-8)
    assert p.support == (0, 1)
    assert p.zero_set == (2, 3)
    assert set(p.support) | set(p.zero_set) == {0, 1, 2, 3}
    with pytest.raises(ValueError):
        SimplexPoint([0.5, 0.4])  # sums to 0.9
    with pytest.raises(ValueError):
        SimplexPoint([1.5, -0.5])


def test_simplex_constructors():
    assert vertex(4, 2).support == (2,)
    assert barycenter(3).support == (0, 1, 2)
    assert uniform_on(5, [1, 3]).support == (1, 3)
    with pytest.raises(ValueError):
        uniform_on(3, [])


def test_horn_matrix_shape():
    H = horn()
    assert H.n == 5
    assert np.array_equal(H.array, H.array.T)
    assert set(np.unique(H.array)) == {-1.0, 1.0}
    circ = np.array([1.0, -1, 1, 1, -1])
    for i in range(5):
        assert np.array_equal(H.array[i], np.roll(circ, i))


def test_text_format_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    for n in (1, 3, 8):
        Q = random_symmetric(rng, n, -17.3, 41.0)
        again = parse_matrix_text(format_matrix_text(Q))
        assert np.array_equal(again.array, Q.array)
        path = tmp_path / f"m{n}.txt"
        write_matrix(path, Q)
        assert np.array_equal(read_matrix(path).array, Q.array)


def test_text_format_rejects():
    with pytest.raises(MatrixFormatError):
        parse_matrix_text("")
    with pytest.raises(MatrixFormatError):
        parse_matrix_text("x\n1")
    with pytest.raises(MatrixFormatError):
        parse_matrix_text("2\n1 2 3")
    with pytest.raises(MatrixFormatError):
        parse_matrix_text("2\n1 2\n3 4")  # asymmetric
    with pytest.raises(MatrixFormatError):
        parse_matrix_text("2\n1 a\na 1")
