import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgraph.errors import InvalidMatrix, NotAnEigenvalue, ShapeError
from qgraph.matrixcore import (
    RankTolerance,
    Subspace,
    as_square_pair,
    cluster,
    image,
    jordan_chain_length,
    kernel,
    numeric_rank,
    ordered_schur,
    pencil_eigenvalues,
    pencil_is_singular,
    subspace_preimage,
    wong_sequences,
)


def test_rank_examples():
    assert numeric_rank(np.eye(3)) == 3
    assert numeric_rank(np.zeros((2, 2))) == 0


def test_rank_tiny_singular_value_against_high_precision_svd():
    M = [[1, 0], [0, 1e-16]]
    sv = mpmath.svd_r(mpmath.matrix(M), compute_uv=False)
    expected = sum(1 for s in sv if s > 1e-10 * 2 * max(sv))
    assert numeric_rank(M) == expected == 1


def test_rank_tolerance_validation():
    with pytest.raises(ValueError):
        RankTolerance(-1.0)
    with pytest.raises(InvalidMatrix):
        numeric_rank([[np.nan]])
    with pytest.raises(ShapeError):
        as_square_pair(np.eye(2), np.eye(3))


def test_kernel_examples():
    assert kernel(np.zeros((2, 2))).dim == 2
    assert kernel(np.eye(2)).dim == 0
    K = kernel([[1, 0], [0, 0]])
    assert K.dim == 1 and K.contains([0, 1])


def test_preimage_examples():
    V = Subspace.span(np.array([[1.0], [0.0]]))
    assert subspace_preimage(np.eye(2), V).dim == 1
    assert subspace_preimage(np.zeros((2, 2)), V).dim == 2
    P = subspace_preimage([[0, 0], [1, 0]], V)
    assert P.dim == 1 and P.contains([0, 1])


@given(st.integers(0, 2**31 - 1))
def test_preimage_brute_force(seed):
    rng = np.random.default_rng(seed)
    d = 4
    M = rng.standard_normal((d, 2)) @ rng.standard_normal((2, d))
    V = Subspace.span(rng.standard_normal((d, 2)))
    P = subspace_preimage(M, V)
    for x in P.basis.T:
        assert V.contains(M @ x, tol=1e-8)
    # dimension from rank counting: dim = dim Ker M + dim(Ran M ∩ V)
    expected = kernel(M).dim + Subspace.span(M).intersect(V).dim
    assert P.dim == expected


def test_image_of_subspace():
    V = Subspace.span(np.array([[1.0], [0.0]]))
    img = image(np.array([[0, 0], [1, 0]]), V)
    assert img.dim == 1 and img.contains([0, 1])


def test_pencil_examples():
    ps = pencil_eigenvalues(np.diag([1.0, 2.0]), np.eye(2))
    assert [round(v.real, 12) for v, _ in ps.finite] == [-2.0, -1.0]
    assert all(m == 1 for _, m in ps.finite)

    ps = pencil_eigenvalues(np.eye(2), [[0, 0], [1, 0]])
    assert ps.finite == () and ps.infinite == 2 and not ps.singular

    assert pencil_is_singular([[1, 0], [0, 0]], [[0, 0], [1, 0]])
    assert pencil_eigenvalues([[1, 0], [0, 0]], [[0, 0], [1, 0]]).singular


@given(st.integers(0, 2**31 - 1), st.integers(2, 6))
def test_pencil_degree_plus_infinity_is_d(seed, d):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    r = int(rng.integers(0, d + 1))
    B = rng.standard_normal((d, r)) @ rng.standard_normal((r, d))
    ps = pencil_eigenvalues(A, B)
    assert ps.degree + ps.infinite == d
    assert ps.degree == r  # generic A with rank-r B
    for mu, _ in ps.finite:
        s = np.linalg.svd(A + mu * B, compute_uv=False)
        assert s[-1] <= 1e-7 * s[0]


def test_wong_sequences_are_nested():
    A = np.eye(2)
    B = np.array([[0, 0], [1, 0]])
    ws = wong_sequences(A, B)
    assert ws.V_star.dim == 0 and ws.W_star.dim == 2
    dims = [W.dim for W in ws.W]
    assert dims == sorted(dims)


def test_jordan_examples():
    assert jordan_chain_length([[0, 1], [0, 0]], 0) == 2
    assert jordan_chain_length(np.diag([3.0, 3.0]), 3) == 1
    J = 5 * np.eye(3) + np.diag([1.0, 1.0], 1)
    assert jordan_chain_length(J, 5) == 3
    with pytest.raises(NotAnEigenvalue):
        jordan_chain_length(np.eye(2), 2.0)


def test_jordan_invariant_under_similarity(rng):
    J = np.zeros((4, 4), dtype=complex)
    J[0, 1] = J[1, 2] = 1.0
    J[3, 3] = 2.0
    S = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    M = S @ J @ np.linalg.inv(S)
    assert jordan_chain_length(M, 0.0, tol=1e-7) == 3
    assert jordan_chain_length(M, 2.0, tol=1e-7) == 1


def test_cluster_merges_close_values():
    out = cluster([1.0, 1.0 + 1e-12, 2.0])
    assert out == [(pytest.approx(1.0), 2), (pytest.approx(2.0), 1)]


@given(st.integers(0, 2**31 - 1))
def test_ordered_schur(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    U, Z = ordered_schur(M)
    assert np.allclose(Z @ U @ Z.conj().T, M, atol=1e-10)
    assert np.allclose(np.tril(U, -1), 0, atol=1e-12)
    keys = [(z.real, z.imag) for z in np.diag(U)]
    assert keys == sorted(keys)
