import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from xgraph.errors import DegenerateMatrixError, DimensionError, NotPSDError, SymmetryError
from xgraph.linalg import (
    as_symmetric,
    center_project,
    log_pseudo_determinant,
    numerical_rank,
    projection,
    pseudo_determinant,
    pseudo_inverse,
    sym_eig,
)


def test_pinv_identity():
    np.testing.assert_allclose(pseudo_inverse(np.eye(3), tol=1e-10), np.eye(3))


def test_pinv_rank_one_closed_form():
    # a [[1,-1],[-1,1]] has eigenvalue 2a on (1,-1)/sqrt(2), so its inverse is [[1,-1],[-1,1]] / (4a)
    gamma = 2.0
    J = np.array([[1.0, -1.0], [-1.0, 1.0]])
    np.testing.assert_allclose(pseudo_inverse(gamma / 4 * J), J / gamma, atol=1e-14)
    np.testing.assert_allclose(pseudo_inverse(J / 8), 2 * J, atol=1e-14)


def test_pinv_zero():
    np.testing.assert_array_equal(pseudo_inverse(np.zeros((2, 2))), np.zeros((2, 2)))


def test_pinv_rejects_bad_input():
    with pytest.raises(DimensionError):
        pseudo_inverse(np.ones((2, 3)))
    with pytest.raises(SymmetryError):
        pseudo_inverse(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_pinv_penrose_conditions():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(6, 3))
    M = A @ A.T
    Mp = pseudo_inverse(M)
    np.testing.assert_allclose(M @ Mp @ M, M, atol=1e-8)
    np.testing.assert_allclose(Mp @ M @ Mp, Mp, atol=1e-8)
    np.testing.assert_array_equal(Mp, Mp.T)


@pytest.mark.parametrize(
    "M, expected",
    [
        (0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]]), 1.0),
        (np.eye(3) - 1 / 3, 1.0),
        (np.diag([2.0, 3.0, 0.0]), 6.0),
    ],
)
def test_pseudo_determinant(M, expected):
    assert pseudo_determinant(M) == pytest.approx(expected, rel=1e-12)


def test_pseudo_determinant_errors():
    with pytest.raises(DegenerateMatrixError):
        pseudo_determinant(np.zeros((3, 3)))
    with pytest.raises(NotPSDError):
        pseudo_determinant(np.diag([1.0, -1.0]))


def test_center_project_examples():
    np.testing.assert_allclose(center_project(np.ones((3, 3))), 0, atol=1e-15)
    np.testing.assert_allclose(center_project(np.eye(2)), 0.5 * np.array([[1, -1], [-1, 1]]))
    M = center_project(np.arange(16.0).reshape(4, 4) + np.arange(16.0).reshape(4, 4).T)
    np.testing.assert_allclose(center_project(M), M, atol=1e-12)
    np.testing.assert_allclose(projection(3), np.eye(3) - 1 / 3)


def test_eigen_sorted_and_reconstructs():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(5, 5))
    M = A + A.T
    eig = sym_eig(M)
    assert np.all(np.diff(eig.eigenvalues) <= 0)
    assert np.max(np.abs(eig.reconstruct() - M)) <= 1e-8 * (1 + np.max(np.abs(M)))
    np.testing.assert_allclose(eig.eigenvectors.T @ eig.eigenvectors, np.eye(5), atol=1e-12)


def test_as_symmetric_absorbs_roundoff():
    M = np.array([[1.0, 2.0 + 1e-14], [2.0, 1.0]])
    S = as_symmetric(M)
    assert S[0, 1] == S[1, 0]


def test_numerical_rank():
    assert numerical_rank(np.diag([1.0, 1e-12, 0.0])) == 1
    assert numerical_rank(np.eye(4)) == 4


sym_matrices = st.integers(2, 6).flatmap(
    lambda d: arrays(np.float64, (d, d), elements=st.floats(-5, 5, allow_nan=False, width=64))
).map(lambda A: A + A.T)

psd_factors = st.tuples(st.integers(2, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(-3, 3, allow_nan=False, width=64))
)


def _well_conditioned(M):
    w = np.abs(np.linalg.eigvalsh(M))
    top = w.max()
    # nonzero eigenvalues well separated from the rank cutoff
    return top > 1e-3 and np.all((w < 1e-12 * top) | (w > 1e-4 * top))


@settings(max_examples=60, deadline=None)
@given(sym_matrices)
def test_pinv_involution(M):
    if not _well_conditioned(M):
        return
    np.testing.assert_allclose(pseudo_inverse(pseudo_inverse(M)), M, atol=1e-7 * (1 + np.abs(M).max()))


@settings(max_examples=60, deadline=None)
@given(sym_matrices)
def test_center_project_idempotent(M):
    C = center_project(M)
    np.testing.assert_allclose(center_project(C), C, atol=1e-10 * (1 + np.abs(M).max()))
    np.testing.assert_allclose(C.sum(axis=0), 0, atol=1e-10 * (1 + np.abs(M).max()))


@settings(max_examples=60, deadline=None)
@given(psd_factors)
def test_pdet_of_pinv_is_reciprocal(A):
    M = A @ A.T
    if not _well_conditioned(M):
        return
    lhs = log_pseudo_determinant(pseudo_inverse(M))
    rhs = -log_pseudo_determinant(M)
    assert np.exp(lhs - rhs) == pytest.approx(1.0, rel=1e-7)
