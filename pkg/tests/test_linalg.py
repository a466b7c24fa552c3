import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlspec.linalg import jacobi_eigh


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(n, seed):
    M = np.random.default_rng(seed).normal(size=(n, n))
    C = M + M.T
    w, V = jacobi_eigh(C)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(C), atol=1e-12 * max(1.0, np.abs(w).max()))
    np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-13)
    np.testing.assert_allclose(C @ V, V * w, atol=1e-12 * max(1.0, np.abs(w).max()))


def test_jacobi_is_deterministic_and_handles_zero():
    C = np.random.default_rng(0).normal(size=(8, 8))
    C = C + C.T
    w1, V1 = jacobi_eigh(C)
    w2, V2 = jacobi_eigh(C)
    assert np.array_equal(w1, w2) and np.array_equal(V1, V2)
    w, V = jacobi_eigh(np.zeros((3, 3)))
    assert not np.any(w) and np.array_equal(V, np.eye(3))


def test_jacobi_diagonal_input_is_sorted():
    w, V = jacobi_eigh(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_array_equal(w, [-1.0, 2.0, 3.0])
    np.testing.assert_array_equal(np.abs(V), np.eye(3)[:, [1, 2, 0]])


def test_jacobi_rejects_non_square():
    with pytest.raises(ValueError):
        jacobi_eigh(np.zeros((2, 3)))
