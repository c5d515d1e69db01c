import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from attinit.eigen import eigh4
from attinit.errors import InvalidInputError


def test_diagonal():
    w, V = eigh4(np.diag([3.0, 1.0, 4.0, 2.0]))
    np.testing.assert_array_equal(w, [1, 2, 3, 4])
    np.testing.assert_array_equal(np.abs(V), np.eye(4)[:, [1, 3, 0, 2]])


def test_zero_matrix():
    w, V = eigh4(np.zeros((4, 4)))
    np.testing.assert_array_equal(w, np.zeros(4))
    np.testing.assert_allclose(V.T @ V, np.eye(4))


def test_recovers_constructed_spectrum(rng):
    for _ in range(20):
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        d = np.sort(rng.uniform(-5, 5, 4))
        w, V = eigh4(Q.T @ np.diag(d) @ Q)
        np.testing.assert_allclose(w, d, atol=1e-11)


def test_non_symmetric_rejected():
    K = np.eye(4)
    K[0, 1] = 1e-3
    with pytest.raises(InvalidInputError):
        eigh4(K)


def test_warm_start_agrees(rng):
    A = rng.standard_normal((4, 4))
    K = A @ A.T
    w0, V0 = eigh4(K)
    K2 = K + 1e-3 * np.outer(A[0], A[0])
    w, V = eigh4(K2, V0)
    w_ref, _ = eigh4(K2)
    np.testing.assert_allclose(w, w_ref, atol=1e-12)
    np.testing.assert_allclose(K2 @ V, V * w, atol=1e-10 * np.linalg.norm(K2))


entries = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.lists(entries, min_size=10, max_size=10))
def test_against_lapack(vals):
    K = np.zeros((4, 4))
    K[np.triu_indices(4)] = vals
    K = K + np.triu(K, 1).T
    w, V = eigh4(K)
    norm = np.linalg.norm(K)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(K), atol=1e-12 * max(norm, 1.0))
    np.testing.assert_allclose(K @ V, V * w, atol=1e-10 * max(norm, 1e-300))
    np.testing.assert_allclose(V.T @ V, np.eye(4), atol=1e-12)
