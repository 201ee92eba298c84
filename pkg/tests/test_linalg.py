import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lcsdom.errors import NotSymmetric, SingularMatrix
from lcsdom.linalg import Inertia, eig_general, eig_symmetric, inertia_of, solve_linear


@pytest.mark.parametrize("A, b, x", [
    (np.eye(2), [3, 4], [3, 4]),
    ([[2, 0], [0, 4]], [2, 4], [1, 1]),
    ([[1, 1], [0, 1]], [2, 1], [1, 1]),
])
def test_solve_examples(A, b, x):
    assert np.allclose(solve_linear(A, b), x, atol=1e-14)


def test_solve_singular():
    with pytest.raises(SingularMatrix):
        solve_linear([[1, 2], [2, 4]], [1, 1])


def test_solve_matrix_rhs_and_pivoting():
    # zero leading entry forces a row swap
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(solve_linear(A, np.eye(2)), A)


def test_solve_random_residuals(rng):
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        A = rng.normal(size=(n, n)) + n * np.eye(n)
        b = rng.normal(size=n)
        x = solve_linear(A, b)
        worst = max(worst, np.max(np.abs(A @ x - b)) / (1 + np.max(np.abs(b))))
    assert worst < 1e-10


@pytest.mark.parametrize("S, expected", [
    (np.diag([-1.0, 2.0]), [-1, 2]),
    ([[0, 1], [1, 0]], [-1, 1]),
    ([[2, 1], [1, 2]], [1, 3]),
])
def test_eig_symmetric_examples(S, expected):
    assert np.allclose(eig_symmetric(S), expected, atol=1e-12)


def test_eig_symmetric_vectors_orthonormal(rng):
    X = rng.normal(size=(6, 6))
    S = X + X.T
    w, V = eig_symmetric(S, vectors=True)
    assert np.allclose(V.T @ V, np.eye(6), atol=1e-10)
    assert np.allclose(S @ V, V * w, atol=1e-9)
    assert np.allclose(w, np.linalg.eigvalsh(S), atol=1e-9)


def test_eig_symmetric_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        eig_symmetric([[1, 2], [0, 1]])


@pytest.mark.parametrize("S, tol, expected", [
    (np.diag([-1.0, 2.0]), 1e-9, Inertia(1, 0, 1)),
    (np.eye(3), 1e-9, Inertia(0, 0, 3)),
    (np.diag([15.9e-9, -0.1]), 1e-12, Inertia(1, 0, 1)),
])
def test_inertia_examples(S, tol, expected):
    assert inertia_of(S, tol, relative=False) == expected


def test_inertia_str():
    assert str(Inertia(1, 0, 2)) == "{1,0,2}"


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_sylvester_law_of_inertia(n, seed):
    rng = np.random.default_rng(seed)
    # well separated eigenvalues so the zero band is unambiguous
    mags = rng.uniform(0.5, 2.0, n) * rng.choice([-1.0, 1.0], n)
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    S = Q @ np.diag(mags) @ Q.T
    S = 0.5 * (S + S.T)
    # nonsingular T with singular values in [0.5, 2] keeps eigenvalues off the zero band
    U, _ = np.linalg.qr(rng.normal(size=(n, n)))
    V, _ = np.linalg.qr(rng.normal(size=(n, n)))
    T = U @ np.diag(rng.uniform(0.5, 2.0, n)) @ V
    ref = inertia_of(S, 1e-7)
    assert ref.dimension == n
    assert inertia_of(T.T @ S @ T, 1e-7) == ref


@pytest.mark.parametrize("A, expected", [
    (np.diag([-1.0, -2.0]), [-2, -1]),
    ([[0, 1], [-1, 0]], [-1j, 1j]),
    ([[-1 / (1e6 * 15.9e-9)]], [-62.893081761]),
])
def test_eig_general_examples(A, expected):
    got = sorted(eig_general(A), key=lambda z: (z.real, z.imag))
    assert np.allclose(got, expected, atol=1e-8)
