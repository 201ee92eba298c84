"""Small dense linear algebra: solves, eigenvalues and inertia.

Everything here targets desk-scale problems (n <= 8). Matrices are plain
numpy arrays; inputs are validated for shape and finiteness.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotSymmetric, SingularMatrix

__all__ = [
    "Inertia",
    "as_matrix",
    "solve_linear",
    "eig_symmetric",
    "inertia_of",
    "eig_general",
    "norm_inf",
]

PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class Inertia:
    negative: int
    zero: int
    positive: int

    @property
    def dimension(self):
        return self.negative + self.zero + self.positive

    def __str__(self):
        return f"{{{self.negative},{self.zero},{self.positive}}}"


def as_matrix(value, rows=None, cols=None, name="matrix"):
    """Coerce ``value`` to a finite 2-D float array, checking the shape."""
    a = np.array(value, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise DimensionMismatch(f"{name} has {a.shape[0]} rows, expected {rows}")
    if cols is not None and a.shape[1] != cols:
        raise DimensionMismatch(f"{name} has {a.shape[1]} cols, expected {cols}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def norm_inf(a):
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


def _lu_factor(a):
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    threshold = PIVOT_TOL * max(norm_inf(a), np.finfo(float).tiny)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) < threshold:
            raise SingularMatrix(f"pivot {lu[p, k]:.3e} below threshold at column {k}")
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, perm


def solve_linear(a, b):
    """Solve ``a x = b`` by LU with partial pivoting.

    ``b`` may be a column or a block of columns. The pivot threshold is
    relative to the infinity norm of ``a`` so that badly scaled but
    well-conditioned matrices (capacitances in farads) still factor.
    """
    a = as_matrix(a, name="A")
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionMismatch("A must be square")
    b_arr = np.array(b, dtype=float)
    vector = b_arr.ndim == 1
    b2 = b_arr.reshape(n, -1) if vector else as_matrix(b_arr, rows=n, name="b")
    lu, perm = _lu_factor(a)
    x = b2[perm].copy()
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x.ravel() if vector else x


def _check_symmetric(s):
    s = as_matrix(s, name="S")
    if s.shape[0] != s.shape[1]:
        raise NotSymmetric("matrix is not square")
    scale = norm_inf(s)
    if norm_inf(s - s.T) > 1e-10 * scale:
        raise NotSymmetric(f"asymmetry {norm_inf(s - s.T):.3e} exceeds 1e-10*||S||")
    return 0.5 * (s + s.T)


def eig_symmetric(s, vectors=False, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by the cyclic Jacobi method.

    Returns the eigenvalues in ascending order, and the matching orthonormal
    eigenvectors as columns when ``vectors`` is true.
    """
    a = _check_symmetric(s)
    n = a.shape[0]
    v = np.eye(n)
    total = np.sqrt(np.sum(a * a))
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= 1e-15 * total or off == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta)) if theta != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                sn = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = sn
                rot[q, p] = -sn
                a = rot.T @ a @ rot
                v = v @ rot
    else:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], v[:, order]
    return w[order]


def inertia_of(s, zero_tol=1e-9, relative=True):
    """Count eigenvalues below, within and above ``±zero_tol``.

    With ``relative`` (the default) the tolerance is scaled by ``||S||_inf``.
    """
    w = eig_symmetric(s)
    tol = zero_tol * norm_inf(s) if relative else zero_tol
    neg = int(np.sum(w < -tol))
    pos = int(np.sum(w > tol))
    return Inertia(neg, len(w) - neg - pos, pos)


def eig_general(a):
    """Complex eigenvalues of a small square matrix (LAPACK ``geev``)."""
    a = as_matrix(a, name="A")
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch("A must be square")
    try:
        return np.linalg.eigvals(a).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
