"""Linear complementarity problems: find z >= 0 with w = Mz + q >= 0, z'w = 0."""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, DimensionTooLarge, PivotLimitExceeded, RayTermination

__all__ = [
    "LcpProblem",
    "LcpSolution",
    "lemke_solve",
    "enumerate_solve",
    "residual",
    "default_tol",
]

ENUMERATION_LIMIT = 12


@dataclass(frozen=True)
class LcpProblem:
    M: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        q = np.array(self.q, dtype=float).ravel()
        if M.ndim == 0:
            M = M.reshape(1, 1)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"M must be square, got {M.shape}")
        if M.shape[0] != q.shape[0]:
            raise DimensionMismatch(f"M is {M.shape} but q has length {q.shape[0]}")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(q))):
            raise ValueError("LCP data must be finite")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "q", q)

    @property
    def size(self):
        return self.q.shape[0]


@dataclass(frozen=True)
class LcpSolution:
    z: np.ndarray
    w: np.ndarray
    complementarity_residual: float
    pivots: int = 0


def default_tol(problem):
    return 1e-9 * (1.0 + float(np.max(np.abs(problem.q), initial=0.0)))


def residual(problem, z):
    """max(neg(z), neg(Mz+q), |<z, Mz+q>|)."""
    z = np.asarray(z, dtype=float).ravel()
    if z.shape[0] != problem.size:
        raise DimensionMismatch("z does not match the problem size")
    w = problem.M @ z + problem.q
    return float(max(np.max(-z, initial=0.0), np.max(-w, initial=0.0), abs(z @ w)))


def _lexmin_row(tab, rows, col, key_cols):
    """Lexicographic minimum ratio test over candidate ``rows``."""
    cand = list(rows)
    for j in key_cols:
        ratios = tab[cand, j] / tab[cand, col]
        best = ratios.min()
        tol = 1e-12 * max(1.0, abs(best))
        cand = [r for r, v in zip(cand, ratios) if v <= best + tol]
        if len(cand) == 1:
            break
    return cand[0]


def lemke_solve(problem, pivot_tol=1e-12, max_pivots=None):
    """Solve an LCP with Lemke's complementary pivoting method.

    Covering vector is all ones. Ratio-test ties are broken
    lexicographically on the rows of ``[rhs, B^-1]`` which rules out cycling.
    Terminates on a secondary ray (``RayTermination``) when the pivot path
    finds no solution; for positive semidefinite ``M`` that means the LCP is
    infeasible. With semidefinite ``M`` the solution need not be unique and
    the one at the end of the pivot path is returned.
    """
    M, q = problem.M, problem.q
    m = problem.size
    if max_pivots is None:
        max_pivots = 50 * (m + 1) ** 2
    if np.all(q >= 0.0):
        z = np.zeros(m)
        return LcpSolution(z, q.copy(), residual(problem, z), 0)

    # columns: w_0..w_{m-1}, z_0..z_{m-1}, z0 (artificial), rhs
    art, rhs = 2 * m, 2 * m + 1
    original = np.hstack([np.eye(m), -M, -np.ones((m, 1))])
    tab = np.hstack([original, q[:, None]])
    basis = list(range(m))
    key_cols = [rhs] + list(range(m))

    # z0 enters; the leaving row is the lexicographic minimum of [q, I]
    cand = list(range(m))
    for j in key_cols:
        vals = tab[cand, j]
        best = vals.min()
        tol = 1e-12 * max(1.0, abs(best))
        cand = [r for r, v in zip(cand, vals) if v <= best + tol]
        if len(cand) == 1:
            break
    row, entering = cand[0], art
    pivots = 0
    while True:
        pivots += 1
        if pivots > max_pivots:
            raise PivotLimitExceeded(f"no solution after {max_pivots} pivots")
        tab[row] /= tab[row, entering]
        col = tab[:, entering].copy()
        col[row] = 0.0
        tab -= np.outer(col, tab[row])
        leaving = basis[row]
        basis[row] = entering
        if leaving == art:
            break
        entering = leaving + m if leaving < m else leaving - m
        col = tab[:, entering]
        scale = max(1.0, float(np.max(np.abs(col))))
        rows = [i for i in range(m) if col[i] > pivot_tol * scale]
        if not rows:
            raise RayTermination(f"secondary ray after {pivots} pivots")
        art_row = basis.index(art)
        row = _lexmin_row(tab, rows, entering, key_cols)
        if art_row in rows and row != art_row:
            ratios = tab[rows, rhs] / tab[rows, entering]
            best = ratios.min()
            if tab[art_row, rhs] / tab[art_row, entering] <= best + 1e-12 * max(1.0, abs(best)):
                row = art_row

    # re-solve the final basis directly; cheaper on accuracy than the tableau
    values = tab[:, rhs].copy()
    try:
        values = np.linalg.solve(original[:, basis], q)
    except np.linalg.LinAlgError:
        pass
    z = np.zeros(m)
    for r, var in enumerate(basis):
        if m <= var < 2 * m:
            z[var - m] = values[r]
    z = np.where(np.abs(z) <= 1e-15 * (1.0 + np.max(np.abs(z))), 0.0, z)
    w = M @ z + q
    return LcpSolution(z, w, residual(problem, z), pivots)


def enumerate_solve(problem, tol=None):
    """All solutions found by brute force over the 2^m active sets.

    Each split fixes ``w_a = 0`` and ``z_i = 0`` off ``a``; the induced system
    ``M_aa z_a = -q_a`` is solved and kept when sign-feasible. Singular
    subsystems are skipped, so continua of solutions (semidefinite ``M``)
    are only represented by their basic points.
    """
    m = problem.size
    if m > ENUMERATION_LIMIT:
        raise DimensionTooLarge(f"enumeration limited to m <= {ENUMERATION_LIMIT}")
    if tol is None:
        tol = default_tol(problem)
    M, q = problem.M, problem.q
    found = []
    for k in range(m + 1):
        for active in combinations(range(m), k):
            idx = list(active)
            z = np.zeros(m)
            if idx:
                sub = M[np.ix_(idx, idx)]
                if np.linalg.matrix_rank(sub) < k:
                    continue
                z[idx] = np.linalg.solve(sub, -q[idx])
            w = M @ z + q
            if np.min(z, initial=0.0) < -tol or np.min(w, initial=0.0) < -tol:
                continue
            if abs(z @ w) > tol:
                continue
            if any(np.max(np.abs(z - s.z)) <= tol for s in found):
                continue
            found.append(LcpSolution(z, w, residual(problem, z)))
    return found
