"""LTI state-space blocks, transfer functions and the frequency p-passivity test."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, PoleHit, PoleOnShiftedAxis
from .linalg import as_matrix, eig_general, eig_symmetric, norm_inf

__all__ = [
    "StateSpace",
    "FrequencyTestReport",
    "Assumption1Report",
    "transfer_eval",
    "poles",
    "frequency_grid",
    "p_passivity_frequency_test",
    "validate_assumption1",
    "column_rank",
]


@dataclass(frozen=True)
class StateSpace:
    """x' = A x + B u, y = C x + D u with square input/output dimension m."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: Optional[np.ndarray] = None

    def __post_init__(self):
        A = as_matrix(self.A, name="A")
        n = A.shape[0]
        if A.shape[1] != n:
            raise DimensionMismatch("A must be square")
        B = as_matrix(self.B, rows=n, name="B")
        m = B.shape[1]
        C = as_matrix(np.reshape(self.C, (m, n)) if np.size(self.C) == m * n else self.C,
                      rows=m, cols=n, name="C")
        D = np.zeros((m, m)) if self.D is None else as_matrix(
            np.reshape(self.D, (m, m)) if np.size(self.D) == m * m else self.D,
            rows=m, cols=m, name="D")
        for name, value in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, value)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def shifted(self, gamma):
        """The realization of G(s - gamma), i.e. A replaced by A + gamma I."""
        return StateSpace(self.A + gamma * np.eye(self.n), self.B, self.C, self.D)


def transfer_eval(sys, s):
    """C (sI - A)^-1 B + D at a complex frequency ``s``.

    ``s = inf`` returns D.
    """
    if np.isinf(s):
        return sys.D.astype(complex)
    n = sys.n
    pencil = s * np.eye(n) - sys.A
    scale = max(1.0, norm_inf(sys.A), abs(s)) ** n
    if abs(np.linalg.det(pencil)) < 1e-12 * scale:
        raise PoleHit(f"s={s} is (numerically) a pole")
    return sys.C @ np.linalg.solve(pencil, sys.B.astype(complex)) + sys.D


def poles(sys):
    """Eigenvalues of A; these are the transfer poles for minimal realizations."""
    return eig_general(sys.A)


@dataclass(frozen=True)
class FrequencyTestReport:
    gamma: float
    min_real_part: float
    argmin_frequency: float
    shifted_right_pole_count: int
    passes_p: Optional[int]
    limit_at_infinity: float
    tail_coefficient: float
    frequencies: np.ndarray
    real_parts: np.ndarray

    def verdict_line(self):
        if self.passes_p is not None:
            return f"p={self.passes_p}"
        return f"FAIL min_re={self.min_real_part:.6g} at w={self.argmin_frequency:.6g}"


def frequency_grid(w_max=1e6, grid=4000, w_min=1e-3):
    return np.concatenate([[0.0], np.logspace(np.log10(w_min), np.log10(w_max), grid)])


def p_passivity_frequency_test(sys, gamma, w_max=1e6, grid=4000, positivity_tol=0.0):
    """Sampled frequency-domain p-passivity test for a SISO system.

    Evaluates Re G(jw - gamma) over w = 0 plus a log grid up to ``w_max`` and
    counts the poles with Re(lambda) + gamma > 0. ``passes_p`` is that count
    when the grid minimum exceeds ``positivity_tol`` and None otherwise.

    The value at w = +inf cannot be strictly positive for a strictly proper
    G, so it is not part of the verdict. It is reported as
    ``limit_at_infinity`` (Re D) together with ``tail_coefficient``
    c = Re(D)=0 ? -C (A + gamma I) B : 0, for which Re G(jw - gamma) ~ c / w^2.
    """
    if sys.m != 1:
        raise DimensionMismatch("frequency test is SISO only")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    lam = poles(sys)
    shifted = lam.real + gamma
    if np.any(np.abs(shifted) < 1e-9):
        raise PoleOnShiftedAxis(f"a pole of G(s - {gamma}) lies on the imaginary axis")
    right = int(np.sum(shifted > 0))

    w = frequency_grid(w_max, grid)
    shifted_sys = sys.shifted(gamma)
    A, B, C, D = shifted_sys.A, shifted_sys.B, shifted_sys.C, shifted_sys.D
    # diagonalize once when possible; otherwise fall back to per-point solves
    vals, vecs = np.linalg.eig(A)
    if np.linalg.cond(vecs) < 1e8:
        cv = (C @ vecs).ravel()
        vb = np.linalg.solve(vecs, B.astype(complex)).ravel()
        resp = (cv * vb)[None, :] / (1j * w[:, None] - vals[None, :])
        g = resp.sum(axis=1) + D[0, 0]
    else:
        g = np.array([transfer_eval(shifted_sys, 1j * wk)[0, 0] for wk in w])
    re = g.real
    k = int(np.argmin(re))
    min_re = float(re[k])
    passes = right if min_re > positivity_tol else None
    d = float(D[0, 0])
    tail = 0.0 if d != 0.0 else float(-(C @ A @ B)[0, 0])
    return FrequencyTestReport(
        gamma=float(gamma),
        min_real_part=min_re,
        argmin_frequency=float(w[k]),
        shifted_right_pole_count=right,
        passes_p=passes,
        limit_at_infinity=d,
        tail_coefficient=tail,
        frequencies=w,
        real_parts=re,
    )


def column_rank(a, tol=1e-10):
    """Rank after normalizing columns, so mixed physical scales do not matter."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0
    norms = np.linalg.norm(a, axis=0)
    keep = norms > 0
    if not np.any(keep):
        return 0
    sv = np.linalg.svd(a[:, keep] / norms[keep], compute_uv=False)
    return int(np.sum(sv > tol * sv[0]))


@dataclass(frozen=True)
class Assumption1Report:
    minimal: bool
    passive: bool
    rank_ok: bool

    @property
    def ok(self):
        return self.minimal and self.passive and self.rank_ok


def _controllability(A, B):
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def validate_assumption1(sys):
    """Minimality, passivity and the rank of [B; D + D'].

    Passivity is the feasibility of a 0-passivity certificate at rate 0
    (P > 0, A'P + PA <= 0, PB = C') together with D + D' >= 0; with a
    nonzero D this is sufficient rather than necessary.
    """
    from .dominance import search_certificate

    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n, m = sys.n, sys.m
    minimal = (column_rank(_controllability(A, B)) == n
               and column_rank(_controllability(A.T, C.T)) == n)
    sym = D + D.T
    d_psd = bool(np.all(eig_symmetric(sym) >= -1e-12 * max(1.0, norm_inf(sym)))) if m else True
    passive = d_psd and search_certificate(sys, p=0, gamma=0.0, epsilon=0.0) is not None
    rank_ok = column_rank(np.vstack([B, sym])) == m
    return Assumption1Report(minimal=bool(minimal), passive=bool(passive), rank_ok=bool(rank_ok))
