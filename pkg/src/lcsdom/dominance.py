"""p-dominance and p-dissipativity certificates.

A certificate is a symmetric P with inertia {p, 0, n-p}, a rate gamma and a
strictness margin epsilon. For a linear block with the passivity supply the
conditions are

    A'P + PA + 2 gamma P <= -epsilon I,    PB = C'.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MisalignedPair
from .linalg import Inertia, as_matrix, eig_symmetric, inertia_of, norm_inf

__all__ = [
    "SupplyRate",
    "DominanceCertificate",
    "CertificateReport",
    "DissipationReport",
    "Composition",
    "passivity_supply",
    "verify_linear_certificate",
    "search_certificate",
    "default_epsilon",
    "check_trajectory_dissipation",
    "compose",
    "block_diag_certificate",
]

SEARCH_RESTARTS = 64


@dataclass(frozen=True)
class SupplyRate:
    """Incremental supply w = dy'Q dy + 2 dy'L du + du'R du.

    This is the block form [[Q, L], [L', R]] used for interconnections.
    """

    Q: np.ndarray
    L: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        Q = as_matrix(self.Q, name="Q")
        m = Q.shape[0]
        L = as_matrix(self.L, rows=m, cols=m, name="L")
        R = as_matrix(self.R, rows=m, cols=m, name="R")
        for name, s in (("Q", Q), ("R", R)):
            if s.shape != (m, m) or norm_inf(s - s.T) > 1e-10 * max(1.0, norm_inf(s)):
                raise ValueError(f"{name} must be symmetric {m}x{m}")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "R", R)

    @property
    def m(self):
        return self.Q.shape[0]

    def matrix(self):
        return np.block([[self.Q, self.L], [self.L.T, self.R]])

    def __call__(self, dy, du):
        dy = np.asarray(dy, dtype=float).ravel()
        du = np.asarray(du, dtype=float).ravel()
        return float(dy @ self.Q @ dy + 2.0 * dy @ self.L @ du + du @ self.R @ du)


def passivity_supply(m=1):
    """[[0, I], [I, 0]]: w = 2 <dy, du>."""
    return SupplyRate(np.zeros((m, m)), np.eye(m), np.zeros((m, m)))


@dataclass(frozen=True)
class DominanceCertificate:
    P: np.ndarray
    gamma: float
    epsilon: float
    p: int

    def __post_init__(self):
        P = as_matrix(self.P, name="P")
        if P.shape[0] != P.shape[1] or norm_inf(P - P.T) > 1e-10 * norm_inf(P):
            raise ValueError("P must be symmetric")
        if self.gamma < 0 or self.epsilon < 0:
            raise ValueError("gamma and epsilon must be non-negative")
        object.__setattr__(self, "P", 0.5 * (P + P.T))

    @property
    def n(self):
        return self.P.shape[0]

    def inertia(self, zero_tol=1e-9):
        return inertia_of(self.P, zero_tol)

    def has_expected_inertia(self, zero_tol=1e-9):
        return self.inertia(zero_tol) == Inertia(self.p, 0, self.n - self.p)

    def storage(self, dx):
        dx = np.asarray(dx, dtype=float)
        return np.einsum("...i,ij,...j->...", dx, self.P, dx)


@dataclass(frozen=True)
class CertificateReport:
    lmi_margin: float
    coupling_residual: float
    inertia: Inertia
    inertia_ok: bool

    def holds(self, coupling_tol=1e-9):
        return self.lmi_margin >= 0 and self.coupling_residual <= coupling_tol and self.inertia_ok


def _lyap(A, P, gamma):
    return A.T @ P + P @ A + 2.0 * gamma * P


def verify_linear_certificate(sys, cert, supply=None):
    """Algebraic check of a certificate on a linear block.

    Without ``supply`` this is the p-passivity test: the margin is
    -lambda_max(A'P + PA + 2 gamma P + eps I) and the coupling residual is
    ||PB - C'||_inf (relative to ||C||_inf when that is nonzero).

    With a supply the full dissipation inequality is assembled. When its
    input-input block vanishes the off-diagonal block must vanish too and is
    reported as the coupling residual; otherwise the margin covers the whole
    matrix and the coupling residual is 0.
    """
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    if cert.n != sys.n:
        raise DimensionMismatch(f"certificate is {cert.n}x{cert.n}, system has n={sys.n}")
    P = cert.P
    upper = _lyap(A, P, cert.gamma) + cert.epsilon * np.eye(sys.n)
    inertia = cert.inertia()
    inertia_ok = inertia == Inertia(cert.p, 0, sys.n - cert.p)
    c_scale = norm_inf(C) or 1.0
    if supply is None:
        margin = -float(eig_symmetric(upper)[-1])
        coupling = norm_inf(P @ B - C.T) / c_scale
        return CertificateReport(margin, coupling, inertia, inertia_ok)
    if supply.m != sys.m:
        raise DimensionMismatch("supply dimension differs from the system's")
    Q, L, R = supply.Q, supply.L, supply.R
    top = upper - C.T @ Q @ C
    off = P @ B - C.T @ Q @ D - C.T @ L
    low = -(D.T @ Q @ D + D.T @ L + L.T @ D + R)
    if norm_inf(low) <= 1e-12 * max(1.0, norm_inf(top)):
        margin = -float(eig_symmetric(0.5 * (top + top.T))[-1])
        return CertificateReport(margin, norm_inf(off) / c_scale, inertia, inertia_ok)
    full = np.block([[top, off], [off.T, low]])
    margin = -float(eig_symmetric(0.5 * (full + full.T))[-1])
    return CertificateReport(margin, 0.0, inertia, inertia_ok)


def default_epsilon(sys, scale=1.0):
    """1e-6 * ||A|| times the size of the storage matrix being searched."""
    return 1e-6 * max(norm_inf(sys.A), 1e-12) * scale


def _sym_basis(n):
    basis = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
    return basis


def _affine_parametrization(sys):
    """P = P0 + sum_k theta_k N_k spanning {P = P' : PB = C'}; None if empty."""
    n = sys.n
    basis = _sym_basis(n)
    # vec(E_k B) columns of the linear map theta -> PB
    K = np.column_stack([(E @ sys.B).ravel() for E in basis])
    rhs = sys.C.T.ravel()
    theta0, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    if norm_inf((K @ theta0 - rhs)[:, None]) > 1e-9 * max(1.0, np.max(np.abs(rhs))):
        return None
    _, sv, vt = np.linalg.svd(K) if K.size else (None, np.array([]), np.eye(len(basis)))
    rank = int(np.sum(sv > 1e-12 * (sv[0] if sv.size else 1.0)))
    null = vt[rank:]
    P0 = sum(t * E for t, E in zip(theta0, basis))
    N = [sum(c * E for c, E in zip(row, basis)) for row in null]
    return P0, N


def search_certificate(sys, p, gamma, epsilon=None, restarts=SEARCH_RESTARTS, seed=0,
                       max_iter=400):
    """Local search for a p-passivity certificate of a linear block.

    Symmetric P is parametrized on the affine set {PB = C'}; coordinate
    descent with step halving minimizes lambda_max(A'P + PA + 2 gamma P) plus
    a penalty on the wrong inertia, from ``restarts`` seeded starting points.
    Every candidate is checked with ``verify_linear_certificate`` before it
    is returned, so a result is always sound; None only means the budget ran
    out.
    """
    n = sys.n
    if not 0 <= p <= n:
        raise ValueError(f"p must lie in [0, {n}]")
    param = _affine_parametrization(sys)
    if param is None:
        return None
    P0, N = param
    scale = norm_inf(P0) or 1.0
    if epsilon is None:
        epsilon = default_epsilon(sys, scale)

    def make(theta):
        P = P0.copy()
        for t, Nk in zip(theta, N):
            P = P + t * Nk
        return P

    def accept(P):
        cert = DominanceCertificate(P, float(gamma), float(epsilon), int(p))
        report = verify_linear_certificate(sys, cert)
        return cert if report.holds() else None

    if not N:
        return accept(P0)

    delta = 1e-6 * scale
    weight = 10.0 * max(norm_inf(sys.A), 1.0)

    def objective(theta):
        P = make(theta)
        lam = np.linalg.eigvalsh(_lyap(sys.A, P, gamma))[-1] + epsilon
        mu = np.linalg.eigvalsh(P)
        pen = np.sum(np.maximum(mu[:p] + delta, 0.0)) + np.sum(np.maximum(delta - mu[p:], 0.0))
        return lam + weight * pen, lam, pen

    rng = np.random.default_rng(seed)
    dim = len(N)
    for attempt in range(restarts):
        theta = np.zeros(dim) if attempt == 0 else rng.normal(0.0, scale * 10 ** rng.uniform(-1, 1), dim)
        f, lam, pen = objective(theta)
        step = scale * (1.0 if attempt == 0 else 10 ** rng.uniform(-1, 1))
        for _ in range(max_iter):
            if pen == 0.0 and lam < 0.0:
                cert = accept(make(theta))
                if cert is not None:
                    return cert
            improved = False
            for k in range(dim):
                for sign in (1.0, -1.0):
                    trial = theta.copy()
                    trial[k] += sign * step
                    ft, lt, pt = objective(trial)
                    if ft < f:
                        theta, f, lam, pen = trial, ft, lt, pt
                        improved = True
                        break
            if not improved:
                step *= 0.5
                if step < 1e-12 * scale:
                    break
        cert = accept(make(theta))
        if cert is not None:
            return cert
    return None


@dataclass(frozen=True)
class DissipationReport:
    max_violation: float
    max_excess: float
    worst_step: int
    steps: int

    @property
    def passed(self):
        return self.max_violation <= 0.0


def check_trajectory_dissipation(pair, cert, supply=None, tol_scale=1e-6):
    """Discrete version of the integrated decay inequality along a pair.

    For every step k, with dx_k the increment and V(dx) = dx'P dx, the check
    divided through by exp(2 gamma t_k) reads

        exp(2 gamma h) V_{k+1} - V_k + eps h |dx_k|^2 <= h w_k + tol_k

    where w_k is the supply at the left endpoint (0 without a supply) and
    tol_k = tol_scale * (1 + |dx_k|^2). ``max_violation`` is the largest
    excess over tol_k, clipped at 0; ``max_excess`` is the raw largest
    left-minus-right value.
    """
    a, b = pair.first, pair.second
    if a.times.shape != b.times.shape or np.max(np.abs(a.times - b.times), initial=0.0) > 1e-12:
        raise MisalignedPair("trajectories have different time grids")
    t = a.times
    if t.size < 2:
        return DissipationReport(0.0, 0.0, -1, 0)
    h = np.diff(t)
    if np.max(np.abs(h - h[0])) > 1e-9 * h[0]:
        raise MisalignedPair("time grid is not uniform")
    dx = a.x - b.x
    if dx.shape[1] != cert.n:
        raise DimensionMismatch("certificate dimension differs from the state dimension")
    V = cert.storage(dx)
    sq = np.sum(dx * dx, axis=1)
    lhs = np.exp(2.0 * cert.gamma * h) * V[1:] - V[:-1] + cert.epsilon * h * sq[:-1]
    if supply is None:
        rhs = np.zeros_like(lhs)
    else:
        dy = a.y - b.y
        du = a.u - b.u
        rhs = h * np.array([supply(dy[k], du[k]) for k in range(len(h))])
    excess = lhs - rhs
    tol = tol_scale * (1.0 + sq[:-1])
    over = excess - tol
    k = int(np.argmax(over))
    return DissipationReport(
        max_violation=float(max(over[k], 0.0)),
        max_excess=float(np.max(excess)),
        worst_step=k,
        steps=len(h),
    )


@dataclass(frozen=True)
class Composition:
    composed_supply: np.ndarray
    coupling_block: np.ndarray
    dominant: bool
    p_total: int


def compose(supply1, supply2, p1, p2, tol=1e-12):
    """Supply of the negative feedback loop u1 = -y2 + v1, u2 = y1 + v2.

    The composed supply acts on (dy1, dy2, dv1, dv2). The loop is
    (p1 + p2)-dominant when the coupling block

        [[Q1 + R2, -L1 + L2'], [-L1' + L2, Q2 + R1]]

    is negative semidefinite.
    """
    if supply1.m != supply2.m:
        raise DimensionMismatch("supplies must have the same dimension")
    Q1, L1, R1 = supply1.Q, supply1.L, supply1.R
    Q2, L2, R2 = supply2.Q, supply2.L, supply2.R
    Z = np.zeros_like(Q1)
    composed = np.block([
        [Q1 + R2, -L1 + L2.T, L1, R2],
        [-L1.T + L2, Q2 + R1, -R1, L2],
        [L1.T, -R1.T, R1, Z],
        [R2, L2.T, Z, R2],
    ])
    coupling = composed[: 2 * supply1.m, : 2 * supply1.m]
    top = float(eig_symmetric(0.5 * (coupling + coupling.T))[-1])
    dominant = top <= tol * max(1.0, norm_inf(coupling))
    return Composition(composed, coupling, bool(dominant), int(p1 + p2))


def block_diag_certificate(cert1, cert2, gamma=None, epsilon=None):
    """Block-diagonal storage for an interconnection of two certified blocks."""
    n1, n2 = cert1.n, cert2.n
    P = np.zeros((n1 + n2, n1 + n2))
    P[:n1, :n1] = cert1.P
    P[n1:, n1:] = cert2.P
    g = min(cert1.gamma, cert2.gamma) if gamma is None else gamma
    e = min(cert1.epsilon, cert2.epsilon) if epsilon is None else epsilon
    return DominanceCertificate(P, g, e, cert1.p + cert2.p)
