"""Time stepping for linear complementarity systems.

    x' = A x + B u + B v,   y = C x + D u,   (y, -u) in R

Backward Euler with one LCP per step (the catch-up scheme): with
W = (I - hA)^-1 the next state is x_{k+1} = W (x_k + h B (u_{k+1} + v)) and
y_{k+1} = C x_{k+1} + D u_{k+1}, so (y_{k+1}, -u_{k+1}) solves the relation
closed by y = r - T zeta with r = C W (x_k + h B v) and T = h C W B + D.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    InitialConditionInfeasible,
    LcpFailure,
    LcsError,
    SingularMatrix,
    SingularStepMatrix,
)
from .lcp import LcpProblem, lemke_solve
from .linalg import eig_general, solve_linear
from .lti import StateSpace, validate_assumption1
from .relations import graph_residual, graph_residuals, to_lcp_embedding

__all__ = [
    "LcsModel",
    "Trajectory",
    "PairedTrajectory",
    "step_lcp",
    "simulate",
    "incremental_pair",
    "max_step",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LcsModel:
    linear: StateSpace
    relation: object
    v: Optional[np.ndarray] = None
    name: str = ""
    state_names: tuple = ()

    def __post_init__(self):
        if self.relation.dimension != self.linear.m:
            raise DimensionMismatch(
                f"relation dimension {self.relation.dimension} differs from m={self.linear.m}")
        v = np.zeros(self.linear.m) if self.v is None else np.atleast_1d(
            np.asarray(self.v, dtype=float)).ravel()
        if v.shape[0] != self.linear.m:
            raise DimensionMismatch("v must have one entry per input")
        object.__setattr__(self, "v", v)

    @property
    def n(self):
        return self.linear.n

    @property
    def m(self):
        return self.linear.m

    @cached_property
    def assumption1(self):
        return validate_assumption1(self.linear)

    @cached_property
    def embedding(self):
        return to_lcp_embedding(self.relation)


def max_step(model):
    """Largest h for which backward Euler keeps every unstable mode unstable.

    An eigenvalue lambda with Re(lambda) > 0 needs h * Re(lambda) < 1, or the
    implicit step would turn growth into decay (and I - hA is singular at
    h = 1/lambda for real lambda).
    """
    lam = eig_general(model.linear.A)
    worst = max((z.real for z in lam), default=0.0)
    return math.inf if worst <= 0 else 1.0 / worst


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    residuals: np.ndarray
    flagged_steps: tuple = ()

    @property
    def final_state(self):
        return self.x[-1]

    def __len__(self):
        return self.times.shape[0]


@dataclass(frozen=True)
class PairedTrajectory:
    first: Trajectory
    second: Trajectory
    dx: np.ndarray = field(repr=False)


class _Stepper:
    """Per-step LCP data precomputed for a fixed model and step size.

    For a fixed active set the LCP solution is affine in the current state,
    so each active set seen so far is cached as maps x -> z and
    x -> (z_active, w_inactive). The previous step's set is tried first and
    accepted only if those entries are non-negative to tolerance; otherwise
    Lemke's method runs from scratch.
    """

    def __init__(self, model, h):
        lin = model.linear
        n = lin.n
        try:
            self.W = solve_linear(np.eye(n) - h * lin.A, np.eye(n))
        except SingularMatrix as exc:
            raise SingularStepMatrix(f"I - hA is singular for h={h}") from exc
        emb = model.embedding
        self.emb = emb
        CW = lin.C @ self.W
        self.T = h * CW @ lin.B + lin.D
        self.M = emb.F - emb.H @ self.T @ emb.G
        self.Qx = emb.H @ CW
        self.q0 = emb.H @ (h * CW @ lin.B @ model.v - self.T @ emb.zeta0) + emb.c
        hWB = h * self.W @ lin.B
        # x_{k+1} = W x_k + x_shift + Kz z
        self.x_shift = hWB @ (model.v - emb.zeta0)
        self.Kz = -hWB @ emb.G
        sym = 0.5 * (self.T + self.T.T)
        self.ambiguous = bool(
            np.min(np.linalg.eigvalsh(sym)) <= 1e-12 * max(1.0, np.abs(sym).max()))
        self._maps = {}
        self._last = None

    def problem(self, x):
        return LcpProblem(self.M, self.Qx @ x + self.q0)

    def _affine(self, active):
        if active in self._maps:
            return self._maps[active]
        k = self.M.shape[0]
        idx = list(active)
        rest = [i for i in range(k) if i not in active]
        entry = None
        sub = self.M[np.ix_(idx, idx)]
        if not idx or np.linalg.cond(sub) < 1e10:
            Zx = np.zeros((k, self.Qx.shape[1]))
            z0 = np.zeros(k)
            if idx:
                inv = np.linalg.inv(sub)
                Zx[idx] = -inv @ self.Qx[idx]
                z0[idx] = -inv @ self.q0[idx]
            Wx = self.M @ Zx + self.Qx
            w0 = self.M @ z0 + self.q0
            S = np.vstack([Zx[idx], Wx[rest]])
            s0 = np.concatenate([z0[idx], w0[rest]])
            entry = (Zx, z0, S, s0)
        self._maps[active] = entry
        return entry

    def solve(self, x):
        q = self.Qx @ x + self.q0
        tol = 1e-9 * (1.0 + np.abs(q).max())
        if self._last is not None:
            entry = self._affine(self._last)
            if entry is not None:
                Zx, z0, S, s0 = entry
                if S.shape[0] == 0 or (S @ x + s0).min() >= -tol:
                    return Zx @ x + z0
        sol = lemke_solve(LcpProblem(self.M, q))
        self._last = tuple(int(i) for i in np.flatnonzero(sol.z > 0.0))
        return sol.z

    def advance(self, x, z):
        return self.W @ x + self.x_shift + self.Kz @ z


def step_lcp(model, x_k, h):
    """The LCP whose solution gives u_{k+1} for one backward-Euler step.

    M_h = F - H T G and q_h = H (C W (x_k + h B v) - T zeta0) + c with
    W = (I - hA)^-1 and T = h C W B + D, where (G, H, F, c, zeta0) is the
    relation's LCP embedding.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x_k = _state(model, x_k)
    return _Stepper(model, h).problem(x_k)


def _state(model, x):
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if x.shape[0] != model.n:
        raise DimensionMismatch(f"state must have {model.n} entries")
    return x


def _initial_output(model, x0):
    """Solve the relation at t = 0 with y = C x0 + D u; infeasible means a jump."""
    lin = model.linear
    emb = model.embedding
    prob = emb.problem(lin.C @ x0, lin.D)
    try:
        sol = lemke_solve(prob)
    except LcsError as exc:
        raise InitialConditionInfeasible(
            f"x0={np.asarray(x0).tolist()} violates the complementarity conditions: {exc}") from exc
    y, zeta = emb.output(lin.C @ x0, sol.z, lin.D)
    res = max(graph_residual(model.relation, y, zeta), sol.complementarity_residual)
    if res > 1e-8 * (1.0 + np.abs(y).max()):
        raise InitialConditionInfeasible(f"x0={np.asarray(x0).tolist()} is not consistent (residual {res:.3e})")
    return -zeta, y, res


def simulate(model, x0, t_end, h=1e-4, check_step=True):
    """Backward-Euler trajectory on [0, t_end] with ceil(t_end / h) steps.

    Sample 0 is the initial state with the relation solved statically; each
    further sample comes from one LCP solve. ``residuals`` holds the larger
    of the LCP residual and the distance of (y, -u) to the relation graph.
    """
    if h <= 0 or t_end <= 0:
        raise ValueError("h and t_end must be positive")
    if check_step:
        limit = max_step(model)
        if not h < limit:
            raise ValueError(f"h={h} is not below the stability limit {limit:.4g} for this model")
    x = _state(model, x0)
    steps = int(math.ceil(t_end / h - 1e-9))
    stepper = _Stepper(model, h)
    emb = model.embedding
    X = np.empty((steps + 1, model.n))
    Z = np.empty((steps + 1, emb.size))
    X[0] = x
    u0, y0, res0 = _initial_output(model, x)
    for k in range(1, steps + 1):
        try:
            z = stepper.solve(x)
        except LcsError as exc:
            raise LcpFailure(k, x, exc) from exc
        x = stepper.advance(x, z)
        X[k], Z[k] = x, z

    lin = model.linear
    Zs = Z[1:]
    Wl = Zs @ stepper.M.T + X[:-1] @ stepper.Qx.T + stepper.q0
    zeta = emb.zeta0 + Zs @ emb.G.T
    U = np.vstack([u0, -zeta])
    Y = X @ lin.C.T + U @ lin.D.T
    res = np.empty(steps + 1)
    res[0] = res0
    res[1:] = np.maximum.reduce([
        np.max(-Zs, axis=1, initial=0.0),
        np.max(-Wl, axis=1, initial=0.0),
        np.abs(np.sum(Zs * Wl, axis=1)),
        graph_residuals(model.relation, Y[1:], zeta),
    ])
    flagged = ()
    if stepper.ambiguous:
        degenerate = np.any((Zs <= 1e-12) & (Wl <= 1e-12), axis=1)
        flagged = tuple(int(k) + 1 for k in np.flatnonzero(degenerate))
        if flagged:
            log.info("%d steps had a semidefinite step LCP with degenerate solutions", len(flagged))
    times = np.arange(steps + 1) * h
    return Trajectory(times, X, U, Y, res, flagged)


def incremental_pair(model, x0_a, x0_b, t_end, h=1e-4):
    """Two trajectories on the same grid and their increment dx = x_a - x_b."""
    a = simulate(model, x0_a, t_end, h)
    b = simulate(model, x0_b, t_end, h)
    return PairedTrajectory(a, b, a.x - b.x)
