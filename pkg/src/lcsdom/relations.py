"""Static incrementally passive relations and their LCP embeddings.

A relation is a set of pairs (y, zeta); in a loop it closes the linear block
through u = -zeta. Every relation here is a product of scalar monotone
graphs made of horizontal and vertical pieces, described by breakpoints

    [(y_1, (lo_1, hi_1)), ..., (y_K, (lo_K, hi_K))]

meaning zeta = lo_1 left of y_1, zeta in [lo_i, hi_i] at y_i, zeta = hi_i
between y_i and y_{i+1}, and zeta = hi_K right of y_K. Only lo_1 may be
-inf and only hi_K may be +inf; an infinite end means y cannot pass that
breakpoint.
"""

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import DimensionMismatch, UnsupportedRelation
from .lcp import LcpProblem

__all__ = [
    "Complementarity",
    "IdealDiode",
    "Saturation",
    "PiecewiseMonotone",
    "LcpEmbedding",
    "PassivityReport",
    "contains",
    "graph_residual",
    "graph_residuals",
    "incremental_passivity_sample_test",
    "sample_graph",
    "to_lcp_embedding",
]

INF = math.inf


@dataclass(frozen=True)
class Complementarity:
    """0 <= y  perp  -zeta >= 0, componentwise in dimension m."""

    m: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("dimension must be positive")

    @property
    def dimension(self):
        return self.m

    def components(self):
        return [((0.0, (-INF, 0.0)),)] * self.m


@dataclass(frozen=True)
class IdealDiode:
    """Voltage y <= 0, current zeta >= 0, y * zeta = 0."""

    @property
    def dimension(self):
        return 1

    def components(self):
        return [((0.0, (0.0, INF)),)]


@dataclass(frozen=True)
class Saturation:
    """y in [lower, upper]; zeta <= 0 at lower, 0 inside, >= 0 at upper.

    This is the op-amp output stage (V0, I_DD) and the zener characteristic.
    """

    lower: float
    upper: float

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("saturation bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got {self.lower} >= {self.upper}")

    @property
    def dimension(self):
        return 1

    def components(self):
        return [((self.lower, (-INF, 0.0)), (self.upper, (0.0, INF)))]


@dataclass(frozen=True)
class PiecewiseMonotone:
    """A monotone staircase given by breakpoints (input, (lo, hi))."""

    breakpoints: Tuple[Tuple[float, Tuple[float, float]], ...] = field(default=())

    def __post_init__(self):
        bps = tuple((float(y), (float(lo), float(hi))) for y, (lo, hi) in self.breakpoints)
        if not bps:
            raise ValueError("at least one breakpoint is required")
        for i, (y, (lo, hi)) in enumerate(bps):
            if not math.isfinite(y):
                raise ValueError("breakpoint inputs must be finite")
            if math.isnan(lo) or math.isnan(hi) or lo > hi:
                raise ValueError(f"breakpoint {i}: output interval [{lo}, {hi}] is not ordered")
            if lo == -INF and i != 0:
                raise ValueError("only the first breakpoint may extend to -inf")
            if hi == INF and i != len(bps) - 1:
                raise ValueError("only the last breakpoint may extend to +inf")
        for i in range(len(bps) - 1):
            (y0, (_, hi0)), (y1, (lo1, _)) = bps[i], bps[i + 1]
            if not y0 < y1:
                raise ValueError("breakpoint inputs must be strictly increasing")
            if hi0 != lo1:
                raise ValueError(
                    f"breakpoints {i} and {i + 1}: level {hi0} must equal {lo1} "
                    "(a monotone staircase is constant between breakpoints)")
        object.__setattr__(self, "breakpoints", bps)

    @property
    def dimension(self):
        return 1

    def components(self):
        return [self.breakpoints]


def _check_dims(rel, y, zeta):
    y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float)).ravel()
    if y.shape[0] != rel.dimension or zeta.shape[0] != rel.dimension:
        raise DimensionMismatch(f"relation has dimension {rel.dimension}")
    return y, zeta


def _pieces(bps):
    """Axis-aligned pieces of a scalar staircase: ('h', level, a, b) or ('v', at, a, b)."""
    out = []
    y1, (lo1, _) = bps[0]
    if math.isfinite(lo1):
        out.append(("h", lo1, -INF, y1))
    for i, (y, (lo, hi)) in enumerate(bps):
        out.append(("v", y, lo, hi))
        nxt = bps[i + 1][0] if i + 1 < len(bps) else INF
        if math.isfinite(hi):
            out.append(("h", hi, y, nxt))
    return out


def _scalar_distance(bps, y, z):
    best = INF
    for kind, at, a, b in _pieces(bps):
        if kind == "h":
            d = math.hypot(y - min(max(y, a), b), z - at)
        else:
            d = math.hypot(y - at, z - min(max(z, a), b))
        best = min(best, d)
    return best


def graph_residual(rel, y, zeta):
    """Largest per-component Euclidean distance from (y_i, zeta_i) to the graph."""
    y, zeta = _check_dims(rel, y, zeta)
    return max(_scalar_distance(b, yi, zi) for b, yi, zi in zip(rel.components(), y, zeta))


def graph_residuals(rel, Y, Z):
    """Row-wise ``graph_residual`` for sample arrays of shape (N, dimension)."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Y.shape != Z.shape or Y.shape[1] != rel.dimension:
        raise DimensionMismatch(f"relation has dimension {rel.dimension}")
    out = np.zeros(Y.shape[0])
    for c, bps in enumerate(rel.components()):
        y, z = Y[:, c], Z[:, c]
        best = np.full(y.shape, INF)
        for kind, at, a, b in _pieces(bps):
            if kind == "h":
                d = np.hypot(y - np.clip(y, a, b), z - at)
            else:
                d = np.hypot(y - at, z - np.clip(z, a, b))
            best = np.minimum(best, d)
        out = np.maximum(out, best)
    return out


def contains(rel, y, zeta, tol=1e-9):
    return graph_residual(rel, y, zeta) <= tol


def sample_graph(rel, count, rng, spread=None):
    """Random points (y, zeta) on the graph; rays are truncated at ``spread``."""
    ys = np.empty((count, rel.dimension))
    zs = np.empty((count, rel.dimension))
    for c, bps in enumerate(rel.components()):
        pieces = _pieces(bps)
        if spread is None:
            ends = [v for _, at, a, b in pieces for v in (at, a, b) if math.isfinite(v)]
            spread_c = 2.0 * (max(ends) - min(ends)) + 1.0 if ends else 1.0
        else:
            spread_c = spread
        which = rng.integers(len(pieces), size=count)
        frac = rng.random(count)
        # a quarter of the samples sit exactly on piece endpoints (the corners)
        corner = rng.random(count) < 0.25
        frac[corner] = np.round(frac[corner])
        for i in range(count):
            kind, at, a, b = pieces[which[i]]
            a2 = a if math.isfinite(a) else b - spread_c
            b2 = b if math.isfinite(b) else a2 + spread_c
            s = a2 + frac[i] * (b2 - a2)
            ys[i, c], zs[i, c] = (s, at) if kind == "h" else (at, s)
    return ys, zs


@dataclass(frozen=True)
class PassivityReport:
    min_pairing: float
    samples: int

    @property
    def violated(self):
        return self.min_pairing < -1e-12


def incremental_passivity_sample_test(rel, samples=100_000, rng_seed=0):
    """Minimum of <y1 - y2, zeta1 - zeta2> over random pairs of graph points."""
    rng = np.random.default_rng(rng_seed)
    y1, z1 = sample_graph(rel, samples, rng)
    y2, z2 = sample_graph(rel, samples, rng)
    pairing = np.sum((y1 - y2) * (z1 - z2), axis=1)
    return PassivityReport(float(np.min(pairing)), samples)


@dataclass(frozen=True)
class LcpEmbedding:
    """Complementarity form of a relation closed by y = r - T zeta.

    LCP variables z >= 0 give zeta = zeta0 + G z, and the complementary
    slacks are w = H y + F z + c. Substituting y = r - T zeta yields the
    LCP with M = F - H T G and q = H (r - T zeta0) + c.
    """

    dimension: int
    aux_dim: int
    zeta0: np.ndarray
    G: np.ndarray
    H: np.ndarray
    F: np.ndarray
    c: np.ndarray

    @property
    def size(self):
        return self.G.shape[1]

    def problem(self, offset, coupling=None):
        r = np.atleast_1d(np.asarray(offset, dtype=float)).ravel()
        if r.shape[0] != self.dimension:
            raise DimensionMismatch("offset has the wrong dimension")
        T = np.zeros((self.dimension, self.dimension)) if coupling is None else np.atleast_2d(
            np.asarray(coupling, dtype=float))
        M = self.F - self.H @ T @ self.G
        q = self.H @ (r - T @ self.zeta0) + self.c
        return LcpProblem(M, q)

    def zeta(self, z):
        return self.zeta0 + self.G @ np.asarray(z, dtype=float)

    def output(self, offset, z, coupling=None):
        """(y, zeta) reconstructed from an LCP solution."""
        zeta = self.zeta(z)
        r = np.atleast_1d(np.asarray(offset, dtype=float)).ravel()
        if coupling is None:
            return r.copy(), zeta
        return r - np.atleast_2d(coupling) @ zeta, zeta


def _scalar_embedding(bps):
    """Rows of (G, H, F-entries, c) for one scalar staircase."""
    y1, (lo1, hi1) = bps[0]
    zeta0 = lo1 if math.isfinite(lo1) else hi1
    g, h, c = [], [], []
    skew = []  # (row, col, value) entries of F
    for i, (y, (lo, hi)) in enumerate(bps):
        if lo == -INF:
            # vertical ray down: zeta -= z, 0 <= z perp y - y_i >= 0
            g.append(-1.0); h.append(1.0); c.append(-y)
        if math.isfinite(lo) and math.isfinite(hi):
            if hi > lo:
                # bounded jump: s in [0, hi - lo] with multiplier mu
                k = len(g)
                g.append(1.0); h.append(-1.0); c.append(y)            # w_s = y_i - y + mu
                g.append(0.0); h.append(0.0); c.append(hi - lo)       # w_mu = (hi - lo) - s
                skew.append((k, k + 1, 1.0))
                skew.append((k + 1, k, -1.0))
        if hi == INF:
            # vertical ray up: zeta += z, 0 <= z perp y_i - y >= 0
            g.append(1.0); h.append(-1.0); c.append(y)
    return zeta0, g, h, c, skew


def to_lcp_embedding(rel):
    """Build the LCP embedding of a supported relation.

    Complementarity and IdealDiode use the relation's own pair (aux_dim 0).
    Saturation uses two auxiliary pairs, the two diode currents. A
    staircase adds two pairs per bounded jump and one per infinite end.
    """
    if not isinstance(rel, (Complementarity, IdealDiode, Saturation, PiecewiseMonotone)):
        raise UnsupportedRelation(f"no LCP embedding for {type(rel).__name__}")
    comps = rel.components()
    m = len(comps)
    parts = [_scalar_embedding(b) for b in comps]
    k = sum(len(p[1]) for p in parts)
    G = np.zeros((m, k))
    H = np.zeros((k, m))
    F = np.zeros((k, k))
    c = np.zeros(k)
    zeta0 = np.zeros(m)
    off = 0
    for i, (z0, g, h, cc, skew) in enumerate(parts):
        n_i = len(g)
        zeta0[i] = z0
        G[i, off:off + n_i] = g
        H[off:off + n_i, i] = h
        c[off:off + n_i] = cc
        for r, col, v in skew:
            F[off + r, off + col] = v
        off += n_i
    aux = 0 if isinstance(rel, (Complementarity, IdealDiode)) else k
    return LcpEmbedding(dimension=m, aux_dim=aux, zeta0=zeta0, G=G, H=H, F=F, c=c)
