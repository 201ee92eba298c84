import math

import numpy as np
import pytest

from lcsdom.errors import DimensionMismatch, UnsupportedRelation
from lcsdom.lcp import lemke_solve
from lcsdom.relations import (
    Complementarity,
    IdealDiode,
    PiecewiseMonotone,
    Saturation,
    contains,
    graph_residual,
    graph_residuals,
    incremental_passivity_sample_test,
    to_lcp_embedding,
)

INF = math.inf

STAIR = PiecewiseMonotone(((-1.0, (-INF, -2.0)), (0.0, (-2.0, 1.0)), (2.0, (1.0, 3.0))))
RELATIONS = [
    Complementarity(1),
    Complementarity(3),
    IdealDiode(),
    Saturation(-12.0, 12.0),
    PiecewiseMonotone(((0.0, (-1.0, 1.0)),)),
    STAIR,
]


def test_contains_examples():
    assert contains(Complementarity(1), [0.0], [-3.0])
    assert contains(Saturation(-12, 12), 5.0, 0.0)
    assert not contains(Saturation(-12, 12), 12.0, -1.0)
    assert contains(Saturation(-12, 12), 12.0, 7.0)
    assert contains(IdealDiode(), -1.0, 0.0)
    assert contains(IdealDiode(), 0.0, 4.0)
    assert not contains(IdealDiode(), 1.0, 0.0)


def test_contains_dimension():
    with pytest.raises(DimensionMismatch):
        contains(Complementarity(2), [0.0], [0.0])


def test_graph_residual_distance():
    # (13, 0) is one unit right of the vertical piece at y = 12
    assert graph_residual(Saturation(-12, 12), 13.0, 0.0) == pytest.approx(1.0)
    # corner of the staircase
    assert graph_residual(STAIR, 0.0, 1.0) == 0.0


def test_vectorized_residuals_match(rng):
    Y = rng.normal(size=(200, 1)) * 5
    Z = rng.normal(size=(200, 1)) * 5
    ref = [graph_residual(STAIR, y, z) for y, z in zip(Y, Z)]
    assert np.allclose(graph_residuals(STAIR, Y, Z), ref)


@pytest.mark.parametrize("rel", [Complementarity(1), Saturation(-12.0, 12.0), STAIR, IdealDiode()],
                         ids=lambda r: type(r).__name__)
def test_incremental_passivity(rel):
    rep = incremental_passivity_sample_test(rel, samples=20_000, rng_seed=3)
    assert rep.samples == 20_000
    assert rep.min_pairing >= -1e-12 and not rep.violated


@pytest.mark.parametrize("bps", [
    ((0.0, (1.0, 0.0)),),                                   # hi below lo
    ((0.0, (-1.0, 1.0)), (1.0, (0.0, 2.0))),                # level jumps down
    ((1.0, (-1.0, 0.0)), (0.0, (0.0, 1.0))),                # inputs decreasing
    ((0.0, (-1.0, INF)), (1.0, (INF, INF))),                # +inf before the end
    ((0.0, (0.0, 1.0)), (1.0, (-INF, 2.0))),                # -inf after the start
    (),
])
def test_non_monotone_rejected(bps):
    with pytest.raises(ValueError):
        PiecewiseMonotone(bps)


def test_saturation_rejects_bad_bounds():
    with pytest.raises(ValueError):
        Saturation(1.0, -1.0)
    with pytest.raises(ValueError):
        Saturation(-INF, 1.0)


def test_unsupported_relation():
    with pytest.raises(UnsupportedRelation):
        to_lcp_embedding(object())


def test_embedding_sizes():
    assert to_lcp_embedding(IdealDiode()).size == 1
    assert to_lcp_embedding(IdealDiode()).aux_dim == 0
    assert to_lcp_embedding(Complementarity(3)).size == 3
    sat = to_lcp_embedding(Saturation(-12, 12))
    assert sat.size == 2 and sat.aux_dim == 2


def _solve(rel, offset, T):
    emb = to_lcp_embedding(rel)
    sol = lemke_solve(emb.problem(offset, T))
    return emb.output(offset, sol.z, T)


def test_saturation_embedding_cases():
    T = np.array([[0.1]])
    y, zeta = _solve(Saturation(-12, 12), [5.0], T)
    assert y[0] == pytest.approx(5.0) and zeta[0] == 0.0
    y, zeta = _solve(Saturation(-12, 12), [20.0], T)
    assert y[0] == pytest.approx(12.0) and zeta[0] == pytest.approx(80.0)
    y, zeta = _solve(Saturation(-12, 12), [-20.0], T)
    assert y[0] == pytest.approx(-12.0) and zeta[0] == pytest.approx(-80.0)


def test_diode_embedding_identity():
    emb = to_lcp_embedding(IdealDiode())
    prob = emb.problem([2.0], [[1.0]])
    assert prob.M.shape == (1, 1) and prob.M[0, 0] == pytest.approx(1.0)
    y, zeta = _solve(IdealDiode(), [2.0], [[1.0]])
    assert y[0] == pytest.approx(0.0) and zeta[0] == pytest.approx(2.0)


@pytest.mark.parametrize("rel", RELATIONS, ids=lambda r: f"{type(r).__name__}{r.dimension}")
def test_embedding_reconstruction(rel, rng):
    m = rel.dimension
    for _ in range(1000):
        X = rng.normal(size=(m, m))
        T = X @ X.T + 0.05 * np.eye(m)
        offset = rng.normal(size=m) * 10
        y, zeta = _solve(rel, offset, T)
        assert contains(rel, y, zeta, 1e-9)
        assert np.allclose(y, offset - T @ zeta)
