import math

import numpy as np
import pytest

from lcsdom import circuits
from lcsdom.errors import InitialConditionInfeasible, LcpFailure
from lcsdom.lti import StateSpace
from lcsdom.relations import Complementarity, IdealDiode
from lcsdom.simulation import LcsModel, incremental_pair, max_step, simulate, step_lcp

OPAMP = circuits.OpAmpParams()
TAU = OPAMP.Ra * OPAMP.Ca


def test_step_lcp_statics_only():
    model = LcsModel(StateSpace(np.zeros((2, 2)), np.zeros((2, 1)), [[1.0, 2.0]], [[2.0]]),
                     Complementarity(1))
    prob = step_lcp(model, [1.0, 1.0], 1e-3)
    assert np.allclose(prob.M, [[2.0]])
    assert np.allclose(prob.q, [3.0])


def test_step_lcp_opamp_interior():
    from lcsdom.lcp import lemke_solve
    model = circuits.build_opamp()
    for h in (1e-5, 1e-4, 1e-2):
        sol = lemke_solve(step_lcp(model, [0.0], h))
        assert np.all(sol.z == 0.0)


def test_opamp_saturates_at_e1():
    traj = simulate(circuits.build_opamp(V_E=1e-3), [0.0], 0.2)
    assert traj.final_state[0] == pytest.approx(12.0, abs=1e-9)
    assert traj.u[-1, 0] < 0  # the upper diode pulls current out


def test_opamp_linear_decay():
    traj = simulate(circuits.build_opamp(), [1.0], 0.05)
    xa = traj.x[:, 0]
    assert np.all(np.diff(xa) < 0) and xa[-1] > 0
    rate = -math.log(xa[-1]) / traj.times[-1]
    assert rate == pytest.approx(1 / TAU, rel=0.01)
    assert np.all(traj.u == 0.0)


def test_sample_count_and_times():
    traj = simulate(circuits.build_opamp(), [1.0], 0.01, h=1e-3)
    assert len(traj) == 11
    assert traj.times[-1] == pytest.approx(0.01)


def test_step_convergence_first_order():
    ve = 5e-5  # steady state alpha Ra ve = 5 V, inside the rails
    model = circuits.build_opamp(V_E=ve)
    t_end = 0.02
    exact = OPAMP.alpha * OPAMP.Ra * ve * (1 - math.exp(-t_end / TAU))
    errs = [abs(simulate(model, [0.0], t_end, h).final_state[0] - exact)
            for h in (4e-4, 2e-4, 1e-4, 5e-5)]
    ratios = [errs[i] / errs[i + 1] for i in range(3)]
    assert all(1.5 <= r <= 2.5 for r in ratios), ratios


def _passive_complementarity_model():
    A = [[-1.0, 1.0], [-1.0, -1.0]]
    return LcsModel(StateSpace(A, np.eye(2), np.eye(2)), Complementarity(2), v=[-1.0, 0.5])


def test_complementarity_invariant():
    model = _passive_complementarity_model()
    traj = simulate(model, [1.0, 0.5], 5.0, h=1e-3)
    for u, y in zip(traj.u, traj.y):
        tol = 1e-8 * (1 + np.max(np.abs(y)))
        assert u @ y <= tol
        assert np.all(u >= -1e-8) and np.all(y >= -1e-8)
    assert np.any(traj.u[-1] > 0)  # the constraint is active at the end
    assert traj.residuals.max() <= 1e-8


def test_schmitt_bounded_and_consistent():
    traj = simulate(circuits.build_schmitt(), [0.5, -0.3], 1.0)
    assert traj.x[:, 0].min() >= -12 - 1e-8 and traj.x[:, 0].max() <= 12 + 1e-8
    assert traj.residuals.max() <= 1e-8


def test_infeasible_initial_state():
    with pytest.raises(InitialConditionInfeasible):
        simulate(circuits.build_opamp(), [20.0], 0.01)


def test_step_size_guard():
    model = circuits.build_schmitt()
    assert max_step(model) == pytest.approx(1.27e-4, rel=0.01)
    with pytest.raises(ValueError):
        simulate(model, [1.0, 1.0], 0.01, h=2e-4)
    assert max_step(circuits.build_opamp()) == math.inf


def test_lcp_failure_reports_step():
    # D = -1 is not passive; once y would go negative the LCP has no solution
    model = LcsModel(StateSpace([[-1.0]], [[1.0]], [[1.0]], [[-1.0]]), Complementarity(1), v=[-100.0])
    with pytest.raises(LcpFailure) as info:
        simulate(model, [1.0], 1.0, h=1e-3)
    assert info.value.step >= 1
    assert len(info.value.state) == 1


def test_degenerate_steps_flagged():
    model = LcsModel(StateSpace([[0.0]], [[0.0]], [[1.0]]), IdealDiode())
    traj = simulate(model, [0.0], 0.01, h=1e-3)
    assert traj.flagged_steps == tuple(range(1, 11))


def test_deterministic():
    model = circuits.build_schmitt()
    a = simulate(model, [1.0, 0.2], 0.2)
    b = simulate(model, [1.0, 0.2], 0.2)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.residuals, b.residuals)


def test_pair_identical_states():
    pair = incremental_pair(circuits.build_schmitt(), [1.0, 1.0], [1.0, 1.0], 0.1)
    assert np.all(pair.dx == 0.0)


def test_pair_schmitt_bistable():
    pair = incremental_pair(circuits.build_schmitt(), [2.0, 2.0], [-2.0, -2.0], 2.0)
    assert np.linalg.norm(pair.dx[-1]) > 20


def test_pair_opamp_contracts():
    pair = incremental_pair(circuits.build_opamp(), [1.0], [-3.0], 0.1)
    norms = np.abs(pair.dx[:, 0])
    assert np.all(np.diff(norms) < 0)
    assert norms[-1] < norms[0] * math.exp(-0.1 / TAU) * 1.05


def test_warm_start_matches_fresh_lemke(monkeypatch):
    from lcsdom import simulation
    from lcsdom.lcp import LcpProblem, lemke_solve

    model = circuits.build_oscillator()
    warm = simulate(model, [0.1, 0.0, 0.0], 1.0)

    def fresh(self, x):
        return lemke_solve(LcpProblem(self.M, self.Qx @ x + self.q0)).z

    monkeypatch.setattr(simulation._Stepper, "solve", fresh)
    cold = simulate(model, [0.1, 0.0, 0.0], 1.0)
    # agreement to rounding through the stiff switching transients
    assert np.max(np.abs(warm.x - cold.x)) <= 1e-8 * (1 + np.max(np.abs(cold.x)))
