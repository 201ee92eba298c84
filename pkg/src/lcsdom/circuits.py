"""Op-amp, Schmitt trigger and relaxation oscillator models.

All three share the op-amp output stage: a saturation relation between
V0 = x_a and the diode current difference I_DD, entering the capacitor
equation as u = -I_DD through B = 1/Ca. The output buffer is ideal, so the
RC networks read V0 without loading it.
"""

from dataclasses import dataclass, field, fields, replace
import numpy as np

from .dominance import DominanceCertificate
from .lti import StateSpace, p_passivity_frequency_test
from .relations import Saturation
from .simulation import LcsModel

__all__ = [
    "OpAmpParams",
    "SchmittParams",
    "OscillatorParams",
    "NOMINAL_SCHMITT",
    "build_opamp",
    "build_schmitt",
    "build_oscillator",
    "opamp_linear",
    "opamp_standard_form",
    "sigma_c",
    "sigma_d",
    "oscillator_aggregate",
    "opamp_certificate",
    "sigma_c_certificate",
    "ConditionRow",
    "check_design_conditions",
    "with_overrides",
]


@dataclass(frozen=True)
class OpAmpParams:
    Ra: float = 1e6
    Ca: float = 15.9e-9
    alpha: float = 0.1
    E1: float = 12.0
    E2: float = 12.0

    def __post_init__(self):
        _positive(self)

    @property
    def pole(self):
        """1 / (Ra Ca), the op-amp bandwidth in 1/s."""
        return 1.0 / (self.Ra * self.Ca)


@dataclass(frozen=True)
class SchmittParams:
    opamp: OpAmpParams = field(default_factory=OpAmpParams)
    R1: float = 1e3
    R2: float = 1e3
    C1: float = 100e-6

    def __post_init__(self):
        _positive(self)

    @property
    def a1(self):
        return 1.0 / (self.R2 * self.C1)

    @property
    def b1(self):
        return (self.R1 + self.R2) / (self.R1 * self.R2 * self.C1)


@dataclass(frozen=True)
class OscillatorParams:
    schmitt: SchmittParams = field(default_factory=SchmittParams)
    R3: float = 3.3e3
    R4: float = 1e3
    C2: float = 200e-6

    def __post_init__(self):
        _positive(self)

    @property
    def a2(self):
        return 1.0 / (self.R4 * self.C2)

    @property
    def b2(self):
        return (self.R3 + self.R4) / (self.R3 * self.R4 * self.C2)


def _positive(params):
    for f in fields(params):
        value = getattr(params, f.name)
        if isinstance(value, float) and not value > 0:
            raise ValueError(f"{f.name} must be positive, got {value}")


# R1 = R2 = 1 kOhm, C1 = 100 uF, Ra = 1 MOhm, Ca = 15.9 nF, alpha = 0.1, E1 = E2 = 12 V
NOMINAL_SCHMITT = SchmittParams()


def with_overrides(params, overrides):
    """Replace named leaf parameters anywhere in a nested parameter set."""
    remaining = dict(overrides)

    def walk(obj):
        changes = {}
        for f in fields(obj):
            value = getattr(obj, f.name)
            if hasattr(value, "__dataclass_fields__"):
                changes[f.name] = walk(value)
            elif f.name in remaining:
                changes[f.name] = float(remaining.pop(f.name))
        return replace(obj, **changes)

    out = walk(params)
    if remaining:
        raise KeyError(f"unknown parameter(s): {', '.join(sorted(remaining))}")
    return out


def opamp_linear(p=OpAmpParams()):
    """Sigma_a: x' = -x/(Ra Ca) + u/Ca, y = x."""
    return StateSpace([[-p.pole]], [[1.0 / p.Ca]], [[1.0]])


def opamp_standard_form(p=OpAmpParams()):
    """Four-input complementarity form u = (I_D1, I_D2, E1, E2)."""
    A = [[-p.pole]]
    B = np.array([[-1.0, 1.0, 0.0, 0.0]]) / p.Ca
    C = np.array([[-1.0], [1.0], [0.0], [0.0]])
    D = np.zeros((4, 4))
    D[0, 2] = D[1, 3] = 1.0
    return StateSpace(A, B, C, D)


def sigma_c(p=NOMINAL_SCHMITT):
    """RC network x1' = -b1 x1 + a1 nu1 with output y1 = -x1."""
    return StateSpace([[-p.b1]], [[p.a1]], [[-1.0]])


def sigma_d(p=OscillatorParams()):
    """RC network x2' = -b2 x2 + a2 nu2 with output y2 = x2."""
    return StateSpace([[-p.b2]], [[p.a2]], [[1.0]])


def oscillator_aggregate(p=OscillatorParams()):
    """G(s) = -a1/(s + b1) + a2/(s + b2), from V0 to y = y1 + y2."""
    s = p.schmitt
    return StateSpace(np.diag([-s.b1, -p.b2]), [[s.a1], [p.a2]], [[-1.0, 1.0]])


def opamp_certificate(p=OpAmpParams(), gamma=25.0, epsilon=0.0):
    """P = Ca: the unique solution of PB = C' for Sigma_a."""
    return DominanceCertificate([[p.Ca]], gamma, epsilon, 0)


def sigma_c_certificate(p=NOMINAL_SCHMITT, gamma=25.0, epsilon=0.0):
    """P = -1/a1: the unique solution of PB = C' for Sigma_c."""
    return DominanceCertificate([[-1.0 / p.a1]], gamma, epsilon, 1)


def build_opamp(p=OpAmpParams(), V_E=0.0):
    """Op-amp loop with a constant differential input V_E (v = alpha V_E)."""
    return LcsModel(opamp_linear(p), Saturation(-p.E2, p.E1), v=[p.alpha * V_E],
                    name="opamp", state_names=("x_a",))


def build_schmitt(p=NOMINAL_SCHMITT):
    """Positive feedback V_E = x1, nu1 = V0; state (x_a, x1)."""
    op = p.opamp
    A = np.array([
        [-op.pole, op.alpha / op.Ca],
        [p.a1, -p.b1],
    ])
    B = np.array([[1.0 / op.Ca], [0.0]])
    C = np.array([[1.0, 0.0]])
    return LcsModel(StateSpace(A, B, C), Saturation(-op.E2, op.E1),
                    name="schmitt", state_names=("x_a", "x1"))


def build_oscillator(p=OscillatorParams()):
    """Mixed feedback V_E = x1 - x2, nu1 = nu2 = V0; state (x_a, x1, x2)."""
    s = p.schmitt
    op = s.opamp
    g = op.alpha / op.Ca
    A = np.array([
        [-op.pole, g, -g],
        [s.a1, -s.b1, 0.0],
        [p.a2, 0.0, -p.b2],
    ])
    B = np.array([[1.0 / op.Ca], [0.0], [0.0]])
    C = np.array([[1.0, 0.0, 0.0]])
    return LcsModel(StateSpace(A, B, C), Saturation(-op.E2, op.E1),
                    name="oscillator", state_names=("x_a", "x1", "x2"))


@dataclass(frozen=True)
class ConditionRow:
    name: str
    lhs: float
    rhs: float
    holds: bool
    relation: str = "<"

    def line(self):
        verdict = "true" if self.holds else "false"
        return f"{self.name}: {self.lhs:.6g} {self.relation} {self.rhs:.6g} -> {verdict}"


def _schmitt_rows(p):
    op = p.opamp
    return [
        ConditionRow("slow network (b1 < 1/(Ra Ca))", p.b1, op.pole, p.b1 < op.pole),
        ConditionRow("unstable origin (1/Ra < alpha R1/(R1+R2))", 1.0 / op.Ra,
                     op.alpha * p.R1 / (p.R1 + p.R2), 1.0 / op.Ra < op.alpha * p.R1 / (p.R1 + p.R2)),
    ]


def check_design_conditions(p, gamma=None, w_max=1e6, grid=4000):
    """Evaluate the circuit's design inequalities numerically.

    Schmitt trigger: slow-network and unstable-origin conditions, plus the
    1-passivity rate band b1 < gamma < 1/(Ra Ca) when ``gamma`` is given.
    Oscillator: the Schmitt rows, the 0- and 2-passive parameter regions at
    ``gamma`` (default 25), both real-part inequalities, and a sampled
    frequency test of the aggregate G(s) as an independent check. Returns
    (rows, frequency report or None).
    """
    if isinstance(p, SchmittParams):
        rows = _schmitt_rows(p)
        if gamma is not None:
            op = p.opamp
            rows.append(ConditionRow("1-passive rate band (b1 < gamma < 1/(Ra Ca))", gamma,
                                     op.pole, p.b1 < gamma < op.pole, "in (b1, 1/(Ra Ca)) <"))
        return rows, None

    if not isinstance(p, OscillatorParams):
        raise TypeError("expected SchmittParams or OscillatorParams")
    gamma = 25.0 if gamma is None else float(gamma)
    s = p.schmitt
    op = s.opamp
    a1, b1, a2, b2 = s.a1, s.b1, p.a2, p.b2
    ratio = a2 / a1
    rows = _schmitt_rows(s)
    r1 = a2 * (b2 - gamma) - a1 * (b1 - gamma)
    r2 = a2 * (b1 - gamma) - a1 * (b2 - gamma)
    rows.append(ConditionRow("Re>0 term a2(b2-g) - a1(b1-g) > 0", r1, 0.0, r1 > 0, ">"))
    rows.append(ConditionRow("Re>0 term a2(b1-g) - a1(b2-g) > 0", r2, 0.0, r2 > 0, ">"))
    low = min(b1, b2, op.pole)
    rows.append(ConditionRow("0-passive rate band (0 < gamma < min{b1,b2,1/(Ra Ca)})",
                             gamma, low, 0 < gamma < low))
    if b1 != gamma and b2 != gamma:
        hi_ratio = max((b1 - gamma) / (b2 - gamma), (b2 - gamma) / (b1 - gamma))
        lo_ratio = min((b1 - gamma) / (b2 - gamma), (b2 - gamma) / (b1 - gamma))
    else:
        hi_ratio = lo_ratio = float("nan")
    rows.append(ConditionRow("0-passive ratio (a2/a1 > max ratio)", ratio, hi_ratio,
                             ratio > hi_ratio, ">"))
    top = max(b1, b2)
    rows.append(ConditionRow("2-passive rate band (max{b1,b2} < gamma < 1/(Ra Ca))",
                             top, op.pole, top < gamma < op.pole, f"< {gamma:g} <"))
    rows.append(ConditionRow("2-passive ratio (a2/a1 < min ratio)", ratio, lo_ratio,
                             ratio < lo_ratio))
    report = p_passivity_frequency_test(oscillator_aggregate(p), gamma, w_max=w_max, grid=grid)
    return rows, report
