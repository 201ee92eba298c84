"""Simulation and dominance certification for linear complementarity systems.

The package is organised bottom-up:

* ``linalg`` and ``lcp`` hold the small dense kernels (LU solve, Jacobi
  eigenvalues, inertia, Lemke's method and an enumeration oracle);
* ``lti`` and ``relations`` describe the two halves of a loop, a linear
  state-space block and a static monotone relation;
* ``simulation`` closes the loop with a backward-Euler LCP time stepper;
* ``dominance`` searches, verifies and composes quadratic certificates;
* ``circuits`` builds the op-amp, Schmitt trigger and relaxation oscillator;
* ``cli`` is the ``lcsdom`` command-line front end.
"""

from .circuits import (
    OpAmpParams,
    OscillatorParams,
    SchmittParams,
    build_opamp,
    build_oscillator,
    build_schmitt,
    check_design_conditions,
)
from .dominance import (
    DominanceCertificate,
    SupplyRate,
    check_trajectory_dissipation,
    compose,
    passivity_supply,
    search_certificate,
    verify_linear_certificate,
)
from .errors import LcsError
from .lcp import LcpProblem, enumerate_solve, lemke_solve
from .lti import StateSpace, p_passivity_frequency_test, transfer_eval
from .relations import Complementarity, IdealDiode, PiecewiseMonotone, Saturation
from .simulation import LcsModel, incremental_pair, simulate, step_lcp

__version__ = "0.1.0"

__all__ = [
    "Complementarity",
    "DominanceCertificate",
    "IdealDiode",
    "LcpProblem",
    "LcsError",
    "LcsModel",
    "OpAmpParams",
    "OscillatorParams",
    "PiecewiseMonotone",
    "Saturation",
    "SchmittParams",
    "StateSpace",
    "SupplyRate",
    "build_opamp",
    "build_oscillator",
    "build_schmitt",
    "check_design_conditions",
    "check_trajectory_dissipation",
    "compose",
    "enumerate_solve",
    "incremental_pair",
    "lemke_solve",
    "p_passivity_frequency_test",
    "passivity_supply",
    "search_certificate",
    "simulate",
    "step_lcp",
    "transfer_eval",
    "verify_linear_certificate",
]
