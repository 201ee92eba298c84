"""``lcsdom`` command-line interface.

Exit codes: 0 success, 1 bad input or configuration, 2 solver failure,
3 certificate search exhausted. Results go to stdout or ``--out``;
diagnostics go to stderr.
"""

import argparse
import logging
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import circuits
from .config import (
    dump_certificate,
    load_certificate,
    load_config,
    parse_matrix,
    write_trajectory_csv,
)
from .dominance import (
    SupplyRate,
    block_diag_certificate,
    compose,
    search_certificate,
    verify_linear_certificate,
)
from .errors import ConfigError, InitialConditionInfeasible, LcpFailure, LcsError
from .lti import p_passivity_frequency_test
from .simulation import LcsModel, simulate

log = logging.getLogger("lcsdom")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_EXHAUSTED = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


# preset name -> (parameter type, builder(params, args))
PRESETS = {
    "opamp": (circuits.OpAmpParams, lambda p, a: circuits.build_opamp(p, a.ve)),
    "schmitt": (circuits.SchmittParams, lambda p, a: circuits.build_schmitt(p)),
    "oscillator": (circuits.OscillatorParams, lambda p, a: circuits.build_oscillator(p)),
    "opamp-linear": (circuits.OpAmpParams, lambda p, a: circuits.opamp_linear(p)),
    "sigma_a": (circuits.OpAmpParams, lambda p, a: circuits.opamp_linear(p)),
    "sigma_c": (circuits.SchmittParams, lambda p, a: circuits.sigma_c(p)),
    "sigma_d": (circuits.OscillatorParams, lambda p, a: circuits.sigma_d(p)),
    "aggregate": (circuits.OscillatorParams, lambda p, a: circuits.oscillator_aggregate(p)),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated options shared by every subcommand."""

    command: str
    model: str
    params: tuple = ()
    out: str = None


def _floats(text, what):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise CliError(f"{what} must be comma-separated numbers, got '{text}'") from None


def _params(pairs):
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise CliError(f"--param expects K=V, got '{item}'")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise CliError(f"--param {key}: '{value}' is not a number") from None
    return out


def preset_params(name, overrides):
    ptype = PRESETS[name][0]
    try:
        return circuits.with_overrides(ptype(), overrides)
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from None
    except ValueError as exc:
        raise CliError(str(exc)) from None


def resolve_model(args):
    """A preset or a config file path -> LcsModel or StateSpace."""
    name = args.model
    overrides = _params(getattr(args, "param", None))
    if name in PRESETS:
        params = preset_params(name, overrides)
        return PRESETS[name][1](params, args)
    if overrides:
        raise CliError("--param only applies to named presets")
    if not Path(name).is_file():
        raise CliError(f"unknown model '{name}' (presets: {', '.join(PRESETS)}; or a config path)")
    cfg = load_config(name)
    return cfg["model"] or cfg["linear"] or _raise(f"{name}: no model in file")


def _raise(msg):
    raise CliError(msg)


def _linear(model):
    return model.linear if isinstance(model, LcsModel) else model


def _lcs(model, name):
    if not isinstance(model, LcsModel):
        raise CliError(f"'{name}' is a linear block; simulation needs a [relation]")
    return model


def _positive(value, flag):
    if not value > 0:
        raise CliError(f"{flag} must be positive")
    return value


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


# -- simulate -----------------------------------------------------------------

def _simulate_one(model, x0, t_end, h):
    try:
        return simulate(model, x0, t_end, h)
    except LcpFailure as exc:
        raise CliError(f"solver failure at step {exc.step}: {exc.cause}", EXIT_SOLVER) from None
    except InitialConditionInfeasible as exc:
        raise CliError(str(exc)) from None
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_simulate(args):
    model = _lcs(resolve_model(args), args.model)
    x0 = _floats(args.x0, "--x0")
    if len(x0) != model.n:
        raise CliError(f"--x0 needs {model.n} values for '{args.model}', got {len(x0)}")
    traj = _simulate_one(model, x0, _positive(args.t_end, "--t-end"), _positive(args.h, "--h"))
    out = _open_out(args.out)
    try:
        write_trajectory_csv(traj, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.svg:
        from .plot import write_svg
        names = model.state_names or [f"x{i + 1}" for i in range(model.n)]
        write_svg(args.svg, traj.times, traj.x, names, title=model.name)
    if traj.flagged_steps:
        log.warning("%d steps had non-unique LCP solutions (Lemke path taken)",
                    len(traj.flagged_steps))
    log.info("final state %s, max residual %.3e", traj.final_state, traj.residuals.max())
    return EXIT_OK


# -- certify ------------------------------------------------------------------

def cmd_certify(args):
    sys_ = _linear(resolve_model(args))
    if args.p < 0 or args.p > sys_.n:
        raise CliError(f"--p must be in [0, {sys_.n}]")
    if args.gamma < 0:
        raise CliError("--gamma must be non-negative")
    if args.epsilon is not None and args.epsilon < 0:
        raise CliError("--epsilon must be non-negative")
    cert = search_certificate(sys_, args.p, args.gamma, epsilon=args.epsilon,
                              restarts=args.restarts, seed=args.seed)
    if cert is None:
        print(f"no {args.p}-passivity certificate found at gamma={args.gamma:g} "
              f"after {args.restarts} restarts", file=sys.stderr)
        return EXIT_EXHAUSTED
    report = verify_linear_certificate(sys_, cert)
    text = dump_certificate(cert)
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    print(f"# inertia {report.inertia}, lmi margin {report.lmi_margin:.6g}, "
          f"coupling residual {report.coupling_residual:.3g}")
    return EXIT_OK


# -- freqtest -----------------------------------------------------------------

def cmd_freqtest(args):
    sys_ = _linear(resolve_model(args))
    if sys_.m != 1:
        raise CliError("freqtest needs a single-input single-output model")
    if args.gamma < 0:
        raise CliError("--gamma must be non-negative")
    if args.grid < 2:
        raise CliError("--grid must be at least 2")
    try:
        rep = p_passivity_frequency_test(sys_, args.gamma, _positive(args.w_max, "--w-max"),
                                         args.grid)
    except LcsError as exc:
        raise CliError(str(exc)) from None
    if args.out:
        np.savetxt(args.out, np.column_stack([rep.frequencies, rep.real_parts]), fmt="%.11e",
                   delimiter=",", header="w,re", comments="")
    print(f"poles right of -gamma: {rep.shifted_right_pole_count}; "
          f"min Re G(jw-gamma) = {rep.min_real_part:.6g} at w = {rep.argmin_frequency:.6g}; "
          f"Re G at infinity = {rep.limit_at_infinity:.6g} (tail {rep.tail_coefficient:.6g}/w^2)")
    print(rep.verdict_line())
    return EXIT_OK


# -- compose ------------------------------------------------------------------

def _supply(args, k):
    m = args.m
    mats = []
    for part, default in (("q", np.zeros((m, m))), ("l", np.eye(m)), ("r", np.zeros((m, m)))):
        text = getattr(args, f"{part}{k}")
        if text is None:
            mats.append(default)
        else:
            try:
                mats.append(parse_matrix(text, m, m, f"--{part}{k}"))
            except ConfigError as exc:
                raise CliError(str(exc)) from None
    try:
        return SupplyRate(*mats)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_compose(args):
    if args.m < 1:
        raise CliError("--m must be positive")
    comp = compose(_supply(args, 1), _supply(args, 2), args.p1, args.p2)
    with np.printoptions(precision=6, suppress=True):
        print("coupling block:")
        print(comp.coupling_block)
    print(f"dominant = {str(comp.dominant).lower()}")
    print(f"p = {comp.p_total}")
    if args.cert1 or args.cert2:
        if not (args.cert1 and args.cert2):
            raise CliError("--cert1 and --cert2 go together")
        cert = block_diag_certificate(load_certificate(args.cert1), load_certificate(args.cert2),
                                      gamma=args.gamma)
        print(f"block-diagonal inertia {cert.inertia()}")
        text = dump_certificate(cert)
        if args.out:
            Path(args.out).write_text(text)
        print(text, end="")
    return EXIT_OK


# -- check-circuit ------------------------------------------------------------

def cmd_check_circuit(args):
    if args.model not in ("schmitt", "oscillator"):
        raise CliError("check-circuit takes --model schmitt or oscillator")
    params = preset_params(args.model, _params(args.param))
    rows, rep = circuits.check_design_conditions(params, gamma=args.gamma)
    for row in rows:
        print(row.line())
    if rep is not None:
        print(f"aggregate G frequency test at gamma={rep.gamma:g}: {rep.verdict_line()} "
              f"(min Re {rep.min_real_part:.6g} at w={rep.argmin_frequency:.6g})")
    return EXIT_OK


# -- sweep --------------------------------------------------------------------

def _sweep_task(job):
    name, overrides, ve, x0, t_end, h = job
    params = circuits.with_overrides(PRESETS[name][0](), overrides)
    model = PRESETS[name][1](params, argparse.Namespace(ve=ve))
    traj = simulate(model, x0, t_end, h)
    return traj.final_state, float(traj.x[:, 0].min()), float(traj.x[:, 0].max())


def cmd_sweep(args):
    if args.model not in PRESETS or not isinstance(resolve_model(args), LcsModel):
        raise CliError("sweep needs an LCS preset (opamp, schmitt, oscillator)")
    base = _params(args.param)
    values = _floats(args.values, "--values")
    if not values:
        raise CliError("--values is empty")
    preset_params(args.model, {**base, args.name: values[0]})  # validate the name early
    x0 = _floats(args.x0, "--x0")
    t_end, h = _positive(args.t_end, "--t-end"), _positive(args.h, "--h")
    jobs = [(args.model, {**base, args.name: v}, args.ve, x0, t_end, h) for v in values]
    try:
        if args.workers == 1:
            results = [_sweep_task(j) for j in jobs]
        else:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                results = list(pool.map(_sweep_task, jobs))
    except LcpFailure as exc:
        raise CliError(f"solver failure at step {exc.step}: {exc.cause}", EXIT_SOLVER) from None
    except (LcsError, ValueError) as exc:
        raise CliError(str(exc)) from None
    n = len(results[0][0])
    out = _open_out(args.out)
    try:
        out.write(",".join([args.name] + [f"x{i}_final" for i in range(1, n + 1)]
                           + ["x1_min", "x1_max"]) + "\n")
        for v, (final, lo, hi) in zip(values, results):
            out.write(",".join(f"{x:.11e}" for x in [v, *final, lo, hi]) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _model_args(p, required=True):
    p.add_argument("--model", required=required,
                   help=f"preset ({', '.join(PRESETS)}) or config file path")
    p.add_argument("--param", action="append", metavar="K=V",
                   help="override a preset parameter, e.g. R3=3300 (repeatable)")
    p.add_argument("--ve", type=float, default=0.0,
                   help="constant differential input V_E for the opamp preset")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lcsdom",
        description="Simulate linear complementarity systems and certify p-dominance.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="backward-Euler simulation to CSV")
    _model_args(p)
    p.add_argument("--x0", required=True, help="initial state, comma-separated")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--h", type=float, default=1e-4)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--svg", help="also write an SVG plot of the states")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="search and verify a p-passivity certificate")
    _model_args(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=None,
                   help="strictness margin (default scales with |A| and P)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--out", help="write the [certificate] section here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("freqtest", help="sampled frequency-domain p-passivity test")
    _model_args(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--w-max", type=float, default=1e6)
    p.add_argument("--grid", type=int, default=4000)
    p.add_argument("--out", help="CSV of w, Re G(jw - gamma)")
    p.set_defaults(func=cmd_freqtest)

    p = sub.add_parser("compose", help="dominance of a feedback interconnection")
    p.add_argument("--m", type=int, default=1, help="port dimension")
    for k in (1, 2):
        p.add_argument(f"--p{k}", type=int, default=0)
        for part in "qlr":
            p.add_argument(f"--{part}{k}", help=f"{part.upper()} block of supply {k} "
                           "(comma-separated row-major; default passivity)")
        p.add_argument(f"--cert{k}", help=f"certificate file of block {k}")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--out", help="write the block-diagonal certificate here")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("check-circuit", help="evaluate circuit design inequalities")
    _model_args(p)
    p.add_argument("--gamma", type=float, default=None)
    p.set_defaults(func=cmd_check_circuit)

    p = sub.add_parser("sweep", help="final states over a parameter sweep")
    _model_args(p)
    p.add_argument("--name", required=True, help="parameter to sweep")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--x0", required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--h", type=float, default=1e-4)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


_NEGATIVE = re.compile(r"^-\.?\d")


def _join_negative_values(argv):
    """Turn ``--x0 -2,-2`` into ``--x0=-2,-2`` so argparse does not see a flag."""
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LcsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
