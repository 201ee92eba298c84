"""Model/certificate config files and trajectory CSV output.

Config files are INI-style (``key = value`` lines under ``[section]``
headers, ``#`` comments, indented continuation lines). Recognised sections:

``[linear]``
    ``A``, ``B``, ``C`` and optional ``D``: whitespace-separated numbers in
    row-major order. Shapes come from ``X.rows``/``X.cols`` when given and
    are otherwise inferred from ``n`` (state dimension) and ``m`` (input
    dimension); ``n`` itself may be omitted when ``A`` is a perfect square.
``[relation]``
    ``kind`` is one of ``complementarity`` (with ``dim``, default 1),
    ``diode``, ``saturation`` (``lower``, ``upper``) or ``piecewise``
    (``breakpoints = y:lo:hi, y:lo:hi, ...`` with ``inf``/``-inf`` allowed).
``[input]``
    ``v``: the constant external input, one value per relation component.
``[certificate]``
    ``n``, ``P`` (row-major), ``gamma``, ``epsilon``, ``p``.

A file with ``[linear]`` and ``[relation]`` is a complete LCS model; a file
with only ``[linear]`` is a linear block.
"""

import configparser
import io
import math
from pathlib import Path

import numpy as np

from .dominance import DominanceCertificate
from .errors import ConfigError
from .lti import StateSpace
from .relations import Complementarity, IdealDiode, PiecewiseMonotone, Saturation
from .simulation import LcsModel

__all__ = [
    "parse_config",
    "load_config",
    "load_certificate",
    "dump_certificate",
    "dump_model",
    "format_matrix",
    "parse_matrix",
    "trajectory_csv",
    "write_trajectory_csv",
]


def _parser():
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str  # matrix names are case-sensitive
    return cp


def _numbers(text, key):
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def parse_matrix(text, rows=None, cols=None, key="matrix"):
    """Row-major whitespace- or comma-separated numbers as a 2-D array."""
    vals = _numbers(text, key)
    if rows is None and cols is None:
        raise ConfigError(f"{key}: shape unknown; declare {key}.rows / {key}.cols")
    if rows is None:
        rows = len(vals) // cols if cols else 0
    if cols is None:
        cols = len(vals) // rows if rows else 0
    if rows * cols != len(vals) or rows * cols == 0:
        raise ConfigError(f"{key}: expected {rows}x{cols} entries, got {len(vals)}")
    return np.array(vals).reshape(rows, cols)


def _int(section, key, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"[{section.name}] is missing '{key}'")
        return default
    try:
        value = int(section[key])
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} must be an integer") from None
    if value < 0:
        raise ConfigError(f"[{section.name}] {key} must be non-negative")
    return value


def _float(section, key, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"[{section.name}] is missing '{key}'")
        return default
    try:
        return float(section[key])
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} must be a number") from None


def _matrix(section, key, rows, cols, required=True):
    if key not in section:
        if required:
            raise ConfigError(f"[{section.name}] is missing '{key}'")
        return None
    rows = _int(section, f"{key}.rows", rows) if f"{key}.rows" in section else rows
    cols = _int(section, f"{key}.cols", cols) if f"{key}.cols" in section else cols
    return parse_matrix(section[key], rows, cols, key)


def _linear(sec):
    if "n" in sec:
        n = _int(sec, "n")
    elif "A.rows" in sec:
        n = _int(sec, "A.rows")
    elif "A" in sec:
        n = math.isqrt(len(_numbers(sec["A"], "A")))
    else:
        raise ConfigError("[linear] is missing 'A'")
    A = _matrix(sec, "A", n, n)
    if "m" in sec:
        m = _int(sec, "m")
    elif "B.cols" in sec:
        m = _int(sec, "B.cols")
    else:
        m = len(_numbers(sec.get("B", ""), "B")) // max(n, 1)
    B = _matrix(sec, "B", n, m)
    C = _matrix(sec, "C", m, n)
    D = _matrix(sec, "D", m, m, required=False)
    try:
        return StateSpace(A, B, C, D)
    except ValueError as exc:
        raise ConfigError(f"[linear] {exc}") from None


def _breakpoints(text):
    out = []
    for item in text.split(","):
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError(f"breakpoint '{item.strip()}' is not y:lo:hi")
        try:
            y, lo, hi = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"breakpoint '{item.strip()}' is not numeric") from None
        out.append((y, (lo, hi)))
    return tuple(out)


def _relation(sec):
    kind = sec.get("kind", "").strip().lower()
    try:
        if kind == "complementarity":
            return Complementarity(_int(sec, "dim", 1))
        if kind == "diode":
            return IdealDiode()
        if kind == "saturation":
            return Saturation(_float(sec, "lower"), _float(sec, "upper"))
        if kind == "piecewise":
            if "breakpoints" not in sec:
                raise ConfigError("[relation] piecewise needs 'breakpoints'")
            return PiecewiseMonotone(_breakpoints(sec["breakpoints"]))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[relation] {exc}") from None
    raise ConfigError(f"[relation] unknown kind '{kind}'")


def _certificate(sec):
    n = _int(sec, "n") if "n" in sec else math.isqrt(len(_numbers(sec.get("P", ""), "P")))
    P = _matrix(sec, "P", n, n)
    try:
        return DominanceCertificate(P, _float(sec, "gamma"), _float(sec, "epsilon", 0.0),
                                    _int(sec, "p"))
    except ValueError as exc:
        raise ConfigError(f"[certificate] {exc}") from None


def parse_config(text, name="<config>"):
    """Parse config text into a dict with keys 'linear', 'model', 'certificate'.

    Missing sections map to None.
    """
    cp = _parser()
    try:
        cp.read_string(text, source=name)
    except configparser.Error as exc:
        raise ConfigError(f"{name}: {exc}".splitlines()[0]) from None
    known = {"linear", "relation", "input", "certificate"}
    extra = set(cp.sections()) - known
    if extra:
        raise ConfigError(f"{name}: unknown section(s) {', '.join(sorted(extra))}")
    out = {"linear": None, "model": None, "certificate": None}
    if cp.has_section("linear"):
        out["linear"] = _linear(cp["linear"])
    if cp.has_section("relation"):
        if out["linear"] is None:
            raise ConfigError(f"{name}: [relation] needs a [linear] section")
        rel = _relation(cp["relation"])
        v = None
        if cp.has_section("input") and "v" in cp["input"]:
            v = _numbers(cp["input"]["v"], "v")
        try:
            out["model"] = LcsModel(out["linear"], rel, v=v, name=Path(name).stem)
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from None
    if cp.has_section("certificate"):
        out["certificate"] = _certificate(cp["certificate"])
    if all(v is None for v in out.values()):
        raise ConfigError(f"{name}: no [linear] or [certificate] section")
    return out


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def load_certificate(path):
    cert = load_config(path)["certificate"]
    if cert is None:
        raise ConfigError(f"{path}: no [certificate] section")
    return cert


def format_matrix(a):
    """Row-major numbers, one matrix row per line, repr precision."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return "\n    ".join(" ".join(repr(float(x)) for x in row) for row in a)


def dump_certificate(cert):
    """The ``[certificate]`` section for ``cert`` (round-trips exactly)."""
    return (
        "[certificate]\n"
        f"n = {cert.n}\n"
        f"P = {format_matrix(cert.P)}\n"
        f"gamma = {float(cert.gamma)!r}\n"
        f"epsilon = {float(cert.epsilon)!r}\n"
        f"p = {int(cert.p)}\n"
    )


def _fmt_bound(x):
    return "inf" if x == math.inf else "-inf" if x == -math.inf else repr(float(x))


def dump_model(model):
    """A config text that reloads to an equivalent model."""
    lin = model.linear
    lines = ["[linear]", f"n = {lin.n}", f"m = {lin.m}"]
    for key in "ABCD":
        lines.append(f"{key} = {format_matrix(getattr(lin, key))}")
    rel = model.relation
    lines.append("")
    lines.append("[relation]")
    if isinstance(rel, Complementarity):
        lines += ["kind = complementarity", f"dim = {rel.m}"]
    elif isinstance(rel, IdealDiode):
        lines.append("kind = diode")
    elif isinstance(rel, Saturation):
        lines += ["kind = saturation", f"lower = {rel.lower!r}", f"upper = {rel.upper!r}"]
    elif isinstance(rel, PiecewiseMonotone):
        bps = ", ".join(f"{y!r}:{_fmt_bound(lo)}:{_fmt_bound(hi)}" for y, (lo, hi) in rel.breakpoints)
        lines += ["kind = piecewise", f"breakpoints = {bps}"]
    else:
        raise ConfigError(f"cannot serialise relation {type(rel).__name__}")
    lines += ["", "[input]", "v = " + " ".join(repr(float(x)) for x in model.v)]
    return "\n".join(lines) + "\n"


def _header(traj):
    n, m = traj.x.shape[1], traj.u.shape[1]
    cols = ["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"u{i}" for i in range(1, m + 1)]
    cols += [f"y{i}" for i in range(1, m + 1)] + ["residual"]
    return ",".join(cols)


def trajectory_csv(traj):
    """The trajectory as CSV text: 12 significant digits, one row per sample."""
    buf = io.StringIO()
    write_trajectory_csv(traj, buf)
    return buf.getvalue()


def write_trajectory_csv(traj, target):
    """Write to a path or an open text stream."""
    data = np.column_stack([traj.times, traj.x, traj.u, traj.y, traj.residuals])
    np.savetxt(target, data, fmt="%.11e", delimiter=",", header=_header(traj), comments="")
