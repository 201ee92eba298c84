import subprocess
import sys

import numpy as np
import pytest

from lcsdom.cli import main
from lcsdom.config import load_certificate


def run(*args):
    """Run the CLI in a subprocess, as a user would."""
    return subprocess.run([sys.executable, "-m", "lcsdom", *args], capture_output=True, text=True)


def read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


@pytest.mark.parametrize("x0, target", [("2,2", (12, 6)), ("-2,-2", (-12, -6))])
def test_simulate_schmitt(tmp_path, x0, target):
    out = tmp_path / "a.csv"
    res = run("simulate", "--model", "schmitt", "--x0", x0, "--t-end", "3", "--h", "1e-4",
              "--out", str(out))
    assert res.returncode == 0, res.stderr
    assert res.stdout == ""
    data = read_csv(out)
    assert data.shape == (30001, 6)
    assert np.allclose(data[-1, 1:3], target, rtol=0.02)


def test_simulate_byte_identical(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["simulate", "--model", "oscillator", "--x0", "0.1,0,0", "--t-end", "0.5",
                     "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_simulate_stdout_and_param(capsys):
    assert main(["simulate", "--model", "opamp", "--ve", "1e-3", "--x0", "0", "--t-end", "0.001",
                 "--h", "1e-4", "--param", "E1=5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,x1,u1,y1,residual" and len(lines) == 12


def test_simulate_config_file(tmp_path):
    cfg = tmp_path / "m.ini"
    cfg.write_text("[linear]\nA = -1\nB = 1\nC = 1\n[relation]\nkind = complementarity\n"
                   "[input]\nv = -1\n")
    out = tmp_path / "c.csv"
    assert main(["simulate", "--model", str(cfg), "--x0", "1", "--t-end", "5", "--h", "1e-2",
                 "--out", str(out)]) == 0
    data = read_csv(out)
    assert data[-1, 1] == pytest.approx(0.0, abs=1e-9)   # held at the constraint
    assert data[-1, 2] == pytest.approx(1.0)             # u balances v


def test_simulate_svg(tmp_path):
    pytest.importorskip("matplotlib")
    svg = tmp_path / "a.svg"
    assert main(["simulate", "--model", "opamp", "--x0", "1", "--t-end", "0.01",
                 "--out", str(tmp_path / "a.csv"), "--svg", str(svg)]) == 0
    first = svg.read_bytes()
    assert first.lstrip().startswith(b"<?xml")
    assert main(["simulate", "--model", "opamp", "--x0", "1", "--t-end", "0.01",
                 "--out", str(tmp_path / "a.csv"), "--svg", str(svg)]) == 0
    assert svg.read_bytes() == first


def test_certify_examples(tmp_path):
    res = run("certify", "--model", "sigma_c", "--p", "1", "--gamma", "25")
    assert res.returncode == 0 and "P = -0.1" in res.stdout
    res = run("certify", "--model", "sigma_c", "--p", "0", "--gamma", "25")
    assert res.returncode == 3 and res.stdout == "" and res.stderr.strip()
    cert_file = tmp_path / "c.ini"
    res = run("certify", "--model", "opamp-linear", "--p", "0", "--gamma", "25", "--out", str(cert_file))
    assert res.returncode == 0
    assert load_certificate(cert_file).P[0, 0] == pytest.approx(15.9e-9, rel=1e-6)


def test_freqtest(tmp_path, capsys):
    assert main(["freqtest", "--model", "sigma_a", "--gamma", "0"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "p=0"
    out = tmp_path / "f.csv"
    assert main(["freqtest", "--model", "sigma_c", "--gamma", "25", "--out", str(out)]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "p=1"
    assert read_csv(out).shape == (4001, 2)
    assert main(["freqtest", "--model", "aggregate", "--gamma", "25"]) == 0
    assert capsys.readouterr().out.splitlines()[-1].startswith("FAIL min_re=")


def test_compose(tmp_path, capsys):
    assert main(["compose", "--p1", "0", "--p2", "1"]) == 0
    out = capsys.readouterr().out
    assert "dominant = true" in out and "p = 1" in out
    assert main(["compose", "--r2", "1"]) == 0
    assert "dominant = false" in capsys.readouterr().out
    c1, c2 = tmp_path / "a.ini", tmp_path / "c.ini"
    assert main(["certify", "--model", "opamp-linear", "--p", "0", "--gamma", "25", "--out", str(c1)]) == 0
    assert main(["certify", "--model", "sigma_c", "--p", "1", "--gamma", "25", "--out", str(c2)]) == 0
    capsys.readouterr()
    assert main(["compose", "--p2", "1", "--cert1", str(c1), "--cert2", str(c2)]) == 0
    assert "block-diagonal inertia {1,0,1}" in capsys.readouterr().out


def test_check_circuit(capsys):
    assert main(["check-circuit", "--model", "schmitt"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and all(line.endswith("-> true") for line in lines)
    assert main(["check-circuit", "--model", "schmitt", "--param", "C1=1e-6"]) == 0
    assert "2000 < 62.8931 -> false" in capsys.readouterr().out
    assert main(["check-circuit", "--model", "oscillator", "--gamma", "25"]) == 0
    out = capsys.readouterr().out
    assert "2-passive rate band" in out and "20 < 25 < 62.8931 -> true" in out


def test_sweep(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--model", "schmitt", "--name", "R1", "--values", "1000,3000",
                 "--x0", "2,2", "--t-end", "1", "--workers", "2", "--out", str(out)]) == 0
    data = read_csv(out)
    # x1 settles at R1/(R1+R2) * 12
    assert data[:, 2] == pytest.approx([6.0, 9.0], rel=1e-3)


@pytest.mark.parametrize("args, code", [
    (["simulate", "--model", "nope", "--x0", "1", "--t-end", "1"], 1),
    (["simulate", "--model", "opamp", "--x0", "1,2", "--t-end", "1"], 1),
    (["simulate", "--model", "opamp", "--x0", "a", "--t-end", "1"], 1),
    (["simulate", "--model", "opamp", "--x0", "20", "--t-end", "1"], 1),
    (["simulate", "--model", "opamp", "--x0", "1", "--t-end", "-1"], 1),
    (["simulate", "--model", "opamp", "--ve", "-1e-3", "--x0", "-1", "--t-end", "-.5"], 1),
    (["simulate", "--model", "schmitt", "--x0", "1,1", "--t-end", "1", "--h", "1e-3"], 1),
    (["simulate", "--model", "opamp", "--x0", "1", "--t-end", "1", "--param", "Zz=3"], 1),
    (["simulate", "--model", "opamp", "--x0", "1", "--t-end", "1", "--param", "Ra"], 1),
    (["simulate", "--model", "sigma_c", "--x0", "1", "--t-end", "1"], 1),
    (["simulate", "--model", "opamp"], 1),
    (["certify", "--model", "sigma_c", "--p", "5", "--gamma", "25"], 1),
    (["freqtest", "--model", "sigma_c", "--gamma", "20"], 1),
    (["compose", "--q1", "1,2"], 1),
    (["check-circuit", "--model", "opamp"], 1),
    (["bogus"], 1),
])
def test_bad_input_exit_codes(args, code, capsys):
    assert main(args) == code
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err.strip()


def test_solver_failure_exit_code(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[linear]\nA = -1\nB = 1\nC = 1\nD = -1\n[relation]\nkind = complementarity\n"
                   "[input]\nv = -100\n")
    res = run("simulate", "--model", str(cfg), "--x0", "1", "--t-end", "1", "--h", "1e-3")
    assert res.returncode == 2
    assert "step" in res.stderr and len(res.stderr.strip().splitlines()) == 1


def test_bad_config_file_exit_code(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[linear]\nA = -1 2\n")
    res = run("certify", "--model", str(cfg), "--p", "0", "--gamma", "1")
    assert res.returncode == 1
    assert len(res.stderr.strip().splitlines()) == 1
