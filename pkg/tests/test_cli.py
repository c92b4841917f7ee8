import os
import subprocess
import sys

import numpy as np
import pytest

from qmatfun import cli
from qmatfun.matcore import read_matrix, write_matrix
from qmatfun.validation import fixture_dir

FIX = fixture_dir()
RHO = os.path.join(FIX, "commuting_rho.mat")
SIGMA = os.path.join(FIX, "commuting_sigma.mat")
GA = os.path.join(FIX, "geometric_A.mat")
GB = os.path.join(FIX, "geometric_B.mat")


def _kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and " " not in line.split("=", 1)[0])


@pytest.mark.parametrize("route", ["1", "2"])
def test_divergence_fixture(capsys, route):
    code = cli.main(["divergence", "--rho", RHO, "--sigma", SIGMA, "--route", route])
    kv = _kv(capsys.readouterr().out)
    assert code == cli.EXIT_OK
    assert abs(float(kv["estimate"]) - 0.1308120) <= 1e-3


def test_route2_explain_shows_resolvent_sum(capsys):
    code = cli.main(["divergence", "--rho", RHO, "--sigma", SIGMA, "--route", "2", "--explain"])
    assert code == 0
    assert "resolvent_sum" in capsys.readouterr().out


def test_general_route_chi_square(capsys):
    code = cli.main(["divergence", "--f", "chi_square", "--route", "general",
                     "--rho", RHO, "--sigma", SIGMA])
    kv = _kv(capsys.readouterr().out)
    assert code == 0 and float(kv["oracle"]) == pytest.approx(0.25)


def test_kv_byte_identical_with_seed(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.kv"
        code = cli.main(["divergence", "--rho", RHO, "--sigma", SIGMA, "--noise",
                         "--seed", "17", "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "17")
    a = tmp_path / "env.kv"
    cli.main(["divergence", "--rho", RHO, "--sigma", SIGMA, "--noise", "--out", str(a)])
    b = tmp_path / "flag.kv"
    cli.main(["divergence", "--rho", RHO, "--sigma", SIGMA, "--noise", "--seed", "17",
              "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_capability_exit_code(capsys):
    code = cli.main(["divergence", "--f", "chi_square", "--route", "1",
                     "--rho", RHO, "--sigma", SIGMA])
    assert code == cli.EXIT_CAPABILITY


def test_io_exit_code(tmp_path):
    code = cli.main(["divergence", "--rho", str(tmp_path / "missing.mat"), "--sigma", SIGMA])
    assert code == cli.EXIT_IO


def test_invalid_input_exit_code(tmp_path):
    bad = tmp_path / "bad.mat"
    write_matrix(bad, np.array([[0.5, 0.3], [0.0, 0.5]]))
    assert cli.main(["divergence", "--rho", str(bad), "--sigma", SIGMA]) == cli.EXIT_INPUT


def test_window_exit_code(tmp_path):
    A = tmp_path / "A.mat"
    write_matrix(A, np.diag([1.0, 0.05]))
    code = cli.main(["mean", "--A", str(A), "--B", str(A), "--method", "stieltjes",
                     "--delta", "0.1"])
    assert code == cli.EXIT_WINDOW


def test_usage_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["divergence", "--route", "7", "--rho", RHO, "--sigma", SIGMA])
    assert exc.value.code == cli.EXIT_USAGE


@pytest.mark.parametrize("method", ["oracle", "harmonic-mixture", "stieltjes"])
def test_mean_writes_matrix(tmp_path, capsys, method):
    out = tmp_path / "G.mat"
    code = cli.main(["mean", "--A", GA, "--B", GB, "--method", method, "--delta", "0.2",
                     "--out", str(out)])
    assert code == 0
    assert np.allclose(read_matrix(out), 0.4 * np.eye(2), atol=1e-4)


@pytest.mark.parametrize("kind", ["log-poly", "log-resolvent", "kraus", "stieltjes", "mixture"])
def test_quadrature_kinds(capsys, kind):
    args = ["quadrature", kind]
    if kind in ("stieltjes", "mixture"):
        args += ["--f", "geometric"]
    assert cli.main(args) == 0
    assert capsys.readouterr().out


@pytest.mark.parametrize("which", ["divergence", "means", "all"])
def test_resources(capsys, which):
    assert cli.main(["resources", which]) == 0
    out = capsys.readouterr().out
    assert ("means.theorem=" in out) == (which != "divergence")


@pytest.mark.parametrize("suite", ["means", "fixtures"])
def test_validate_suites(capsys, suite):
    assert cli.main(["validate", "--suite", suite]) == 0
    assert f"suite.{suite}=pass" in capsys.readouterr().out


def test_validate_rejects_corrupted_fixtures(tmp_path, capsys):
    for name in ("commuting_rho", "commuting_sigma", "geometric_A", "geometric_B"):
        M = read_matrix(os.path.join(FIX, name + ".mat"))
        if name == "commuting_rho":
            M = np.diag([0.7, 0.25])
        write_matrix(tmp_path / f"{name}.mat", M)
    code = cli.main(["validate", "--suite", "fixtures", "--fixtures", str(tmp_path)])
    assert code != 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qmatfun.cli", "resources", "means"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "means.theorem=" in proc.stdout
