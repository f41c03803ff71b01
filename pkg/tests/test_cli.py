import io
import math
import subprocess
import sys

import numpy as np
import pytest

from staticmd.cli import main
from staticmd.grids import (AxiPotentialGrid, PhysicalConstants, StaticFieldGrid, gauss_theta,
                            write_axipot, write_grid, write_samples)
from staticmd.spherical import read_radial


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    text = out.getvalue()
    report = dict(ln.split("=", 1) for ln in text.splitlines() if "=" in ln and not ln.startswith("#"))
    return code, report, text


def _axipot_file(path, A0=0.0, Aphi=0.0, r=None, e=1.0):
    r = np.geomspace(1.0, 10.0, 21) if r is None else r
    g = AxiPotentialGrid.from_functions(r, gauss_theta(16)[0], A0, Aphi, PhysicalConstants(1.0, e))
    write_axipot(path, g)
    return path


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    d = tmp_path_factory.mktemp("solve")
    code, rep, text = run("solve-spherical", "--m", 1, "--e", 1, "--out", d / "radial.csv",
                          "--csv", d / "q.csv")
    return code, rep, text, d


def test_solve_spherical_report(solved):
    code, rep, text, d = solved
    assert code == 0 and rep["verdict"] == "PASS"
    assert abs(float(rep["chi_tail_coeff"]) + 1) <= 0.01
    assert float(rep["chi_tail_tol"]) == pytest.approx(0.01)
    assert text.startswith("# solve-spherical backend=")
    sol = read_radial(d / "radial.csv")
    assert sol.constants == PhysicalConstants(1.0, 1.0)
    q = np.loadtxt(d / "q.csv", delimiter=",", skiprows=1)
    assert q.shape == (sol.r.size, 2)


def test_solve_spherical_scales_with_m(tmp_path):
    code, rep, _ = run("solve-spherical", "--m", 2, "--e", 1, "--out", tmp_path / "r.csv")
    assert code == 0 and float(rep["chi_tail_coeff"]) == pytest.approx(-0.5, abs=0.01)


def test_solve_spherical_deterministic(tmp_path):
    a = run("solve-spherical", "--m", 1, "--e", 0.5, "--out", tmp_path / "a.csv")[2]
    b = run("solve-spherical", "--m", 1, "--e", 0.5, "--out", tmp_path / "b.csv")[2]
    assert a.replace("a.csv", "") == b.replace("b.csv", "")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_usage_errors(tmp_path):
    assert run("solve-spherical", "--m", 1)[0] == 64
    assert run("solve-spherical", "--m", -1, "--e", 1)[0] == 64
    assert run("no-such-command")[0] == 64
    assert run()[0] == 64
    f = _axipot_file(tmp_path / "a.csv", Aphi=lambda r, t: 1 / (np.tan(t) * 2 * r))
    assert run("flux-magnetic", f, "--r", "1,-2")[0] == 64


def test_numerical_failure_exit_code(tmp_path):
    # inward integration blows up before reaching a tiny inner radius
    code = run("solve-spherical", "--m", 1, "--e", 1, "--r-inner", 1e-9,
               "--out", tmp_path / "r.csv")[0]
    assert code == 2
    # a fit window outside the solved range is a data error
    code = run("solve-spherical", "--m", 1, "--e", 1, "--r-outer", 50,
               "--out", tmp_path / "r.csv")[0]
    assert code == 65


def test_verify_neutrality(solved, tmp_path):
    d = solved[3]
    code, rep, _ = run("verify-neutrality", d / "radial.csv", "--csv", tmp_path / "q.csv")
    assert code == 0 and rep["neutrality"] == "PASS"
    assert (tmp_path / "q.csv").read_text().startswith("r,Q\n")
    wide = np.geomspace(1.0, 100.0, 41)
    code, rep, _ = run("verify-neutrality", _axipot_file(tmp_path / "c.csv", A0=lambda r, t: 1 / r,
                                                         r=wide))
    assert code == 1 and rep["neutrality"] == "FAIL"
    assert float(rep["Q_outer"]) == pytest.approx(-1, abs=1e-10)
    code, rep, _ = run("verify-neutrality", _axipot_file(tmp_path / "z.csv", A0=2.5))
    assert code == 0 and rep["neutrality"] == "PASS"


def test_data_errors(tmp_path):
    assert run("verify-neutrality", tmp_path / "missing.csv")[0] == 65
    bad = tmp_path / "bad.csv"
    bad.write_text("# staticmd-axipot v1, m=1.0, e=1.0\nr,theta,A0,Aphi\n1,0.5,oops,0\n")
    assert run("verify-neutrality", bad)[0] == 65
    assert run("flux-electric", bad)[0] == 65
    assert run("ledger", "--signs", "+,?")[0] == 65


def test_flux_commands(tmp_path):
    f = _axipot_file(tmp_path / "m.csv", A0=lambda r, t: 1 / r,
                     Aphi=lambda r, t: 1 / (np.tan(t) * 2 * r))
    code, rep, _ = run("flux-magnetic", f)
    assert code == 0 and float(rep["magnetic_b"]) == -0.5 and rep["quantization_verdict"] == "PASS"
    code, rep, _ = run("flux-electric", f, "--r", 3.0)
    assert code == 0 and float(rep["electric_Q"]) == pytest.approx(-1, abs=1e-10)
    assert float(rep["physical_charge"]) == pytest.approx(1, abs=1e-10)
    assert rep["ledger_total"] == "na"
    code, _, text = run("flux-magnetic", f, "--r", "2,3,4", "--csv", tmp_path / "b.csv")
    assert text.count("magnetic_b=-0.5") == 3
    b = np.loadtxt(tmp_path / "b.csv", delimiter=",", skiprows=1)
    assert np.allclose(b[:, 1], -0.5, atol=1e-12)


def test_flux_magnetic_from_spinor_grid(tmp_path):
    r = np.geomspace(1.0, 10.0, 21)
    g = StaticFieldGrid.from_functions(r, gauss_theta(16)[0], lambda r, t: r**-2.0,
                                       lambda r, t: t, math.pi, constants=PhysicalConstants(1.0, 2.0))
    write_grid(tmp_path / "g.csv", g)
    code, rep, _ = run("flux-magnetic", tmp_path / "g.csv")
    assert code == 0 and float(rep["magnetic_b"]) == pytest.approx(-0.25, abs=1e-10)
    code, rep, _ = run("check-reality", tmp_path / "g.csv")
    assert code == 0 and rep["reality"] == "PASS"


def test_threads_preserve_output(tmp_path, monkeypatch):
    f = _axipot_file(tmp_path / "m.csv", Aphi=lambda r, t: 1 / (np.tan(t) * 2 * r) + np.sin(t) / r)
    serial = run("flux-magnetic", f, "--r", "1.5,2,3,4,5,6")[2]
    monkeypatch.setenv("STATICMD_THREADS", "4")
    parallel = run("flux-magnetic", f, "--r", "1.5,2,3,4,5,6")[2]
    assert serial.replace("threads=1", "") == parallel.replace("threads=4", "")


def test_coulomb_command(tmp_path):
    f = _axipot_file(tmp_path / "c.csv", A0=lambda r, t: 5 / r + 3, r=np.geomspace(1e-3, 1, 41))
    code, rep, _ = run("coulomb-extract", f, "--rho", 1.0, "--csv", tmp_path / "fit.csv")
    assert code == 0 and float(rep["coulomb_q"]) == pytest.approx(5, rel=1e-10)
    f = _axipot_file(tmp_path / "u.csv", A0=lambda r, t: 1 / r + np.cos(t) / r**2,
                     r=np.geomspace(1e-3, 1, 41))
    assert run("coulomb-extract", f, "--rho", 1.0)[0] == 2


def test_ledger_command():
    code, rep, _ = run("ledger", "--signs", "+,+,-")
    assert code == 0 and rep["ledger_total"] == "-0.5" and rep["feasible"] == "true"
    code, rep, _ = run("ledger", "--signs", "+,+")
    assert code == 1 and rep["feasible"] == "false"
    code, rep, _ = run("ledger", "--signs", "+,-", "--e", 2)
    assert rep["ledger_total"] == "0"


def test_decay_fit_and_wnorm(tmp_path):
    r = np.geomspace(1, 100, 129)
    write_samples(tmp_path / "s.csv", r, r**-2.0)
    code, rep, _ = run("decay-fit", tmp_path / "s.csv", "--expect", -2)
    assert code == 0 and float(rep["delta_hat"]) == pytest.approx(-2, abs=1e-6)
    assert run("decay-fit", tmp_path / "s.csv", "--expect", -3)[0] == 1
    code, rep, _ = run("wnorm", tmp_path / "s.csv", "--p", 2, "--delta", -1.5)
    assert code == 0 and float(rep["norm"]) == pytest.approx(math.sqrt(4 * math.pi), rel=1e-6)
    code, rep, _ = run("wnorm", tmp_path / "s.csv", "--k", 1, "--p", "inf", "--delta", -1)
    assert code == 0 and float(rep["norm"]) == pytest.approx(3, rel=1e-2)
    write_samples(tmp_path / "z.csv", r, 0 * r)
    assert run("decay-fit", tmp_path / "z.csv")[0] == 2


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "staticmd.cli", "ledger", "--signs", "+,+,-"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "ledger_total=-0.5" in out.stdout
    out = subprocess.run([sys.executable, "-m", "staticmd.cli", "solve-spherical"],
                         capture_output=True, text=True)
    assert out.returncode == 64
