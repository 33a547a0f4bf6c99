import json
import subprocess
import sys

import pytest

from gammacomb import cli
from gammacomb.errors import DivergenceError
from gammacomb.scenario import load_scenario


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_predict_fe57(capsys):
    code, out, _ = _run(capsys, "predict", "--preset", "fe57", "--delta-v", "3.075")
    d = json.loads(out)
    assert code == 0
    assert d["T0_ns"] == pytest.approx(28.0, abs=0.01)
    assert d["finesse"] == pytest.approx(32.4, abs=0.1)
    assert d["echo_times_ns"][:2] == pytest.approx([28.0, 56.0], abs=0.01)


def test_predict_full(capsys):
    code, out, _ = _run(capsys, "predict", "--delta-v", "3.075", "--m", "5", "--zeta0", "41.3",
                        "--delta-t", "7", "--equal-split")
    d = json.loads(out)
    assert d["eta_gfc_first_echo"] == pytest.approx(0.4461, abs=1e-3)
    assert d["total_zeta"] == pytest.approx(206.5)
    assert d["conditions"]["feasible"] is True
    assert d["equal_split_zeta_eff0"] == pytest.approx(0.7013, abs=1e-3)


def test_predict_sgem(capsys):
    code, out, _ = _run(capsys, "predict", "--fixed-bandwidth", "--m", "31", "--delta-t", "7",
                        "--zeta0", "6.67", "--sgem", "--t-sw", "21")
    d = json.loads(out)
    assert d["eta_sgem_bound"] == pytest.approx(0.630, abs=1e-3)
    assert d["sgem_window_ok"] is True
    assert d["echo_times_ns"][0] == pytest.approx(42.0)


def test_predict_finesse_only(capsys):
    code, out, _ = _run(capsys, "predict", "--finesse", "10", "--zeta-eff", "0.8716")
    d = json.loads(out)
    assert d["eta_gfc_first_echo"] == pytest.approx(0.2551, abs=1e-3)


def test_presets(capsys):
    code, out, _ = _run(capsys, "presets")
    names = [p["name"] for p in json.loads(out)]
    assert code == 0 and names == ["Fe57", "Zn67", "Sc45", "Ag109"]


def test_simulate_writes_outputs(capsys, tmp_path):
    code, out, _ = _run(capsys, "simulate", "fig2a", "-o", str(tmp_path), "--no-certify")
    d = json.loads(out)
    assert code == 0
    assert d["efficiency"] == pytest.approx(0.444, abs=1e-3)
    assert d["convergence_probe"] is None
    assert (tmp_path / "fig2a_manifest.json").exists()


def test_compare(capsys):
    code, out, _ = _run(capsys, "compare", "fig2a")
    d = json.loads(out)
    assert code == 0 and d["pass"] and d["relative_l2"] < 1e-3


def test_compare_rejects_modulated(capsys):
    code, out, err = _run(capsys, "--error-json", "compare", "fig3")
    assert code == 2
    assert json.loads(out)["error"] == "UnsupportedComparisonError"


def test_validation_exit_code(capsys, tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text('[transition]\npreset = "Fe57"\n[comb]\nm_targets = 4\nzeta0 = 1.0\n'
                 't0_ns = 30.0\n[[pulse.peaks]]\nfwhm_ns = 7.0\n')
    code, out, _ = _run(capsys, "--error-json", "simulate", str(p), "-o", str(tmp_path))
    d = json.loads(out)
    assert code == 2
    assert d == {"error": "ValidationError", "message": d["message"], "exit_code": 2,
                 "key": "comb.m_targets"}
    code, _, err = _run(capsys, "simulate", str(p), "-o", str(tmp_path))
    assert code == 2 and err.startswith("error: comb.m_targets")


def test_missing_file_exit_code(capsys):
    code, out, _ = _run(capsys, "--error-json", "simulate", "nowhere.toml")
    assert code == 2
    assert json.loads(out)["error"] == "FileNotFoundError"


def test_divergence_exit_code(capsys, monkeypatch, tmp_path):
    def boom(*a, **k):
        raise DivergenceError("non-finite field at step 7", 7)
    monkeypatch.setattr("gammacomb.scenario.simulate", boom)
    code, out, _ = _run(capsys, "--error-json", "simulate", "fig2a", "-o", str(tmp_path))
    assert code == 3
    assert json.loads(out)["step"] == 7


def test_budget_exit_code(capsys, tmp_path):
    code, out, _ = _run(capsys, "--error-json", "sweep", "fig2b-sweep", "--max-points", "10",
                        "-o", str(tmp_path / "x.csv"))
    d = json.loads(out)
    assert code == 4
    assert d["error"] == "BudgetError" and "estimated" in d["message"]


def test_compare_solvers_api():
    assert cli.compare_solvers(load_scenario("fig4a")) < 1e-3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gammacomb", "presets"], capture_output=True,
                         text=True, check=True)
    assert "Fe57" in res.stdout
