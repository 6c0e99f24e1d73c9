import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from radial_nls.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--n", "1", "--q", "4", "--b", "5")
    assert code == 0
    d = json.loads(out)
    assert d["regime"] == "MultipleKnown"
    assert d["k_b"] == pytest.approx(0.5176381, abs=1e-7)
    code, out, _ = run(capsys, "classify", "--n", "3", "--q", "2", "--b", "2")
    assert json.loads(out)["regime"] == "UniqueSymmetric_Thm1"


def test_classify_is_reproducible(capsys):
    a = run(capsys, "classify", "--n", "1", "--q", "2.5", "--b", "0.7", "--seed", "4")[1]
    b = run(capsys, "classify", "--n", "1", "--q", "2.5", "--b", "0.7", "--seed", "4")[1]
    assert a == b


def test_exit_codes(capsys):
    assert run(capsys, "classify", "--n", "1", "--q", "0.5", "--b", "1")[0] == 1
    assert run(capsys, "nonsense")[0] == 1
    assert run(capsys, "classify", "--n", "1")[0] == 1
    code, _, err = run(capsys, "construct", "theta", "--n", "1", "--q", "2", "--b", "2", "--theta", "0.3")
    assert code == 1 and "rotation family" in err


def test_ground_state_files(capsys, tmp_path):
    out_csv = tmp_path / "gs.csv"
    code, out, _ = run(capsys, "ground-state", "--n", "1", "--q", "2", "--out", str(out_csv))
    assert code == 0
    d = json.loads(out)
    assert d["height"] == pytest.approx(np.sqrt(2), abs=1e-8)
    side = json.loads((tmp_path / "gs.json").read_text())
    assert side["n"] == 1 and side["q"] == 2.0


def test_construct_and_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "construct", "triple", "--n", "1", "--q", "4", "--b", "5", "--out-dir", str(tmp_path))
    assert code == 0
    d = json.loads(out)
    assert len(d["profiles"]) == 3 and max(p["residual"] for p in d["profiles"]) < 1e-6
    prof = str(tmp_path / "asymmetric.csv")
    common = ["--profile", prof, "--n", "1", "--q", "4", "--b", "5"]
    code, out, _ = run(capsys, "verify", "decay", *common)
    assert code == 0 and json.loads(out)["pass"]
    code, out, _ = run(capsys, "verify", "wronskian", *common)
    assert json.loads(out)["wronskian_defect"] < 1e-6
    code, out, _ = run(capsys, "verify", "energy", *common)
    assert json.loads(out)["energy_defect"] < 1e-5


def test_verify_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "verify", "decay", "--profile", str(tmp_path / "none.csv"), "--n", "1", "--q", "2", "--b", "1")
    assert code == 1 and err


def test_census_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "census", "--n", "1", "--q", "2", "--b", "2", "--grid", "64", "64",
                       "--out-json", str(tmp_path / "c.json"), "--out-basin", str(tmp_path / "b.csv"))
    assert code == 0
    assert json.loads(out)["count"] == 1
    assert np.loadtxt(tmp_path / "b.csv", delimiter=",").shape == (64, 64)
    assert json.loads((tmp_path / "c.json").read_text())["count"] == 1
    assert run(capsys, "census", "--n", "1", "--q", "2", "--b", "2", "--workers", "0")[0] == 1


def test_sweep(capsys, tmp_path):
    out_csv = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--n", "1", "--q-range", "1.5", "2.5", "0.5", "--b-range", "0.5", "5", "2",
                     "--grid", "32", "--out", str(out_csv))
    assert code == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 6
    by = {(float(r["q"]), round(float(r["b"]), 6)): r for r in rows}
    assert by[(2.5, 5.0)]["regime"] == "MultipleKnown" and by[(2.5, 5.0)]["census_count"] == "3"
    assert by[(2.0, 5.0)]["census_count"] == "1"


def test_mazhao(capsys, tmp_path):
    pj = tmp_path / "p.json"
    pj.write_text(json.dumps({"mu1": -1, "mu2": -1, "beta1": 2, "beta2": 2, "q": 2}))
    code, out, _ = run(capsys, "mazhao", "ratio", "--params", str(pj))
    assert code == 0 and json.loads(out)["ratio"] == 1.0
    pj.write_text(json.dumps({"mu1": -1, "mu2": -2, "beta1": 4, "beta2": 2, "q": 2}))
    code, out, _ = run(capsys, "mazhao", "beta", "--params", str(pj))
    assert json.loads(out)["beta"] == pytest.approx(2.0)
    pj.write_text(json.dumps({"mu1": -1, "mu2": -2, "beta1": 4, "beta2": 4, "q": 2}))
    assert run(capsys, "mazhao", "beta", "--params", str(pj))[0] == 1


def test_help_documents_defaults():
    for sub in ("classify", "ground-state", "construct", "census", "verify", "sweep", "mazhao"):
        r = subprocess.run([sys.executable, "-m", "radial_nls", sub, "--help"], capture_output=True, text=True)
        assert r.returncode == 0
        if sub in ("ground-state", "census", "sweep"):
            assert "default" in r.stdout
