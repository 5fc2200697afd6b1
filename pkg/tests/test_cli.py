import json
import subprocess
import sys

import numpy as np
import pytest

from tvsreg.cli import compare, main
from tvsreg.io import read_data_csv

PAPER_TRUE = [2, 1, 2, 0, 2, 3, 1, 0, 2, 4, 1, 2, 3, 2, 1, 0, 0, 1, 1, 0]
PAPER_EST = [2, 1, 2, 0, 2, 3, 1, 1, 2, 4, 1, 2, 3, 2, 1, 0, 0, 1, 1, 0]

FAST_FIT = {"population_size": 20, "max_generations": 25, "seed": 0}


def write(path, obj):
    path.write_text(json.dumps(obj))
    return path


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    write(d / "sim.json", {"n": 400, "k": 20, "beta": 2.0, "intercept": 6.5,
                           "sigma_eps": 0.2, "lambda": 2.0, "min_gap": 10, "seed": 4})
    write(d / "fit.json", FAST_FIT)
    assert main(["simulate", "--config", str(d / "sim.json"), "--out", str(d / "sim")]) == 0
    assert main(["fit", "--data", str(d / "sim" / "data.csv"), "--config", str(d / "fit.json"),
                 "--out", str(d / "fit")]) == 0
    return d


def test_simulate_outputs(workdir):
    data = read_data_csv(workdir / "sim" / "data.csv")
    assert data["x"].size == 400
    assert np.count_nonzero(data["x"]) == 20
    truth = json.loads((workdir / "sim" / "truth.json").read_text())
    assert len(truth["shifts"]) == 20 and truth["params"]["beta"] == 2.0
    manifest = json.loads((workdir / "sim" / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["config"]["rng_seed"] == 4
    for f in manifest["files"]:
        assert (workdir / "sim" / f.split("/")[-1]).exists()


def test_simulate_byte_identical(workdir, tmp_path):
    main(["simulate", "--config", str(workdir / "sim.json"), "--out", str(tmp_path / "again")])
    assert ((tmp_path / "again" / "data.csv").read_bytes()
            == (workdir / "sim" / "data.csv").read_bytes())


def test_seed_flag_overrides(workdir, tmp_path):
    main(["simulate", "--config", str(workdir / "sim.json"), "--out", str(tmp_path / "s7"),
          "--seed", "7"])
    assert ((tmp_path / "s7" / "data.csv").read_bytes()
            != (workdir / "sim" / "data.csv").read_bytes())


def test_fit_outputs(workdir):
    result = json.loads((workdir / "fit" / "result.json").read_text())
    assert set(result["tvs"]) == {"beta", "intercept", "sigma_eps", "lambda_tau"}
    assert [row["parameter"] for row in result["table"]] == [
        "beta", "intercept", "lambda_tau", "sigma_eps"]
    assert abs(result["tvs"]["beta"] - 2.0) < 0.4
    assert result["ols"]["beta"] < 1.0
    assert len(result["shifts"]) == 20

    trace = np.loadtxt(workdir / "fit" / "trace.csv", delimiter=",", skiprows=1)
    assert np.all(np.diff(trace[:, 1]) >= 0)

    res = np.loadtxt(workdir / "fit" / "residuals.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(res[:, 1] - res[:, 2], res[:, 3], atol=1e-12)
    assert res[:, 3].std() == pytest.approx(result["tvs"]["sigma_eps"], rel=0.10)


def test_fit_result_byte_identical(workdir, tmp_path):
    main(["fit", "--data", str(workdir / "sim" / "data.csv"), "--config",
          str(workdir / "fit.json"), "--out", str(tmp_path / "again")])
    assert ((tmp_path / "again" / "result.json").read_bytes()
            == (workdir / "fit" / "result.json").read_bytes())


def test_json_round_trip(workdir):
    for p in [workdir / "fit" / "result.json", workdir / "sim" / "truth.json"]:
        obj = json.loads(p.read_text())
        again = json.loads(json.dumps(obj))
        assert again == obj
        assert json.dumps(again, indent=2) + "\n" == p.read_text()


def test_compare_command(workdir, capsys):
    out = workdir / "cmp"
    assert main(["compare", "--result", str(workdir / "fit" / "result.json"),
                 "--truth", str(workdir / "sim" / "truth.json"), "--out", str(out)]) == 0
    rep = json.loads((out / "compare.json").read_text())
    assert 0.0 <= rep["shift_recovery_rate"] <= 1.0
    assert "beta_error_ratio" in rep
    assert "shift recovery" in capsys.readouterr().out


def _result(beta, shifts, ols_beta=0.5):
    return {"tvs": {"beta": beta, "intercept": 6.53, "sigma_eps": 0.2, "lambda_tau": 1.54},
            "ols": {"beta": ols_beta, "intercept": 6.62, "sigma": 1.03, "r_squared": 0.1},
            "shifts": shifts}


TRUTH = {"params": {"beta": 2.0, "intercept": 6.5, "sigma_eps": 0.2, "lambda_tau": 2.0},
         "realized_shift_mean": 1.4, "shifts": PAPER_TRUE}


def test_compare_paper_vectors():
    rep = compare(_result(2.09, PAPER_EST), TRUTH)
    assert rep["shift_recovery_rate"] == pytest.approx(0.95)
    assert rep["shift_mismatches"] == [7]
    assert rep["beta_error_ratio"] == pytest.approx(0.06)
    assert rep["errors"]["lambda_tau"] == pytest.approx(0.14)


def test_compare_identical():
    res = _result(2.0, PAPER_TRUE)
    res["tvs"].update(intercept=6.5, lambda_tau=1.4)
    rep = compare(res, TRUTH)
    assert rep["shift_recovery_rate"] == 1.0
    assert all(v == pytest.approx(0.0, abs=1e-12) for v in rep["errors"].values())


def test_compare_mismatched_k(tmp_path, capsys):
    r = write(tmp_path / "r.json", _result(2.0, PAPER_TRUE[:5]))
    t = write(tmp_path / "t.json", TRUTH)
    assert main(["compare", "--result", str(r), "--truth", str(t), "--out", str(tmp_path / "o")]) == 1
    assert "impulse counts differ" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_fit_refuses_empty_support(tmp_path, capsys):
    write(tmp_path / "sim.json", {"n": 50, "k": 0, "seed": 1})
    write(tmp_path / "fit.json", {})
    assert main(["simulate", "--config", str(tmp_path / "sim.json"), "--out", str(tmp_path / "s")]) == 0
    data = read_data_csv(tmp_path / "s" / "data.csv")
    assert not np.any(data["x"])
    assert main(["fit", "--data", str(tmp_path / "s" / "data.csv"), "--config",
                 str(tmp_path / "fit.json"), "--out", str(tmp_path / "f")]) == 1
    assert "no nonzero" in capsys.readouterr().err
    assert not (tmp_path / "f").exists()
    assert not any(p.name.startswith(".tvs-") for p in tmp_path.iterdir())


def test_malformed_csv_names_row(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("t,x,y\n0,0,1\n1,abc,2\n")
    write(tmp_path / "fit.json", {})
    assert main(["fit", "--data", str(tmp_path / "bad.csv"), "--config",
                 str(tmp_path / "fit.json"), "--out", str(tmp_path / "f")]) == 1
    assert "row 3" in capsys.readouterr().err


@pytest.mark.parametrize("text,needle", [
    ("a,b,c\n0,0,1\n", "header"),
    ("t,x,y\n0,0,1\n2,0,1\n", "expected t=1"),
    ("t,x,y\n0,0\n", "expected 3 fields"),
    ("t,x,y\n", "no data rows"),
])
def test_csv_errors(tmp_path, text, needle):
    from tvsreg.io import DataFormatError

    (tmp_path / "d.csv").write_text(text)
    with pytest.raises(DataFormatError, match=needle):
        read_data_csv(tmp_path / "d.csv")


@pytest.mark.filterwarnings("ignore::tvsreg.model.SparsityWarning")
def test_constant_y(tmp_path, capsys):
    (tmp_path / "c.csv").write_text("t,x,y\n0,0,1\n1,1,1\n2,0,1\n")
    write(tmp_path / "fit.json", {})
    assert main(["fit", "--data", str(tmp_path / "c.csv"), "--config",
                 str(tmp_path / "fit.json"), "--out", str(tmp_path / "f")]) == 1
    assert "constant" in capsys.readouterr().err


def test_invalid_config(tmp_path, capsys):
    write(tmp_path / "sim.json", {"n": 10, "k": 5, "min_gap": 3})
    assert main(["simulate", "--config", str(tmp_path / "sim.json"), "--out", str(tmp_path / "s")]) == 1
    assert "cannot place" in capsys.readouterr().err
    write(tmp_path / "fit.json", {"population": 3})
    (tmp_path / "d.csv").write_text("t,x,y\n0,0,1\n1,1,2\n2,0,1\n")
    assert main(["fit", "--data", str(tmp_path / "d.csv"), "--config",
                 str(tmp_path / "fit.json"), "--out", str(tmp_path / "f")]) == 1
    assert "unknown fit config" in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    write(tmp_path / "sim.json", {"n": 50, "k": 2, "seed": 1})
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["simulate", "--config", str(tmp_path / "sim.json"),
                 "--out", str(blocker / "sub")]) == 1
    assert "error" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "tvsreg.cli", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "simulate" in out.stdout and "compare" in out.stdout
