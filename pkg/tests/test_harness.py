import json

import numpy as np
import pytest

from qlinred.avgcase import generate_instance
from qlinred.harness import (
    BOGOLYUBOV_COLUMNS,
    CSV_COLUMNS,
    ExperimentSpec,
    _config,
    main,
    run,
    write_outputs,
)
from qlinred.reduction import run_reduction


def test_csv_columns():
    assert CSV_COLUMNS == ("instance_id", "n", "p", "alpha", "v", "seed", "success",
                           "queries_UM", "queries_ALG", "attempts", "mode")


def test_end_to_end_first_coordinate_adversary():
    rep = run(ExperimentSpec(kinds=("footnote-adversary",), ns=(3,), seeds=30, suppress_timestamp=True))
    assert rep.ok and len(rep.rows) == 8 * 30
    rates = {}
    for r in rep.rows:
        rates.setdefault(r["v"], []).append(r["success"])
    assert min(np.mean(s) for s in rates.values()) >= 0.9


def test_row_counts_match_a_direct_run():
    spec = ExperimentSpec(kinds=("coset",), ns=(3,), seeds=3, suppress_timestamp=True)
    rep = run(spec)
    inst = generate_instance("coset", 3, seed=0)
    for r in rep.rows[:8]:
        res = run_reduction(inst.planted(), r["v"], _config(spec, inst, r["seed"]))
        assert (r["queries_UM"], r["queries_ALG"], r["attempts"]) == (res.queries_UM, res.queries_ALG,
                                                                      res.attempts)


def test_determinism(tmp_path):
    a = ["run", "--kind", "random-profile", "--n", "3", "--seeds", "10", "--suppress-timestamp"]
    assert main(a + ["--out", str(tmp_path / "a")]) == 0
    assert main(a + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    first = (tmp_path / "a" / "results.csv").read_bytes()
    assert first == (tmp_path / "b" / "results.csv").read_bytes()
    assert first.startswith(b"instance_id,")


def test_timestamp_line(tmp_path):
    rep = run(ExperimentSpec(kinds=("footnote-adversary",), ns=(2,), seeds=2))
    csv_path, json_path = write_outputs(rep, tmp_path)
    assert csv_path.read_text().startswith("# generated ")
    assert json.loads(json_path.read_text())["ok"]


def test_empty_sweep(tmp_path):
    assert main(["run", "--n", "3", "--seeds", "0", "--out", str(tmp_path), "--suppress-timestamp"]) == 0
    assert (tmp_path / "results.csv").read_text().strip() == ",".join(CSV_COLUMNS)


def test_bogolyubov_suite():
    rep = run(ExperimentSpec(suite="bogolyubov", ns=(4, 5, 6), alphas=(0.75,), seeds=3))
    assert rep.columns == BOGOLYUBOV_COLUMNS and rep.ok
    assert all(r["min_probability"] >= r["alpha5"] for r in rep.rows)
    assert {r["n"] for r in rep.rows} == {4, 5, 6}


def test_shift_and_large_field_suites():
    assert run(ExperimentSpec(suite="shift", ns=(2,), seeds=20)).ok
    assert run(ExperimentSpec(suite="large-field", ns=(2,), p=11, alphas=(0.92,), seeds=5)).ok


def test_premise_violation_fails_the_run():
    rep = run(ExperimentSpec(kinds=("half-space",), ns=(3,), alphas=(0.9,), seeds=1))
    assert not rep.ok


def test_spec_errors():
    with pytest.raises(ValueError):
        ExperimentSpec(suite="nope")
    with pytest.raises(ValueError):
        ExperimentSpec(kinds=("nope",))
    with pytest.raises(FileNotFoundError):
        ExperimentSpec(instance_files=("/nonexistent.json",))
    assert main(["run", "--instance", "/nonexistent.json"]) == 2


def test_gen_and_run_from_file(tmp_path, capsys):
    path = tmp_path / "inst.json"
    assert main(["gen", "--kind", "coset", "--n", "3", "--coset", "[[0, 1], [1, 0]]", "--out", str(path)]) == 0
    d = json.loads(path.read_text())
    assert d["n"] == 3 and len(d["profile"]) == 8
    assert main(["run", "--instance", str(path), "--seeds", "5", "--alpha", "0.2"]) in (0, 1)
    assert main(["gen", "--kind", "coset", "--n", "3", "--coset", "[]"]) == 2
    capsys.readouterr()
    assert main(["gen", "--kind", "footnote-adversary", "--n", "4"]) == 0
    assert np.mean(json.loads(capsys.readouterr().out)["profile"]) == 0.5


def test_verify_command(capsys):
    assert main(["verify", "--M", "1,0;0,1", "--v", "1,0", "--b", "1,0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["accept_prob"] == 1.0 and out["truth"]
    main(["verify", "--M", "1,0;0,1", "--v", "1,0", "--b", "0,0"])
    assert json.loads(capsys.readouterr().out)["accept_prob"] <= 0.05


def test_qsvt_poly_command(capsys):
    assert main(["qsvt-poly", "--t", "0.5", "--width", "0.2", "--eps", "0.01"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] and out["parity"] == "even"


def test_fourier_command(capsys):
    assert main(["fourier", "--kind", "half-space", "--n", "3", "--tau", "0.5", "--gamma", "0.1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [c["vector"] for c in out["characters"]] == [[1, 0, 0]]
    assert out["density"] == 0.5
