import csv
import json

import pytest

from heraldshape.cli import OUTCOME_COLUMNS, SWEEP_COLUMNS, main
from heraldshape.fixtures import fixture_path


def write(tmp_path, payload, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return p


MINIMAL = {"dims": [2], "target_shape": [[1, 0], [1, 0]]}


def test_run_minimal(tmp_path, capsys):
    assert main(["run", str(write(tmp_path, MINIMAL))]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["per_outcome"][0]["fidelity"] == pytest.approx(1, abs=1e-12)
    assert report["montecarlo"] is None


def test_run_two_dof_fixture(capsys):
    assert main(["run", str(fixture_path("two_dof_slits.json"))]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["per_outcome"][0]["fidelity"] >= 1 - 1e-12


def test_run_out_and_csv(tmp_path, capsys):
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    assert main(["run", str(write(tmp_path, MINIMAL)), "--out", str(out), "--csv", str(table),
                 "--trials", "1000", "--seed", "4"]) == 0
    assert capsys.readouterr().out == ""
    report = json.loads(out.read_text())
    assert report["montecarlo"]["trials"] == 1000
    rows = list(csv.reader(table.open()))
    assert tuple(rows[0]) == OUTCOME_COLUMNS
    assert len(rows) == 3


def test_parse_error_exit_2(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["run", str(write(tmp_path, {**MINIMAL, "bogus": 1})), "--out", str(out)])
    assert code == 2
    assert "bogus" in capsys.readouterr().err
    assert not out.exists()


def test_missing_file_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.json")]) == 2


def test_physics_error_exit_3(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["run", str(write(tmp_path, {"dims": [2], "target_shape": [[0, 0], [0, 0]]})),
                 "--out", str(out)])
    assert code == 3
    assert "null shape" in capsys.readouterr().err
    assert not out.exists()


def test_sweep_eta(tmp_path, capsys):
    path = write(tmp_path, {"dims": [3], "target_shape": [[1, 0], [0.5, 0.2], [0.1, 0]]})
    table = tmp_path / "sweep.csv"
    assert main(["sweep", str(path), "--param", "eta", "--values", "0.1,0.5,1.0", "--csv", str(table)]) == 0
    reports = json.loads(capsys.readouterr().out)
    assert len(reports) == 3
    fids = [r["totals"]["fidelity"] for r in reports]
    rates = [r["totals"]["total_herald_rate"] for r in reports]
    assert max(fids) - min(fids) <= 1e-12
    for eta, rate in zip((0.1, 0.5, 1.0), rates):
        assert rate == pytest.approx(eta * rates[-1], abs=1e-12)
    rows = list(csv.DictReader(table.open()))
    assert tuple(rows[0].keys()) == SWEEP_COLUMNS
    assert [float(r["value"]) for r in rows] == [0.1, 0.5, 1.0]


def test_sweep_p(tmp_path, capsys):
    path = write(tmp_path, {"dims": [3], "target_shape": [[1, 0], [0.5, 0.2], [0.1, 0]],
                            "source": {"kind": "werner", "p": 1.0}})
    assert main(["sweep", str(path), "--param", "p", "--values", "0", "0.5", "1"]) == 0
    purities = [r["totals"]["purity"] for r in json.loads(capsys.readouterr().out)]
    assert purities == sorted(purities)


def test_sweep_empty(tmp_path, capsys):
    assert main(["sweep", str(write(tmp_path, MINIMAL)), "--param", "eta", "--values"]) == 0
    assert json.loads(capsys.readouterr().out) == []


def test_sweep_p_needs_werner(tmp_path):
    assert main(["sweep", str(write(tmp_path, MINIMAL)), "--param", "p", "--values", "0.5"]) == 2


def test_verify_all_pass(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_verify_filter(capsys):
    assert main(["verify", "--filter", "loss"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert lines and all("loss-independence" in l for l in lines)


def test_verify_deterministic(capsys):
    main(["verify", "--seed", "7"])
    first = capsys.readouterr().out
    main(["verify", "--seed", "7"])
    assert capsys.readouterr().out == first


def test_verify_unknown_filter(capsys):
    assert main(["verify", "--filter", "no-such-check"]) == 1
