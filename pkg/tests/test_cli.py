import json

import pytest

from gatx.cli import main
from gatx.jsonio import SCHEMA_VERSION, load_instance, strip_timing


@pytest.fixture
def toy(tmp_path):
    path = tmp_path / "toy.json"
    assert main(["generate", "--toy", "--out", str(path)]) == 0
    return path


def test_solve_writes_a_versioned_report(toy, tmp_path):
    out = tmp_path / "r.json"
    diag = tmp_path / "d.jsonl"
    assert main(["solve", str(toy), "--algo", "gat", "--iters", "1", "--out", str(out),
                 "--diagnostics", str(diag)]) == 0
    rep = json.loads(out.read_text())
    assert rep["schema_version"] == SCHEMA_VERSION and rep["valid"]
    assert rep["welfare"] > 0
    assert all(l["final"] >= l["init"] for l in rep["lsps"])
    assert len(diag.read_text().splitlines()) == 1


def test_oph_on_toy_gains_nothing(toy, tmp_path):
    out = tmp_path / "r.json"
    assert main(["solve", str(toy), "--algo", "oph", "--iters", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["welfare"] == 0.0


def test_zero_iterations_is_a_usage_error(toy):
    with pytest.raises(SystemExit) as exc:
        main(["solve", str(toy), "--iters", "0"])
    assert exc.value.code == 2


def test_missing_instance(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "none.json")]) == 2
    assert "error" in capsys.readouterr().err


def test_repeat_runs_match_apart_from_timing(tmp_path):
    inst = tmp_path / "m.json"
    main(["generate", "--mock", "2", "--out", str(inst)])
    docs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["solve", str(inst), "--iters", "2", "--seed", "3", "--out", str(out)]) == 0
        docs.append(strip_timing(json.loads(out.read_text())))
    assert docs[0] == docs[1]


def test_compare_table(toy, tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["compare", str(toy), "--iters", "1", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "instance,OPH Soc. Welf.,OPH Time(s),GAT Soc. Welf.,GAT Time(s)"
    row = lines[1].split(",")
    assert row[1] == "0.00%" and row[3] == "81.07%"


def test_generate_from_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kind": "mock", "seed": 1, "orders": 12}))
    out = tmp_path / "i.json"
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(load_instance(out).orders) == 12
    cfg.write_text(json.dumps({"file_a": "LC1_2_2", "file_b": "LC1_2_6", "offset": [42, -42]}))
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
    assert load_instance(out).name == "LC1_2_2+LC1_2_6(42,-42)"
    assert main(["generate", "--merge", "12", "--out", str(out)]) == 2
