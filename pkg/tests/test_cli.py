import csv
import json


from hives.cli import (
    GRADCHECK_HEADER,
    PROBABILITY_HEADER,
    dispatch,
    lrc_main,
    parse_dims,
    parse_range,
    thread_cap,
)

W506 = ["--mu", "40,30,20,10", "--nu", "40,30,20,10", "--lambda", "65,55,45,35"]


def run(capsys, argv):
    code = dispatch(argv)
    out = capsys.readouterr().out.strip()
    return code, (json.loads(out) if out else None)


def test_lrc_exact_506(capsys):
    code, out = run(capsys, ["lrc", "exact", *W506])
    assert code == 0 and out["count"] == 506 and "elapsed" in out


def test_lrc_shortcut(capsys):
    assert lrc_main(["exact", "--mu", "2,1,0", "--nu", "2,1,0", "--lambda", "3,2,1"]) == 0
    assert json.loads(capsys.readouterr().out)["count"] == 2


def test_lrc_rounded_and_lattice_keys(capsys):
    code, out = run(capsys, ["lrc", "rounded", *W506, "--seed", "1"])
    assert code == 0 and {"estimate", "f", "vol_Q", "samples", "elapsed"} <= set(out)
    code, out = run(capsys, ["lrc", "lattice", *W506, "--seed", "1"])
    assert code == 0
    assert {"estimate", "xi_star", "levels", "ratios", "inner_count", "stalled_flag", "elapsed"} <= set(out)


def test_exit_codes(capsys):
    assert dispatch(["nonsense"]) == 2
    assert dispatch(["lrc", "exact", "--mu", "1,2", "--nu", "2,1", "--lambda", "3,3"]) == 2
    assert dispatch(["lrc", "exact", "--mu", "2,1,0"]) == 2
    assert dispatch(["lrc", "exact", "--mu", "2,1,0", "--nu", "2,1,0", "--lambda", "3,3,1"]) == 4
    assert dispatch(["lrc", "exact", *W506, "--cap", "10"]) == 3
    assert dispatch(["gen", "--dim", "x"]) == 2
    capsys.readouterr()


def test_config_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mu": "2,1,0", "nu": "2,1,0", "lambda": "3,2,1"}))
    code, out = run(capsys, ["lrc", "exact", *W506, "--config", str(cfg)])
    assert code == 0 and out["count"] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": 1}))
    assert dispatch(["lrc", "exact", *W506, "--config", str(bad)]) == 2


def test_record_replay(tmp_path, capsys):
    rec = tmp_path / "r.json"
    code, first = run(capsys, ["lrc", "rounded", *W506, "--seed", "5", "--record", str(rec)])
    data = json.loads(rec.read_text())
    assert data["config"]["seed"] == 5 and data["input_hash"].startswith("sha256:")
    assert data["outputs"]["estimate"] == first["estimate"]
    code, again = run(capsys, ["lrc", "rounded", "--config", str(rec)])
    assert code == 0 and again["estimate"] == first["estimate"]


def test_validate(tmp_path, capsys):
    code, out = run(capsys, ["validate", "--mu", "2,1,0", "--nu", "2,1,0", "--lambda", "3,2,1", "--interior", "6"])
    assert code == 0 and out["is_hive"] is False and out["deficiencies"]
    h = tmp_path / "h.json"
    h.write_text(json.dumps({"n": 3, "mu": [2, 1, 0], "nu": [2, 1, 0], "lambda": [3, 2, 1], "interior": [4]}))
    code, out = run(capsys, ["validate", "--hive", str(h)])
    assert out["is_hive"] is True


def test_gradcheck(tmp_path, capsys):
    path = tmp_path / "g.csv"
    code, out = run(capsys, ["gradcheck", "--dim", "5", "--trials", "4", "--csv", str(path)])
    assert code == 0 and out["all_in_band"]
    rows = list(csv.reader(path.open()))
    assert rows[0] == GRADCHECK_HEADER and len(rows) == 5


def test_probability_csv(tmp_path, capsys):
    path = tmp_path / "p.csv"
    code, out = run(capsys, ["probability", "--ensemble", "SID", "--dim", "3..4", "--range", "1:50",
                             "--trials", "3", "--csv", str(path)])
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == PROBABILITY_HEADER
    assert [r[2] for r in rows[1:]] == ["3", "4"]
    assert all(len(r["seeds"]) == 3 for r in out["results"])


def test_gen_writes_diagnostics(tmp_path, capsys):
    out_path = tmp_path / "results.json"
    code, out = run(capsys, ["gen", "--ensemble", "GOE", "--dim", "3", "--pairing", "independent",
                             "--trials", "2", "--out", str(out_path)])
    assert code == 0 and out["trials"] == 2
    saved = json.loads(out_path.read_text())
    assert {"n", "mu", "nu", "lambda", "interior", "seed", "is_hive"} <= set(saved["hives"][0])
    lines = (tmp_path / "results.diagnostics.jsonl").read_text().strip().splitlines()
    rec = json.loads(lines[0])
    assert {"iterations", "grad_norm", "value", "seed"} <= set(rec)


def test_stats_csv(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, out = run(capsys, ["stats", "--ensemble", "GOE", "--dim", "4", "--pairing", "identical",
                             "--samples", "3", "--csv", str(path)])
    assert code == 0 and out["hives"] == 3
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["j", "k", "x", "y", "height", "K", "H"] and len(rows) == 16


def test_helpers(monkeypatch):
    assert parse_range("1:50") == (1, 50)
    assert parse_dims("4..6") == [4, 5, 6]
    assert parse_dims("4,8") == [4, 8]
    monkeypatch.setenv("HIVE_THREADS", "2")
    assert thread_cap(8) == 2 and thread_cap(None) == 2
    monkeypatch.delenv("HIVE_THREADS")
    assert thread_cap(None) == 1 and thread_cap(3) == 3
