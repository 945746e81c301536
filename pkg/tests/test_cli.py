import csv
import json
import subprocess
import sys

from adaptive_pomcp.cli import main


def write_cfg(path, **data):
    path.write_text(json.dumps(data))
    return str(path)


def test_run(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json", T=5, total_budget=50)
    assert main(["run", "--config", cfg, "--seeds", "0,1", "--out", str(tmp_path / "out")]) == 0
    names = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert len(names) == 3 and "summary.csv" in names
    assert "reward" in capsys.readouterr().out


def test_dump_tree(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json", T=5, total_budget=100)
    assert main(["run", "--config", cfg, "--dump-tree", "2"]) == 0
    tree = json.loads(capsys.readouterr().out)
    assert tree["N"] == sum(a["N"] for a in tree["actions"])


def test_compare(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", T=4, total_budget=80, seeds=[0])
    assert main(["compare", "--config", cfg, "--out", str(tmp_path / "cmp")]) == 0
    assert (tmp_path / "cmp" / "comparison.csv").exists()


def test_grid_search(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", T=2, total_budget=20, seeds=[0])
    out = tmp_path / "g.csv"
    assert main(["grid-search", "--config", cfg, "--out", str(out)]) == 0
    with open(out) as fh:
        assert len(list(csv.reader(fh))) == 50


def test_dataset_and_export(tmp_path):
    data = tmp_path / "d.csv"
    assert main(["gen-dataset", "--out", str(data), "--seed", "2"]) == 0
    out = tmp_path / "t.csv"
    assert main(["export-truth", "--threshold", "0.6", "--out", str(out), "--resolution", "0.5"]) == 0
    with open(out) as fh:
        assert next(csv.reader(fh)) == ["x", "y", "t", "value"]
    cfg = write_cfg(tmp_path / "g.json", environment={"kind": "grid-dataset", "path": "d.csv"})
    assert main(["export-truth", "--threshold", "3", "--out", str(out), "--config", cfg, "--resolution", "10"]) == 0


def test_errors(tmp_path, capsys):
    bad = write_cfg(tmp_path / "bad.json", nope=1)
    assert main(["run", "--config", bad]) != 0
    assert "nope" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.json")]) != 0
    missing_data = write_cfg(tmp_path / "m.json", environment={"kind": "grid-dataset", "path": "nothing.csv"})
    assert main(["compare", "--config", missing_data]) != 0


def test_console_entry():
    r = subprocess.run([sys.executable, "-m", "adaptive_pomcp.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "grid-search" in r.stdout
