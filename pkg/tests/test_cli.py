import csv
import io
import subprocess
import sys

import pytest

from habicascade import cli
from habicascade.graph import read_edge_list, star_graph, write_edge_list
from smallgraphs import triangle

GRID = """
networks = ["ba:n=80,m=2,seed=1"]
network_names = ["ba80"]
propagation_probabilities = [0.1]
seed_fractions = [0.05]
rankings = ["degree"]
taus = [1]
runs_per_config = 3
"""


@pytest.fixture
def files(tmp_path):
    write_edge_list(triangle(), tmp_path / "triangle.txt")
    write_edge_list(star_graph(3), tmp_path / "star.txt")
    return tmp_path


def records(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_generate_to_stdout(capsys):
    assert cli.main(["generate", "er", "--n", "10", "--p", "1", "--seed", "1"]) == 0
    out, err = capsys.readouterr()
    assert len(out.splitlines()) == 45
    assert "edges 45" in err


def test_generate_ws_lattice(tmp_path, capsys):
    path = tmp_path / "ws.txt"
    assert cli.main(["generate", "ws", "--n", "100", "--k", "6", "--beta", "0", "--out", str(path)]) == 0
    out = capsys.readouterr().out
    assert "edges 300" in out and "global_clustering 0.6\n" in out
    assert read_edge_list(path).edge_count == 300


@pytest.mark.parametrize("argv", [
    ["generate", "ba", "--n", "2", "--m", "2"],
    ["generate", "ba", "--n", "20"],
    ["generate", "xx", "--n", "20"],
    ["run", "triangle.txt", "--pp", "2"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        rc = cli.main(argv)
        raise SystemExit(rc)
    assert exc.value.code == 1
    assert capsys.readouterr().err


def test_unreadable_network_exits_2(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.txt")]) == 2
    (tmp_path / "bad.txt").write_text("a b c\n")
    assert cli.main(["metrics", str(tmp_path / "bad.txt")]) == 2
    assert "line 1" in capsys.readouterr().err


def test_run_seeds_only(files, capsys):
    assert cli.main(["run", str(files / "triangle.txt"), "--pp", "0", "--sf", "0.33", "--runs", "1"]) == 0
    rows = records(capsys.readouterr().out)
    assert len(rows) == 4
    assert {r["coverage"] for r in rows} == {"0.333333333"}
    assert {(r["seeding"], r["habituation"]) for r in rows} == {
        ("single", "false"), ("single", "true"), ("sequential", "false"), ("sequential", "true")}


def test_run_filters_setups(files, capsys):
    cli.main(["run", str(files / "triangle.txt"), "--seeding", "single", "--habituation", "on",
              "--runs", "2"])
    rows = records(capsys.readouterr().out)
    assert len(rows) == 2 and {r["seeding"] for r in rows} == {"single"}


def test_run_deterministic(files, capsys):
    argv = ["run", "ba:n=300,m=3,seed=5", "--pp", "0.1", "--runs", "3", "--seed", "7",
            "--ranking", "random"]
    cli.main(argv)
    first = capsys.readouterr().out
    cli.main(argv)
    assert capsys.readouterr().out == first


def test_run_star_matches_oracle(files, tmp_path):
    out = tmp_path / "star.csv"
    assert cli.main(["run", str(files / "star.txt"), "--pp", "0.5", "--sf", "0.25",
                     "--ranking", "degree", "--runs", "100000", "--seeding", "single",
                     "--habituation", "off", "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        cov = [float(r["coverage"]) for r in csv.DictReader(fh)]
    assert len(cov) == 100000
    assert abs(sum(cov) / len(cov) - 0.625) <= 0.006


def test_grid_outputs(files, tmp_path, capsys):
    cfg = tmp_path / "grid.toml"
    cfg.write_text(GRID)
    out = tmp_path / "out"
    assert cli.main(["grid", str(cfg), "--out", str(out), "--jobs", "1"]) == 0
    results = (out / "results.csv").read_text()
    assert len(records(results)) == 4 * 3
    summary = records((out / "summary.csv").read_text())
    assert summary[0]["axis"] == "all"
    assert {r["axis"] for r in summary} == {"all", "network", "pp", "seed_fraction", "ranking", "tau"}
    assert cli.main(["grid", str(cfg), "--out", str(out), "--dry-run"]) == 0
    assert "configurations 1" in capsys.readouterr().out


def test_grid_malformed_config(tmp_path, capsys):
    cfg = tmp_path / "grid.toml"
    cfg.write_text(GRID.replace("taus = [1]", "taus = [-1]"))
    assert cli.main(["grid", str(cfg), "--out", str(tmp_path)]) == 1
    assert "taus" in capsys.readouterr().err
    assert cli.main(["grid", str(tmp_path / "nothing.toml")]) == 2


def test_verify_star(files, capsys):
    assert cli.main(["verify", str(files / "star.txt"), "--pp", "0.5", "--sf", "0.25"]) == 0
    out = capsys.readouterr().out
    assert "oracle 0.625\n" in out and out.rstrip().endswith("PASS")


def test_verify_triangle_habituated(files, capsys):
    assert cli.main(["verify", str(files / "triangle.txt"), "--pp", "0.5", "--sf", "0.3",
                     "--habituation", "on", "--tau", "1"]) == 0
    assert "oracle 0.698407758" in capsys.readouterr().out


def test_verify_full_probability(files, capsys):
    assert cli.main(["verify", str(files / "star.txt"), "--pp", "1", "--sf", "0.25",
                     "--samples", "1000"]) == 0
    out = capsys.readouterr().out
    assert "oracle 1\n" in out and "monte_carlo 1\n" in out


def test_verify_refuses_large_graphs(capsys):
    assert cli.main(["verify", "er:n=8,p=1,seed=0"]) == 1
    assert "refused" in capsys.readouterr().err


def test_verify_failure_exit_3(files, monkeypatch, capsys):
    monkeypatch.setattr(cli, "monte_carlo_coverage", lambda *a, **k: (0.9, 0.001))
    assert cli.main(["verify", str(files / "star.txt"), "--pp", "0.5", "--sf", "0.25"]) == 3
    assert capsys.readouterr().out.rstrip().endswith("FAIL")


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "habicascade", "metrics", str(files / "triangle.txt")],
                          capture_output=True, text=True, check=True)
    assert "global_clustering 1" in proc.stdout


def test_grid_dry_run_on_full_grid(capsys):
    from pathlib import Path
    cfg = Path(__file__).resolve().parent.parent / "configs" / "full_grid.toml"
    assert cli.main(["grid", str(cfg), "--dry-run"]) == 0
    out = capsys.readouterr().out
    assert "configurations 15680" in out and "rows 62720" in out
