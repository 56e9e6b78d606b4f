import json

import pytest

from lawstar.cli import main
from lawstar.config import parse_config
from lawstar.limits import validate_system


@pytest.fixture(autouse=True)
def at_root(repo_root, monkeypatch):
    monkeypatch.chdir(repo_root)


def run(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def report(capsys, *argv):
    status, out, _ = run(capsys, "--format", "json", *argv)
    return status, json.loads(out)


def test_validate_three_node(capsys):
    status, rep = report(capsys, "--config", "configs/three_node.yaml", "validate")
    assert status == 0 and rep["exit_status"] == 0
    assert {r["verdict"] for r in rep["records"]} == {"pass"}


def test_spectral_on_diag01(capsys):
    status, rep = report(capsys, "--config", "configs/diag01.yaml", "--mesh", "0.25", "spectral", "x")
    assert status == 0
    final = [r for r in rep["records"] if r["check"] == "max-error"][0]
    assert final["residuals"]["max_error"] <= 0.25


def test_w_star_is_refused(capsys):
    status, out, err = run(capsys, "--config", "configs/three_node.yaml", "verify", "w-star")
    assert status == 2 and "out of scope" in err and out == ""


@pytest.mark.parametrize("argv", [
    ["verify", "theorem1"], ["verify", "baer"], ["verify", "kaplansky"], ["verify", "lattice"],
    ["annihilate", "x,p"], ["center"], ["corner", "p"], ["masa", "x"], ["commutant", "p,q"],
    ["bounded", "x"], ["bounded-part"], ["ideal-annihilator", "b1"], ["spectral", "x"],
    ["lemma1", "x", "0.05"], ["lemma2", "p,q", "x"],
])
def test_every_command_passes_on_three_node(capsys, argv):
    status, rep = report(capsys, "--config", "configs/three_node.yaml", "--samples", "4", *argv)
    assert status == 0, [r for r in rep["records"] if r["verdict"] == "fail"]


def test_bounded_chain_elements(capsys):
    status, rep = report(capsys, "--config", "configs/harmonic_chain.yaml", "bounded", "h")
    assert status == 0 and rep["records"][0]["info"]["status"] == "bounded"
    status, rep = report(capsys, "--config", "configs/harmonic_chain.yaml", "bounded", "n")
    assert status == 1 and rep["records"][0]["witness"] == 11


@pytest.mark.parametrize("argv", [
    ["--config", "configs/three_node.yaml", "bogus"],
    ["--config", "configs/three_node.yaml", "annihilate", "nope"],
    ["--config", "configs/three_node.yaml", "annihilate"],
    ["--config", "configs/missing.yaml", "validate"],
    ["validate"],
])
def test_usage_errors_exit_2(capsys, argv):
    status, _, err = run(capsys, *argv)
    assert status == 2 and err.startswith("error:")


def test_reports_are_byte_identical(capsys):
    argv = ("--config", "configs/three_node.yaml", "--format", "json", "verify", "theorem1")
    first, second = run(capsys, *argv)[1], run(capsys, *argv)[1]
    assert first == second


@pytest.mark.parametrize("seed", range(12))
def test_gen_random_emits_valid_systems(capsys, seed):
    status, out, _ = run(capsys, "gen-random", "--seed", str(seed))
    assert status == 0
    cfg = parse_config(out)
    assert validate_system(cfg.system).ok
    assert {"x", "h", "p"} <= set(cfg.threads)
    assert run(capsys, "gen-random", "--seed", str(seed))[1] == out


def test_text_format_lists_one_line_per_record(capsys):
    status, out, _ = run(capsys, "--config", "configs/diag01.yaml", "validate")
    lines = out.splitlines()
    assert status == 0 and lines[0] == "command: validate" and lines[-1] == "exit status: 0"
    assert all(line.startswith(("PASS", "FAIL")) for line in lines[2:-1])
