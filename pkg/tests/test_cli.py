import json
import logging
import os

import pytest

from cli.commands import EXIT_INVALID_INPUT, EXIT_OK
from cli.loader import dump_instance
from config.config import ENV_PREFIX
from main import build_parser, main
from tests.helpers import tie_market


@pytest.fixture(autouse=True)
def isolated_logging(monkeypatch):
    for key in list(os.environ):
        if key.startswith(ENV_PREFIX):
            monkeypatch.delenv(key)
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def tie_manifest(tmp_path):
    return dump_instance(tie_market(), str(tmp_path / "tie"))


def test_parser_knows_every_command():
    parser = build_parser()
    for command in ("solve", "candidates", "welfare-curve", "plot", "verify"):
        args = parser.parse_args([command, "--instance", "x"])
        assert args.command == command
        assert args.precision is None


def test_instance_is_required():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["solve"])


def test_solve_prints_the_report(cola_dir, capsys):
    assert main(["solve", "--instance", cola_dir]) == EXIT_OK
    out = capsys.readouterr().out
    assert "Instance: cola (ties: taxed-first)" in out
    assert "Optimal tax rate: 0.0000 (0)" in out
    assert "cola=4.70 (47/10)" in out


def test_solve_json_report(cola_dir, tmp_path, capsys):
    out = str(tmp_path / "solve.json")
    assert main(["solve", "--instance", cola_dir, "--welfare-mode", "paper-example", "--out", out]) == EXIT_OK
    assert capsys.readouterr().out == ""
    with open(out) as file:
        payload = json.load(file)
    assert payload["welfare_mode"] == "paper-example"
    assert payload["alpha"]["exact"] == "1"
    assert payload["welfare"]["paper-example"]["total"] == "156043.80"


def test_text_report_gets_a_json_sibling(cola_dir, tmp_path):
    out = tmp_path / "reports" / "candidates.txt"
    assert main(["candidates", "--instance", cola_dir, "--out", str(out)]) == EXIT_OK
    assert "Candidate price points: cola" in out.read_text()
    payload = json.loads((tmp_path / "reports" / "candidates.json").read_text())
    assert payload["candidate_count"] == len(payload["candidates"])


def test_output_does_not_depend_on_workers(cola_dir, capsys, monkeypatch):
    # the cola instance is smaller than the fan-out threshold
    monkeypatch.setattr("utils.parallel.MIN_PARALLEL_ITEMS", 1)
    main(["solve", "--instance", cola_dir, "--workers", "1"])
    single = capsys.readouterr().out
    main(["solve", "--instance", cola_dir, "--workers", "2"])
    assert capsys.readouterr().out == single


def test_precision_flag(cola_dir, capsys):
    assert main(["solve", "--instance", cola_dir, "--precision", "4"]) == EXIT_OK
    assert "cola=4.7000 (47/10)" in capsys.readouterr().out


def test_tie_rule_flag(cola_dir, tmp_path):
    out = tmp_path / "candidates.json"
    assert main(["candidates", "--instance", cola_dir, "--tie-rule", "revenue", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["tie_rule"] == "revenue"


def test_plot_to_stdout(cola_dir, capsys):
    assert main(["plot", "--instance", cola_dir]) == EXIT_OK
    assert capsys.readouterr().out.startswith("<?xml")


def test_welfare_curve(tie_manifest, capsys):
    assert main(["welfare-curve", "--instance", tie_manifest, "--samples", "3"]) == EXIT_OK
    assert "Welfare curve: tie" in capsys.readouterr().out


def test_verify_tie_instance(tie_manifest, tmp_path):
    out = tmp_path / "verify.json"
    assert main(["verify", "--instance", tie_manifest, "--grid-step", "0.01", "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["passed"] is True
    assert payload["grid"]["price_step"] == "1/100"
    assert payload["violations"] == []


@pytest.mark.slow
def test_solve_with_oracle(cola_dir, capsys):
    assert main(["solve", "--instance", cola_dir, "--oracle"]) == EXIT_OK
    assert "Oracle: PASS" in capsys.readouterr().out


def test_missing_instance_is_invalid_input(tmp_path, capsys):
    assert main(["solve", "--instance", str(tmp_path / "missing")]) == EXIT_INVALID_INPUT
    assert capsys.readouterr().out == ""


def test_broken_rows_are_invalid_input(tie_manifest, capsys):
    consumers = os.path.join(os.path.dirname(tie_manifest), "consumers.csv")
    with open(consumers, "a") as file:
        file.write("c0,p0,1,1,1\n")
    assert main(["solve", "--instance", tie_manifest]) == EXIT_INVALID_INPUT
    assert capsys.readouterr().out == ""


@pytest.mark.parametrize("flags", [["--precision", "20"], ["--grid-step", "abc"], ["--workers", "0"]])
def test_bad_settings_are_invalid_input(cola_dir, flags):
    assert main(["solve", "--instance", cola_dir, *flags]) == EXIT_INVALID_INPUT
