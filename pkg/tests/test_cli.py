import json
from fractions import Fraction
from pathlib import Path

import pytest
from click.testing import CliRunner

from app.cli.operations import RunSettings
from app.cli.runner import exit_code_for
from app.models.service_response import Report
from app.services.drunken_service import fibonacci
from main import cli

CORPUS = Path(__file__).resolve().parent.parent / "app" / "corpus"


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def run_json(runner: CliRunner, *args: str):
    result = runner.invoke(cli, ["--format", "json", *args])
    return result, json.loads(result.stdout) if result.exit_code in (0, 2) else None


def test_classify_cuntz_graph(runner):
    result, report = run_json(runner, "graph", "classify", str(CORPUS / "cuntz2.graph"))
    assert result.exit_code == 0
    assert report["verdict"] == "PURELY_INFINITE"
    assert report["operation"] == "graph classify"
    assert len(report["input_digest"]) == 64


def test_drunken_trace_width_at_depth_twenty(runner):
    result, report = run_json(runner, "graph", "trace", "builtin:drunken", "--depth", "20")
    assert result.exit_code == 0
    assert report["verdict"] == "EXACT"
    width = Fraction(report["payload"]["ladder"]["ratio_width"])
    assert width == Fraction(1, fibonacci(40) * fibonacci(39))
    assert report["payload"]["ladder"]["cassini"] == "TRUE"


def test_paradoxical_element_of_finite_table(runner):
    result, report = run_json(runner, "monoid", "paradoxical", str(CORPUS / "zon.fmon"), "--elem", "one")
    assert result.exit_code == 0
    assert report["verdict"] == "PROVED"
    assert report["judgement"]["certificate"]


def test_theta_image(runner):
    result, report = run_json(runner, "graph", "theta", str(CORPUS / "cuntz2.graph"), "--f", "v", "--n", "2")
    assert result.exit_code == 0
    assert report["payload"]["theta"] == "4*v"


def test_output_is_deterministic(runner):
    args = ["graph", "compare", str(CORPUS / "swapped_loops.graph"), "--f", "u", "--g", "w"]
    first = runner.invoke(cli, ["--format", "json", *args]).stdout
    second = runner.invoke(cli, ["--format", "json", *args]).stdout
    assert first == second


def test_human_output_names_the_verdict(runner):
    result = runner.invoke(cli, ["graph", "classify", str(CORPUS / "cuntz2.graph")])
    assert result.exit_code == 0
    assert "PURELY_INFINITE" in result.stdout


def test_unknown_subcommand_is_an_input_error(runner):
    result = runner.invoke(cli, ["banana"])
    assert result.exit_code == 1


def test_missing_option_is_an_input_error(runner):
    result = runner.invoke(cli, ["monoid", "leq", str(CORPUS / "cuntz.mon"), "--x", "v"])
    assert result.exit_code == 1


def test_nonpositive_budget_is_rejected(runner):
    result = runner.invoke(cli, ["--budget-n", "0", "monoid", "simple", str(CORPUS / "zon.fmon")])
    assert result.exit_code == 1


def test_undeclared_element_is_an_input_error(runner):
    result = runner.invoke(cli, ["--format", "json", "monoid", "paradoxical", str(CORPUS / "zon.fmon"), "--elem", "two"])
    assert result.exit_code == 1
    assert "UNDECLARED_GENERATOR" in result.output


def test_missing_input_file(runner, tmp_path):
    result = runner.invoke(cli, ["graph", "classify", str(tmp_path / "absent.graph")])
    assert result.exit_code == 1


@pytest.mark.parametrize(
    "verdict, unknown_ok, expected",
    [
        ("PROVED", False, 0),
        ("REFUTED", False, 0),
        ("UNKNOWN", False, 2),
        ("UNKNOWN", True, 0),
        ("REJECTED", False, 1),
        ("FAIL", True, 1),
    ],
)
def test_exit_status_follows_the_verdict(verdict, unknown_ok, expected):
    report = Report(operation="monoid leq", verdict=verdict)
    assert exit_code_for(report, RunSettings(unknown_ok=unknown_ok)) == expected
