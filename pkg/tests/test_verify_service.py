import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from app.cli.operations import RunSettings, run_operation
from app.models.service_response import Report
from app.services.verify_service import VerifyService
from main import cli

CORPUS = Path(__file__).resolve().parent.parent / "app" / "corpus"


def report_for(operation: str, name: str, **args: str) -> Report:
    source = name if name.startswith("builtin:") else str(CORPUS / name)
    return run_operation(operation, source, args, RunSettings())


@pytest.mark.parametrize(
    "operation, name, args",
    [
        ("graph compare", "swapped_loops.graph", {"f": "u", "g": "w"}),
        ("graph theta", "disjoint_loops.graph", {"f": "u", "g": "w"}),
        ("graph trace", "two_cycle.graph", {}),
        ("graph trace", "builtin:drunken", {"depth": "8"}),
        ("monoid paradoxical", "zon.fmon", {"elem": "one"}),
        ("state find", "cuntz.mon", {"y": "v"}),
        ("lattice decompose", "three.space", {}),
    ],
)
def test_fresh_reports_replay(operation, name, args):
    outcome = VerifyService.verify_report(report_for(operation, name, **args))
    assert outcome.accepted, outcome.failures
    assert outcome.checked >= 1


def test_changed_input_is_rejected():
    report = report_for("graph compare", "swapped_loops.graph", f="u", g="w")
    tampered = report.model_copy(update={"input_digest": "0" * 64})
    outcome = VerifyService.verify_report(tampered)
    assert not outcome.accepted
    assert "changed" in outcome.failures[0]


def test_report_without_input_is_rejected():
    report = report_for("graph compare", "swapped_loops.graph", f="u", g="w")
    outcome = VerifyService.verify_report(report.model_copy(update={"input_path": None}))
    assert not outcome.accepted


def test_verify_command_round_trip(tmp_path):
    runner = CliRunner()
    produced = runner.invoke(
        cli, ["--format", "json", "graph", "trace", str(CORPUS / "disjoint_loops.graph")]
    )
    assert produced.exit_code == 0
    path = tmp_path / "report.json"
    path.write_text(produced.stdout)

    accepted = runner.invoke(cli, ["--format", "json", "verify", str(path)])
    assert accepted.exit_code == 0
    assert json.loads(accepted.stdout)["verdict"] == "ACCEPTED"

    document = json.loads(produced.stdout)
    document["input_digest"] = "f" * 64
    path.write_text(json.dumps(document))
    rejected = runner.invoke(cli, ["verify", str(path)])
    assert rejected.exit_code == 1


def test_unreadable_report(tmp_path):
    path = tmp_path / "report.json"
    path.write_text("{not json")
    result = CliRunner().invoke(cli, ["verify", str(path)])
    assert result.exit_code == 1
