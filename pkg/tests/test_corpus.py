import json

import pytest
from click.testing import CliRunner

from app.cli.operations import OPERATIONS, RunSettings, run_operation
from app.corpus import CORPUS_DIR, load_cases
from app.services.verify_service import VerifyService
from main import cli

CASES = load_cases()


def test_cases_are_sorted_and_unique():
    names = [case.name for case in CASES]
    assert names == sorted(names)
    assert len(set(names)) == len(names)


@pytest.mark.parametrize("case", CASES, ids=lambda case: case.name)
def test_case_refers_to_a_known_operation_and_input(case):
    assert case.operation in OPERATIONS
    if not case.input.startswith("builtin:"):
        assert (CORPUS_DIR / case.input).is_file()


def test_single_case_through_the_registry():
    case = next(c for c in CASES if c.name == "cuntz2-classify")
    report = run_operation(case.operation, case.source(), dict(case.args), RunSettings())
    assert report.verdict == case.expected


def test_corpus_run_passes_and_replays():
    result = CliRunner().invoke(cli, ["--format", "json", "corpus", "run"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["verdict"] == "PASS"
    assert report["payload"]["cases"] == len(CASES)
    assert report["payload"]["mismatches"] == 0


def test_corpus_run_single_case():
    report = run_operation("corpus run", None, {"only": "zon-unknown-element"}, RunSettings())
    assert report.verdict == "PASS"
    entry = report.payload["entries"][0]
    assert entry["verdict"] == "ERROR:UNDECLARED_GENERATOR"
    assert VerifyService.verify_report(report).accepted
