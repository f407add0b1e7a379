import click
import logfire

from app.cli.operations import build_report, operation, run_operation
from app.cli.runner import execute
from app.corpus import load_cases
from app.exceptions import BaseAnalysisException
from app.services.verify_service import VerifyService


@operation("corpus run")
def corpus_report(source, args, settings):
    """
    Run every bundled case, compare its verdict with the expected one and
    replay the certificates of its report.
    """
    only = args.get("only")
    entries = []
    mismatches = 0
    with logfire.span("corpus.run", only=only):
        for case in load_cases():
            if only and case.name != only:
                continue
            entry = {"name": case.name, "expected": case.expected}
            try:
                report = run_operation(case.operation, case.source(), dict(case.args), settings)
            except BaseAnalysisException as e:
                verdict = f"ERROR:{e.error_code.value}"
                entry.update(verdict=verdict, match=verdict == case.expected, message=e.message)
                if verdict != case.expected:
                    mismatches += 1
                    logfire.warn("corpus.run mismatch", case=case.name, expected=case.expected, verdict=verdict)
                entries.append(entry)
                continue
            replay = VerifyService.verify_report(report)
            match = report.verdict == case.expected and replay.accepted
            if not match:
                mismatches += 1
                logfire.warn("corpus.run mismatch", case=case.name, expected=case.expected, verdict=report.verdict)
            entry.update(
                verdict=report.verdict,
                match=match,
                replay_failures=list(replay.failures),
                report=report.to_dict(),
            )
            entries.append(entry)
        logfire.info("corpus.run done", cases=len(entries), mismatches=mismatches)

    payload = {"cases": len(entries), "mismatches": mismatches, "entries": entries}
    return build_report("corpus run", None, args, settings, verdict="FAIL" if mismatches else "PASS", payload=payload)


@click.group()
def corpus():
    """The bundled regression corpus."""


@corpus.command()
@click.option("--only", help="Run a single case by name")
@click.pass_context
def run(ctx, only):
    """Run every bundled case and replay its certificates."""
    execute(ctx, "corpus run", None, {"only": only})
