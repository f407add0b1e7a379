import time
from typing import Dict, Optional

import click

from app.cli.operations import RunSettings, run_operation
from app.cli.render import emit_error, emit_report
from app.config.analysis_config import analysis_config
from app.config.output_config import ExitCode
from app.middleware.exception_handlers import CommandFailed, guard
from app.models.service_response import Report

FAILING_VERDICTS = {"FAIL", "REJECTED"}


def exit_code_for(report: Report, settings: RunSettings) -> int:
    if report.verdict in FAILING_VERDICTS:
        return ExitCode.REJECTED
    if report.verdict == "UNKNOWN" and not settings.unknown_ok:
        return ExitCode.UNKNOWN
    return ExitCode.VERDICT


def execute(ctx: click.Context, operation: str, source: Optional[str], args: Dict[str, object]) -> None:
    """
    Run one operation, print its report or error and exit with the
    matching status.
    """
    settings: RunSettings = ctx.obj
    arguments = {key: str(value) for key, value in args.items() if value is not None and value != ()}
    start_time = time.time()

    try:
        with guard(operation, source):
            report = run_operation(operation, source, arguments, settings)
    except CommandFailed as e:
        emit_error(e.response, settings.output_format)
        ctx.exit(e.response.exit_code)

    if analysis_config.include_timing:
        metadata = report.metadata.model_copy(update={"execution_time_seconds": round(time.time() - start_time, 4)})
        report = report.model_copy(update={"metadata": metadata})

    emit_report(report, settings.output_format)
    ctx.exit(int(exit_code_for(report, settings)))
