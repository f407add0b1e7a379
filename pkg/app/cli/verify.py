import hashlib
import json
from pathlib import Path

import click

from app.cli.operations import build_report, dumped, operation
from app.cli.runner import execute
from app.exceptions import ValidationException
from app.models.error_models import ErrorCode
from app.models.service_response import Report
from app.services.verify_service import VerifyService


@operation("verify")
def verify_report(source, args, settings):
    path = source
    try:
        raw = Path(path).read_bytes()
        document = json.loads(raw.decode("utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ValidationException(
            message=f"cannot read report {path}",
            error_code=ErrorCode.INVALID_INPUT,
            field="report",
            value=path,
            suggestion=str(e),
        ) from e

    outcome = VerifyService.verify_report(Report.model_validate(document))
    report = build_report(
        "verify",
        None,
        args,
        settings,
        verdict="ACCEPTED" if outcome.accepted else "REJECTED",
        payload={"replay": dumped(outcome)},
    )
    return report.model_copy(update={"input_path": path, "input_digest": hashlib.sha256(raw).hexdigest()})


@click.command()
@click.argument("report_path", metavar="REPORT.json")
@click.pass_context
def verify(ctx, report_path):
    """Replay every certificate of a machine-readable report against its input."""
    execute(ctx, "verify", report_path, {})
