import json

import click
from rich.console import Console
from rich.json import JSON
from rich.panel import Panel
from rich.table import Table

from app.config.output_config import OutputFormat
from app.models.error_models import StandardErrorResponse
from app.models.service_response import Report

_VERDICT_STYLE = {
    "PROVED": "bold green",
    "REFUTED": "bold red",
    "UNKNOWN": "bold yellow",
    "PASS": "bold green",
    "FAIL": "bold red",
    "ACCEPTED": "bold green",
    "REJECTED": "bold red",
}


def emit_report(report: Report, output_format: OutputFormat) -> None:
    if output_format == OutputFormat.JSON:
        click.echo(report.to_json())
        return

    console = Console()
    summary = Table(show_header=False, box=None, pad_edge=False)
    summary.add_column(style="dim")
    summary.add_column()
    summary.add_row("operation", report.operation)
    if report.input_path:
        summary.add_row("input", report.input_path)
    for key, value in report.arguments.items():
        summary.add_row(key, value)
    verdict = report.verdict or "-"
    summary.add_row("verdict", f"[{_VERDICT_STYLE.get(verdict, 'bold')}]{verdict}[/]")
    if report.judgement is not None:
        summary.add_row("claim", str(report.judgement.claim))
        for note in report.judgement.notes:
            summary.add_row("note", note)
    console.print(Panel(summary, title=f"typesemi {report.version}", expand=False))

    if report.judgement is not None and report.judgement.certificate is not None:
        certificate = report.judgement.certificate.model_dump(mode="json", exclude_none=True)
        console.print(Panel(JSON.from_data(certificate), title="certificate", expand=False))
    if report.payload:
        console.print(JSON.from_data(report.payload))


def emit_error(response: StandardErrorResponse, output_format: OutputFormat) -> None:
    if output_format == OutputFormat.JSON:
        click.echo(json.dumps(response.to_dict(), indent=2, sort_keys=True, default=str), err=True)
        return

    console = Console(stderr=True)
    lines = [f"[bold]{response.error_code}[/] {response.message}"]
    for detail in response.details or []:
        where = ""
        if detail.line is not None:
            where = f"line {detail.line}" + (f", column {detail.column}" if detail.column is not None else "") + ": "
        text = " ".join(
            part
            for part in (
                detail.field and f"{detail.field}",
                detail.value is not None and f"= {detail.value}" or None,
                detail.constraint and f"({detail.constraint})",
                detail.suggestion,
            )
            if part
        )
        lines.append(f"  {where}{text}")
    console.print(Panel("\n".join(lines), title=response.error_type, border_style="red", expand=False))
