"""
Command-line front end.

Each command group module registers its operations with
``app.cli.operations`` and exposes a click group; this module wires the
groups under the root ``typesemi`` command and turns the global flags into
``RunSettings``.
"""

from typing import Optional

import click
import logfire

from app import __version__
from app.cli.corpus import corpus
from app.cli.graph import graph
from app.cli.groupoid import groupoid
from app.cli.lattice import lattice
from app.cli.monoid import monoid
from app.cli.operations import RunSettings
from app.cli.render import emit_error
from app.cli.state import state
from app.cli.verify import verify
from app.config.output_config import ExitCode, OutputFormat
from app.exceptions import invalid_budget
from app.middleware.exception_handlers import CommandFailed, guard
from app.models.error_models import ErrorCode
from app.models.monoid_models import SearchBudget


class TypesemiGroup(click.Group):
    """Usage errors, including unknown subcommands, exit as input errors."""

    def _input_error(self, e: click.UsageError) -> click.UsageError:
        logfire.info("usage error", error_code=ErrorCode.UNKNOWN_SUBCOMMAND.value, message=e.format_message())
        e.exit_code = int(ExitCode.INPUT_ERROR)
        return e

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            raise self._input_error(e)

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            raise self._input_error(e)


def _budget(n: Optional[int], coeff: Optional[int], nodes: Optional[int]) -> SearchBudget:
    base = SearchBudget.from_config().model_dump()
    for field, value in (("n_max", n), ("coeff_cap", coeff), ("node_cap", nodes)):
        if value is None:
            continue
        if value < 1:
            raise invalid_budget(field, value)
        base[field] = value
    return SearchBudget(**base)


@click.group(cls=TypesemiGroup)
@click.version_option(__version__, prog_name="typesemi")
@click.option(
    "--format",
    "output_format",
    type=click.Choice([f.value for f in OutputFormat]),
    default=OutputFormat.HUMAN.value,
    show_default=True,
    help="human: rich tables; json: the machine-readable report",
)
@click.option("--budget-n", type=int, default=None, help="Largest multiplier tried [env TYPESEMI_BUDGET_N]")
@click.option("--budget-coeff", type=int, default=None, help="Per-generator coefficient cap [env TYPESEMI_BUDGET_COEFF]")
@click.option("--budget-nodes", type=int, default=None, help="Search nodes before giving up [env TYPESEMI_BUDGET_NODES]")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed of the random property suites")
@click.option("--unknown-ok", is_flag=True, help="Exit 0 instead of 2 on an UNKNOWN verdict")
@click.pass_context
def cli(ctx, output_format, budget_n, budget_coeff, budget_nodes, seed, unknown_ok):
    """Type semigroups, Tarski states and self-similar graph dichotomies with replayable certificates."""
    output = OutputFormat(output_format)
    try:
        with guard("typesemi"):
            budget = _budget(budget_n, budget_coeff, budget_nodes)
    except CommandFailed as e:
        emit_error(e.response, output)
        ctx.exit(e.response.exit_code)
    ctx.obj = RunSettings(output_format=output, budget=budget, seed=seed, unknown_ok=unknown_ok)


cli.add_command(monoid)
cli.add_command(state)
cli.add_command(lattice)
cli.add_command(groupoid)
cli.add_command(graph)
cli.add_command(corpus)
cli.add_command(verify)
