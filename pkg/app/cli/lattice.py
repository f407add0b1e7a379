"""
``typesemi lattice ...``: the lattice F(O) of finite sums of open
indicators on a finite space, its way-below relation and decompositions.
"""

import random

import click

from app.cli.operations import build_report, dumped, operation, require, truth
from app.cli.runner import execute
from app.exceptions import BudgetExceededException, PreconditionException, ValidationException
from app.models.error_models import ErrorCode
from app.models.lattice_models import FiniteSpace
from app.parsers.input_parser import InputParser
from app.services.lattice_service import LatticeService
from app.services.sampling_service import SamplingService


def _space(source: str):
    parsed = InputParser.load(source)
    if not isinstance(parsed.value, FiniteSpace):
        raise ValidationException(
            message="lattice commands need a space input",
            error_code=ErrorCode.INVALID_INPUT,
            field="kind",
            value=parsed.kind.value,
            constraint="space",
        )
    return parsed, parsed.value


@operation("lattice decompose")
def decompose_report(source, args, settings):
    parsed, space = _space(source)
    ks = InputParser.extra_sets(parsed, "ks")
    vs = InputParser.extra_sets(parsed, "vs")
    decomposition = LatticeService.decompose(space, ks, vs)
    return build_report(
        "lattice decompose", parsed, args, settings, payload={"decomposition": dumped(decomposition)}
    )


@operation("lattice waybelow")
def way_below_report(source, args, settings):
    parsed, space = _space(source)
    functions = InputParser.extra_functions(parsed)
    f_name, g_name = require(args, "f"), require(args, "g")
    missing = next((name for name in (f_name, g_name) if name not in functions), None)
    if missing is not None:
        raise ValidationException(
            message=f"no function '{missing}' in [functions]",
            error_code=ErrorCode.INVALID_INPUT,
            field="functions",
            value=missing,
            constraint=", ".join(sorted(functions)),
        )
    f = LatticeService.from_values(space, functions[f_name].as_dict())
    g = LatticeService.from_values(space, functions[g_name].as_dict())
    below = LatticeService.way_below(space, g, f)
    payload = {
        "g": str(g),
        "f": str(f),
        "closure_of_g": LatticeService.closure_fn(space, g),
        "largest_way_below_f": str(LatticeService.largest_way_below(space, f)),
    }
    if below:
        payload["interpolant"] = str(LatticeService.interpolate(space, g, f))
    return build_report("lattice waybelow", parsed, args, settings, verdict=truth(below), payload=payload)


@operation("lattice dimension")
def dimension_report(source, args, settings):
    parsed, space = _space(source)
    result = LatticeService.extend_dimension_function(space, InputParser.extra_measure(parsed))
    verdict = "VALID" if result.valid else "INVALID"
    return build_report("lattice dimension", parsed, args, settings, verdict=verdict, payload={"dimension": dumped(result)})


@operation("lattice random-decompose")
def random_decompose_report(source, args, settings):
    """Seeded decomposition suite; every successful split must pass the postcondition check."""
    rng = random.Random(settings.seed)
    count = int(args.get("count", "500"))
    general = args.get("general", "False") == "True"
    cases, failures, separation_failed, search_capped = [], [], 0, 0
    for index in range(count):
        space = SamplingService.random_space(rng) if general else SamplingService.random_partition_space(rng)
        space, ks, vs = SamplingService.random_decompose_case(rng, space)
        try:
            decomposition = LatticeService.decompose(space, ks, vs)
        except PreconditionException as e:
            if e.error_code != ErrorCode.SEPARATION_FAILED:
                raise
            separation_failed += 1
            continue
        except BudgetExceededException as e:
            if e.error_code != ErrorCode.SEARCH_CAP_EXCEEDED:
                raise
            search_capped += 1
            continue
        failure = LatticeService.check_decomposition(space, ks, vs, decomposition)
        if failure is not None:
            failures.append(f"case {index}: {failure}")
        cases.append(
            {
                "space": dumped(space),
                "ks": [list(k) for k in ks],
                "vs": [list(v) for v in vs],
                "decomposition": dumped(decomposition),
            }
        )
    payload = {
        "count": count,
        "decomposed": len(cases),
        "separation_failed": separation_failed,
        "search_capped": search_capped,
        "failures": failures,
        "cases": cases,
    }
    verdict = "FAIL" if failures else "PASS"
    return build_report("lattice random-decompose", None, args, settings, verdict=verdict, payload=payload)


# ----------------------------------------------------------------------
# click surface
# ----------------------------------------------------------------------


@click.group()
def lattice():
    """Finite spaces: decompositions, way-below and dimension functions."""


@lattice.command()
@click.argument("source")
@click.pass_context
def decompose(ctx, source):
    """Split the [ks] sets among the [vs] opens."""
    execute(ctx, "lattice decompose", source, {})


@lattice.command(name="waybelow")
@click.argument("source")
@click.option("--g", "g", required=True, help="Name of the smaller function in [functions]")
@click.option("--f", "f", required=True, help="Name of the larger function in [functions]")
@click.pass_context
def way_below(ctx, source, g, f):
    """Decide g ≪ f and interpolate between them when it holds."""
    execute(ctx, "lattice waybelow", source, {"g": g, "f": f})


@lattice.command()
@click.argument("source")
@click.pass_context
def dimension(ctx, source):
    """Check the [nu] set function and extend it to a measure."""
    execute(ctx, "lattice dimension", source, {})


@lattice.command(name="random-decompose")
@click.option("--count", default=500, show_default=True, type=click.IntRange(min=0))
@click.option("--general", is_flag=True, help="Draw arbitrary finite spaces instead of partition spaces")
@click.pass_context
def random_decompose(ctx, count, general):
    """Seeded decomposition suite."""
    execute(ctx, "lattice random-decompose", None, {"count": count, "general": general})
