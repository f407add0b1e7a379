"""
``typesemi groupoid ...``: finite groupoid models and their type semigroup.
Functions on the points are written like monoid elements, e.g. ``2*p + q``.
"""

import click

from app.cli.operations import build_report, dumped, operation, require
from app.cli.runner import execute
from app.exceptions import ValidationException
from app.models.error_models import ErrorCode
from app.models.groupoid_models import GroupoidModel
from app.parsers.input_parser import InputParser
from app.services.groupoid_service import GroupoidService

RELATIONS = {
    "sim": GroupoidService.sim_G,
    "precsim": GroupoidService.precsim_B,
    "criterion": GroupoidService.precsim_criterion,
    "leq": GroupoidService.type_semigroup_leq,
}


def _model(source: str):
    parsed = InputParser.load(source)
    if not isinstance(parsed.value, GroupoidModel):
        raise ValidationException(
            message="groupoid commands need a groupoid input",
            error_code=ErrorCode.INVALID_INPUT,
            field="kind",
            value=parsed.kind.value,
            constraint="groupoid",
        )
    return parsed, parsed.value


@operation("groupoid typesemigroup")
def type_semigroup_report(source, args, settings):
    parsed, model = _model(source)
    relation = args.get("relation", "precsim")
    if relation not in RELATIONS:
        raise ValidationException(
            message=f"unknown relation '{relation}'",
            error_code=ErrorCode.INVALID_INPUT,
            field="relation",
            value=relation,
            constraint=", ".join(RELATIONS),
        )
    f = InputParser.parse_element(require(args, "f"))
    g = InputParser.parse_element(require(args, "g"))
    judgement = RELATIONS[relation](model, f, g, settings.budget)
    return build_report("groupoid typesemigroup", parsed, args, settings, judgement=judgement)


@operation("groupoid ideals")
def ideals_report(source, args, settings):
    parsed, model = _model(source)
    structure = GroupoidService.invariant_subsets_and_ideals(model, settings.budget)
    verdict = "MINIMAL" if structure.minimal else "NOT_MINIMAL"
    return build_report("groupoid ideals", parsed, args, settings, verdict=verdict, payload={"structure": dumped(structure)})


@operation("groupoid sigma")
def sigma_report(source, args, settings):
    parsed, model = _model(source)
    sigma = GroupoidService.sigma_map(model, InputParser.parse_element(require(args, "f")))
    return build_report("groupoid sigma", parsed, args, settings, payload={"sigma": dumped(sigma)})


@operation("groupoid stabilize")
def stabilize_report(source, args, settings):
    """The stabilised model, and with ``f``/``g`` the ≼ verdict on both sides of the correspondence."""
    parsed, model = _model(source)
    stabilized = GroupoidService.stabilize(model, int(args.get("n", "3")))
    payload = {"stabilized": dumped(stabilized)}
    if args.get("f") and args.get("g"):
        f = InputParser.parse_element(args["f"])
        g = InputParser.parse_element(args["g"])
        original = GroupoidService.precsim_B(model, f, g, settings.budget)
        lifted = GroupoidService.precsim_B(stabilized.model, stabilized.lift(f), stabilized.lift(g), settings.budget)
        payload["original"] = original.verdict.value
        payload["stabilized_verdict"] = lifted.verdict.value
        payload["consistent"] = not (original.is_definite and lifted.is_definite and original.verdict != lifted.verdict)
    return build_report("groupoid stabilize", parsed, args, settings, payload=payload)


@operation("groupoid unperforated")
def unperforated_report(source, args, settings):
    parsed, model = _model(source)
    judgement = GroupoidService.check_almost_unperforation_bounded(model, settings.budget)
    return build_report("groupoid unperforated", parsed, args, settings, judgement=judgement)


# ----------------------------------------------------------------------
# click surface
# ----------------------------------------------------------------------


@click.group()
def groupoid():
    """Groupoid models: equidecomposability, invariant sets and stabilisation."""


@groupoid.command(name="typesemigroup")
@click.argument("source")
@click.option("--f", "f", required=True, help="Left function, e.g. 'p + q'")
@click.option("--g", "g", required=True, help="Right function")
@click.option(
    "--relation",
    type=click.Choice(sorted(RELATIONS)),
    default="precsim",
    show_default=True,
    help="sim: f ∼ g; precsim: f ≼ g by bisections; criterion: ≼ via compact levels; leq: [f] <= [g] in S(G)",
)
@click.pass_context
def type_semigroup(ctx, source, f, g, relation):
    """Compare two functions in the type semigroup."""
    execute(ctx, "groupoid typesemigroup", source, {"f": f, "g": g, "relation": relation})


@groupoid.command()
@click.argument("source")
@click.pass_context
def ideals(ctx, source):
    """Invariant subsets, which of them are open, and the matching ideals."""
    execute(ctx, "groupoid ideals", source, {})


@groupoid.command()
@click.argument("source")
@click.option("--f", "f", required=True)
@click.pass_context
def sigma(ctx, source, f):
    """Total mass of f on every orbit."""
    execute(ctx, "groupoid sigma", source, {"f": f})


@groupoid.command()
@click.argument("source")
@click.option("--n", "n", default=3, show_default=True, type=click.IntRange(min=1))
@click.option("--f", "f", help="Compare f ≼ g before and after stabilising")
@click.option("--g", "g")
@click.pass_context
def stabilize(ctx, source, n, f, g):
    """Model of the stabilised groupoid on n copies of the points."""
    execute(ctx, "groupoid stabilize", source, {"n": n, "f": f, "g": g})


@groupoid.command()
@click.argument("source")
@click.pass_context
def unperforated(ctx, source):
    """Bounded search for a failure of almost unperforation."""
    execute(ctx, "groupoid unperforated", source, {})
