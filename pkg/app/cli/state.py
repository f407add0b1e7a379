"""
``typesemi state ...``: states, the Tarski dichotomy and the Rørdam–Tarski
criterion for stable domination.
"""

import random

import click

from app.cli.operations import build_report, dumped, element_list, operation, require
from app.cli.runner import execute
from app.models.judgement_models import Verdict
from app.models.monoid_models import Element, FiniteMonoid
from app.models.state_models import LPStatusKind
from app.parsers.input_parser import InputParser
from app.services.finite_monoid_service import FiniteMonoidService
from app.services.monoid_service import MonoidService
from app.services.sampling_service import SamplingService
from app.services.state_service import StateService
from app.services.tarski_service import TarskiService
from app.services.verify_service import VerifyService


def _load(source: str):
    parsed = InputParser.load(source)
    subject = InputParser.monoid_subject(parsed)
    if isinstance(subject, FiniteMonoid):
        subject = FiniteMonoidService.export_finite_monoid(subject)
    return parsed, subject


@operation("state find")
def find_report(source, args, settings):
    parsed, p = _load(source)
    y = InputParser.monoid_element(parsed, require(args, "y"))
    outcome = StateService.find_state(p, y, settings.budget)
    return build_report(
        "state find", parsed, args, settings, verdict=outcome.status.value, payload={"outcome": dumped(outcome)}
    )


@operation("state sup")
def sup_report(source, args, settings):
    parsed, p = _load(source)
    x = InputParser.monoid_element(parsed, require(args, "x"))
    y = InputParser.monoid_element(parsed, require(args, "y"))
    outcome = StateService.sup_state_value(p, x, y)
    return build_report(
        "state sup", parsed, args, settings, verdict=outcome.status.value, payload={"outcome": dumped(outcome)}
    )


@operation("state rordam-tarski")
def rordam_tarski_report(source, args, settings):
    parsed, p = _load(source)
    x = InputParser.monoid_element(parsed, require(args, "x"))
    y = InputParser.monoid_element(parsed, require(args, "y"))
    judgement = TarskiService.rordam_tarski(p, x, y, settings.budget)
    return build_report("state rordam-tarski", parsed, args, settings, judgement=judgement)


@operation("state extendA1")
def extend_report(source, args, settings):
    parsed, p = _load(source)
    x = InputParser.monoid_element(parsed, require(args, "x"))
    y = InputParser.monoid_element(parsed, require(args, "y"))
    s0 = element_list(parsed, args.get("s0")) or [Element.generator(g) for g in p.generators]
    result = StateService.extend_state(p, s0, x, y, settings.budget)
    if not result.consistent:
        verdict = Verdict.REFUTED.value
    elif result.complete:
        verdict = Verdict.PROVED.value
    else:
        verdict = Verdict.UNKNOWN.value
    return build_report("state extendA1", parsed, args, settings, verdict=verdict, payload={"extension": dumped(result)})


@operation("state nontrivial")
def nontrivial_report(source, args, settings):
    parsed, p = _load(source)
    judgement = StateService.has_nontrivial_state(p, settings.budget)
    return build_report("state nontrivial", parsed, args, settings, judgement=judgement)


@operation("state duality")
def duality_report(source, args, settings):
    """
    Seeded check that no element is both paradoxical and normalised by a
    state; on finite tables exactly one of the two must hold.
    """
    rng = random.Random(settings.seed)
    count = int(args.get("count", "200"))
    tally = {"paradoxical": 0, "state": 0, "neither": 0}
    contradictions = []
    replay_failures = []

    for index in range(count):
        p = SamplingService.random_presentation(rng)
        for g in p.generators:
            unit = Element.generator(g)
            judgement = MonoidService.is_paradoxical(p, unit, settings.budget)
            failure = VerifyService.verify(judgement, p)
            if failure is not None:
                replay_failures.append(f"case {index}, {g}: {failure}")
            feasible = StateService.find_state(p, unit).status == LPStatusKind.FEASIBLE
            paradoxical = judgement.verdict == Verdict.PROVED
            if paradoxical and feasible:
                contradictions.append(f"case {index}: {g} is paradoxical and normalised by a state")
            tally["paradoxical" if paradoxical else "state" if feasible else "neither"] += 1

    tables = 0
    for size in range(1, int(args.get("table_size", "0")) + 1):
        for m in FiniteMonoidService.enumerate_finite_monoids(size):
            tables += 1
            p = FiniteMonoidService.export_finite_monoid(m)
            for a in m.nonzero():
                if FiniteMonoidService.is_zero_class(m, a):
                    continue
                unit = FiniteMonoidService.unit(m, a)
                paradoxical = FiniteMonoidService.paradoxical(m, unit).verdict == Verdict.PROVED
                feasible = StateService.find_state(p, unit).status == LPStatusKind.FEASIBLE
                if paradoxical == feasible:
                    contradictions.append(f"table {m.elements} {m.add} {m.leq}: {m.elements[a]} has paradoxical={paradoxical}, state={feasible}")

    payload = {
        "count": count,
        "tables": tables,
        "tally": tally,
        "contradictions": contradictions,
        "replay_failures": replay_failures,
    }
    verdict = "FAIL" if contradictions or replay_failures else "PASS"
    return build_report("state duality", None, args, settings, verdict=verdict, payload=payload)


# ----------------------------------------------------------------------
# click surface
# ----------------------------------------------------------------------


@click.group()
def state():
    """States with value 1 on a target, their suprema and extensions."""


@state.command()
@click.argument("source")
@click.option("--y", "y", required=True, help="Element normalised to 1")
@click.pass_context
def find(ctx, source, y):
    """Find a state with ν(y) = 1 or a Farkas certificate that none exists."""
    execute(ctx, "state find", source, {"y": y})


@state.command()
@click.argument("source")
@click.option("--x", "x", required=True, help="Element to maximise")
@click.option("--y", "y", required=True, help="Element normalised to 1")
@click.pass_context
def sup(ctx, source, x, y):
    """Maximise ν(x) over states with ν(y) = 1."""
    execute(ctx, "state sup", source, {"x": x, "y": y})


@state.command(name="rordam-tarski")
@click.argument("source")
@click.option("--x", "x", required=True)
@click.option("--y", "y", required=True)
@click.pass_context
def rordam_tarski(ctx, source, x, y):
    """Decide x <_s y by derivation or by a separating state."""
    execute(ctx, "state rordam-tarski", source, {"x": x, "y": y})


@state.command(name="extendA1")
@click.argument("source")
@click.option("--x", "x", required=True, help="Element whose extended value is reported")
@click.option("--y", "y", required=True, help="Element normalised to 1")
@click.option("--s0", "s0", multiple=True, help="Element to extend over, in order (repeatable); defaults to the generators")
@click.pass_context
def extend_a1(ctx, source, x, y, s0):
    """Extend ν(y) = 1 element by element from comparison certificates."""
    execute(ctx, "state extendA1", source, {"x": x, "y": y, "s0": "; ".join(s0) if s0 else None})


@state.command()
@click.argument("source")
@click.pass_context
def nontrivial(ctx, source):
    """Decide whether some state is finite and nonzero on a generator."""
    execute(ctx, "state nontrivial", source, {})


@state.command()
@click.option("--count", default=200, show_default=True, type=click.IntRange(min=0), help="Random presentations to draw")
@click.option("--table-size", default=0, show_default=True, type=click.IntRange(min=0, max=6), help="Also check every finite table up to this size")
@click.pass_context
def duality(ctx, count, table_size):
    """Seeded paradox/state duality suite."""
    execute(ctx, "state duality", None, {"count": count, "table_size": table_size})
