"""
``typesemi monoid ...``: decision procedures on preordered monoids.

Every command accepts a monoid presentation or a finite monoid table, and
also a groupoid model (through its type semigroup presentation) or a graph
(through W(Γ, E)); elements are written in the input's own vocabulary.
"""

from typing import Optional

import click

from app.cli.operations import (
    Arguments,
    RunSettings,
    build_report,
    dumped,
    element_list,
    operation,
    require,
    truth,
)
from app.cli.runner import execute
from app.config.analysis_config import analysis_config
from app.exceptions import ValidationException
from app.models.error_models import ErrorCode
from app.models.monoid_models import FiniteMonoid, MonoidPresentation
from app.parsers.input_parser import InputParser
from app.services.finite_monoid_service import FiniteMonoidService
from app.services.monoid_service import MonoidService


def _load(source: str):
    parsed = InputParser.load(source)
    return parsed, InputParser.monoid_subject(parsed)


def _presentation(subject) -> MonoidPresentation:
    if isinstance(subject, FiniteMonoid):
        return FiniteMonoidService.export_finite_monoid(subject)
    return subject


def _table(subject, name: str) -> FiniteMonoid:
    if not isinstance(subject, FiniteMonoid):
        raise ValidationException(
            message=f"{name} needs a finite monoid table",
            error_code=ErrorCode.INVALID_INPUT,
            field="kind",
            constraint="finite-monoid",
        )
    return subject


def _pair(name: str, method):
    def builder(source: Optional[str], args: Arguments, settings: RunSettings):
        parsed, p = _load(source)
        x = InputParser.monoid_element(parsed, require(args, "x"))
        y = InputParser.monoid_element(parsed, require(args, "y"))
        return build_report(name, parsed, args, settings, judgement=method(p, x, y, settings.budget))

    return operation(name)(builder)


def _single(name: str, method):
    def builder(source: Optional[str], args: Arguments, settings: RunSettings):
        parsed, p = _load(source)
        x = InputParser.monoid_element(parsed, require(args, "elem"))
        return build_report(name, parsed, args, settings, judgement=method(p, x, settings.budget))

    return operation(name)(builder)


_pair("monoid leq", MonoidService.leq)
_pair("monoid ideal", MonoidService.ideal_membership)
_pair("monoid dominated", MonoidService.is_stably_dominated)
_single("monoid paradoxical", MonoidService.is_paradoxical)
_single("monoid proper-inf", MonoidService.is_properly_infinite)
_single("monoid order-unit", MonoidService.is_order_unit)


@operation("monoid simple")
def simple_report(source, args, settings):
    parsed, p = _load(source)
    return build_report("monoid simple", parsed, args, settings, judgement=MonoidService.is_simple(p, settings.budget))


@operation("monoid congruent")
def congruent_report(source, args, settings):
    parsed, p = _load(source)
    x = InputParser.monoid_element(parsed, require(args, "x"))
    y = InputParser.monoid_element(parsed, require(args, "y"))
    judgement = MonoidService.congruent(
        _presentation(p), x, y, settings.budget, modulus_cap=analysis_config.modulus_cap
    )
    return build_report("monoid congruent", parsed, args, settings, judgement=judgement)


@operation("monoid oracle")
def oracle_report(source, args, settings):
    parsed, p = _load(source)
    x = InputParser.monoid_element(parsed, require(args, "x"))
    y = InputParser.monoid_element(parsed, require(args, "y"))
    judgement = MonoidService.brute_force_leq_oracle(_presentation(p), x, y, settings.budget)
    return build_report("monoid oracle", parsed, args, settings, judgement=judgement)


@operation("monoid quotient")
def quotient_report(source, args, settings):
    parsed, p = _load(source)
    gens = element_list(parsed, require(args, "gens"))
    quotient = MonoidService.quotient_by_ideal(_presentation(p), gens)
    return build_report("monoid quotient", parsed, args, settings, payload={"presentation": dumped(quotient)})


@operation("monoid unperforated")
def unperforated_report(source, args, settings):
    parsed, p = _load(source)
    judgement = MonoidService.check_almost_unperforated(
        p, settings.budget, max_coefficient=int(args.get("max_coeff", "1"))
    )
    return build_report("monoid unperforated", parsed, args, settings, judgement=judgement)


@operation("monoid lemmas")
def lemmas_report(source, args, settings):
    parsed, p = _load(source)
    table = _table(p, "monoid lemmas")
    lemmas = FiniteMonoidService.check_lemmas(table)
    plain, plain_witness = FiniteMonoidService.check_plain_paradoxes(table)
    purely, purely_witness = FiniteMonoidService.check_purely_infinite(table)
    payload = {
        "lemmas": dumped(lemmas),
        "plain_paradoxes": truth(plain),
        "purely_infinite": truth(purely),
        "conical": truth(FiniteMonoidService.is_conical(table)),
        "ordered_quotient": dumped(FiniteMonoidService.ordered_quotient(table)),
    }
    if plain_witness is not None:
        payload["plain_paradoxes_witness"] = plain_witness
    if purely_witness is not None:
        payload["purely_infinite_witness"] = purely_witness
    verdict = "PASS" if lemmas.all_hold else "FAIL"
    return build_report("monoid lemmas", parsed, args, settings, verdict=verdict, payload=payload)


# ----------------------------------------------------------------------
# click surface
# ----------------------------------------------------------------------


@click.group()
def monoid():
    """Preordered monoids: order, ideals, paradoxes and simplicity."""


def _pair_command(name: str, help_text: str):
    @monoid.command(name=name, help=help_text)
    @click.argument("source")
    @click.option("--x", "x", required=True, help="Left element, e.g. '2*a + b'")
    @click.option("--y", "y", required=True, help="Right element")
    @click.pass_context
    def command(ctx, source, x, y):
        execute(ctx, f"monoid {name}", source, {"x": x, "y": y})

    return command


def _single_command(name: str, help_text: str):
    @monoid.command(name=name, help=help_text)
    @click.argument("source")
    @click.option("--elem", required=True, help="Element, e.g. 'v' or '2*a'")
    @click.pass_context
    def command(ctx, source, elem):
        execute(ctx, f"monoid {name}", source, {"elem": elem})

    return command


_pair_command("leq", "Decide x <= y.")
_pair_command("ideal", "Decide whether x lies in the ideal generated by y.")
_pair_command("dominated", "Decide x <_s y, i.e. (n+1)x <= ny for some n.")
_pair_command("congruent", "Decide x ~ y in the congruence of the equality relations.")
_pair_command("oracle", "Brute-force x <= y by exhaustive reachability.")
_single_command("paradoxical", "Decide whether (n+1)x <= nx for some n.")
_single_command("proper-inf", "Decide whether 2x <= x.")
_single_command("order-unit", "Decide whether the ideal generated by y is everything.")


@monoid.command()
@click.argument("source")
@click.pass_context
def simple(ctx, source):
    """Decide whether every nonzero element is an order unit."""
    execute(ctx, "monoid simple", source, {})


@monoid.command()
@click.argument("source")
@click.option("--gen", "gens", multiple=True, required=True, help="Ideal generator (repeatable)")
@click.pass_context
def quotient(ctx, source, gens):
    """Presentation of the quotient by the ideal generated by the given elements."""
    execute(ctx, "monoid quotient", source, {"gens": "; ".join(gens)})


@monoid.command()
@click.argument("source")
@click.option("--max-coeff", default=1, show_default=True, type=click.IntRange(min=1), help="Largest coefficient of candidate elements")
@click.pass_context
def unperforated(ctx, source, max_coeff):
    """Look for a failure of almost unperforation."""
    execute(ctx, "monoid unperforated", source, {"max_coeff": max_coeff})


@monoid.command()
@click.argument("source")
@click.pass_context
def lemmas(ctx, source):
    """Exhaustively check the structural lemmas on a finite monoid table."""
    execute(ctx, "monoid lemmas", source, {})
