import logfire
import pytest

from app.models.monoid_models import Element, SearchBudget
from app.parsers.input_parser import InputParser

logfire.configure(send_to_logfire=False, console=False)


ZON = """
kind: finite-monoid
[elements] zero one inf
[zero] zero
[add]
zero one inf
one inf inf
inf inf inf
"""

CUNTZ2 = """
kind: graph
[vertices] v
[edges]
e1: v -> v
e2: v -> v
"""


def parse(text: str):
    return InputParser.parse_text(text.strip() + "\n")


def presentation(generators: str, *relations: str):
    body = "\n".join(relations)
    return parse(f"kind: monoid\n[generators] {generators}\n[relations]\n{body}").value


def el(text: str) -> Element:
    return InputParser.parse_element(text)


def cuntz(n: int) -> str:
    edges = "\n".join(f"e{k}: v -> v" for k in range(1, n + 1))
    return f"kind: graph\n[vertices] v\n[edges]\n{edges}\n"


@pytest.fixture
def budget() -> SearchBudget:
    return SearchBudget()


@pytest.fixture
def zon():
    return parse(ZON).value


@pytest.fixture
def cuntz_presentation():
    return presentation("v", "v == 2*v")


@pytest.fixture
def free_pair():
    return presentation("a b")
