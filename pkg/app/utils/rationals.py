"""
Exact extended rationals: ``Fraction`` values plus a single absorbing ``INF``.

States take values in [0, ∞]; every verdict-bearing computation in the
package runs on these values and never on floats.
"""

from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Mapping, Union


@total_ordering
class _Infinity:
    """The value ∞ of [0, ∞]: absorbs addition, exceeds every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "INF"

    def __hash__(self) -> int:
        return hash("INF")

    def __eq__(self, other) -> bool:
        return other is self

    def __lt__(self, other) -> bool:
        return False

    def __gt__(self, other) -> bool:
        return other is not self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __mul__(self, other):
        if other == 0:
            return Fraction(0)
        return self

    __rmul__ = __mul__

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

ExtRational = Union[Fraction, _Infinity]


def is_inf(value) -> bool:
    return value is INF


def ext(value) -> ExtRational:
    """Coerce ints, Fractions, rational strings and INF into an ExtRational."""
    if value is INF:
        return INF
    if isinstance(value, str):
        return parse_ext(value)
    return Fraction(value)


def ext_le(a: ExtRational, b: ExtRational) -> bool:
    if b is INF:
        return True
    if a is INF:
        return False
    return a <= b


def ext_lt(a: ExtRational, b: ExtRational) -> bool:
    if a is INF:
        return False
    if b is INF:
        return True
    return a < b


def ext_sum(values: Iterable[ExtRational]) -> ExtRational:
    total: ExtRational = Fraction(0)
    for value in values:
        if value is INF:
            return INF
        total += value
    return total


def evaluate(values: Mapping[str, ExtRational], coefficients: Mapping[str, int]) -> ExtRational:
    """Additive extension: Σ c_g·ν(g), with 0·∞ = 0."""
    return ext_sum(
        INF if values[g] is INF else values[g] * c
        for g, c in coefficients.items()
        if c
    )


def fmt(value: ExtRational) -> str:
    """Render as "p/q", "p" or "INF"."""
    if value is INF:
        return "INF"
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_ext(text: str) -> ExtRational:
    text = text.strip()
    if text.upper() in ("INF", "∞"):
        return INF
    return Fraction(text)
