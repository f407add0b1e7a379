"""
Exact arithmetic in the quadratic field ℚ(φ), φ = (1 + √5)/2.

Elements are stored as p + q·φ with rational p, q and φ² = φ + 1.
"""

from fractions import Fraction
from functools import total_ordering
from math import isqrt
from typing import Union

Number = Union[int, Fraction, "QPhi"]


@total_ordering
class QPhi:
    __slots__ = ("p", "q")

    def __init__(self, p=0, q=0):
        object.__setattr__(self, "p", Fraction(p))
        object.__setattr__(self, "q", Fraction(q))

    def __setattr__(self, name, value):
        raise AttributeError("QPhi is immutable")

    @classmethod
    def phi(cls) -> "QPhi":
        return cls(0, 1)

    @staticmethod
    def _lift(other: Number) -> "QPhi":
        if isinstance(other, QPhi):
            return other
        if isinstance(other, (int, Fraction)):
            return QPhi(other, 0)
        raise TypeError(f"cannot combine QPhi with {type(other).__name__}")

    def __add__(self, other: Number) -> "QPhi":
        other = self._lift(other)
        return QPhi(self.p + other.p, self.q + other.q)

    __radd__ = __add__

    def __neg__(self) -> "QPhi":
        return QPhi(-self.p, -self.q)

    def __sub__(self, other: Number) -> "QPhi":
        return self + (-self._lift(other))

    def __rsub__(self, other: Number) -> "QPhi":
        return self._lift(other) - self

    def __mul__(self, other: Number) -> "QPhi":
        other = self._lift(other)
        # (a + bφ)(c + dφ) = ac + (ad + bc)φ + bdφ², φ² = φ + 1
        a, b, c, d = self.p, self.q, other.p, other.q
        return QPhi(a * c + b * d, a * d + b * c + b * d)

    __rmul__ = __mul__

    def conjugate(self) -> "QPhi":
        """Galois conjugate: φ ↦ 1 − φ."""
        return QPhi(self.p + self.q, -self.q)

    def norm(self) -> Fraction:
        """N(p + qφ) = p² + pq − q², always rational."""
        return self.p * self.p + self.p * self.q - self.q * self.q

    def inverse(self) -> "QPhi":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("QPhi division by zero")
        c = self.conjugate()
        return QPhi(c.p / n, c.q / n)

    def __truediv__(self, other: Number) -> "QPhi":
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other: Number) -> "QPhi":
        return self._lift(other) * self.inverse()

    def __pow__(self, exponent: int) -> "QPhi":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result, base = QPhi(1), self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def sign(self) -> int:
        """Exact sign of p + qφ = (A + B√5)/2 with A = 2p + q, B = q."""
        a = 2 * self.p + self.q
        b = self.q
        if a >= 0 and b >= 0:
            return 0 if a == 0 and b == 0 else 1
        if a <= 0 and b <= 0:
            return -1
        # opposite signs: compare A² with 5B²
        lhs, rhs = a * a, 5 * b * b
        if a > 0:
            return 1 if lhs > rhs else -1
        return 1 if rhs > lhs else -1

    def __eq__(self, other) -> bool:
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self.p == other.p and self.q == other.q

    def __hash__(self) -> int:
        return hash((self.p, self.q))

    def __lt__(self, other: Number) -> bool:
        return (self - self._lift(other)).sign() < 0

    def is_rational(self) -> bool:
        return self.q == 0

    def bracket(self, digits: int = 30) -> tuple:
        """Rational interval containing the value, of width below 10^-digits."""
        # √5 bracketed by integer square roots of 5·10^(2d)
        scale = 10**digits
        lo = Fraction(isqrt(5 * scale * scale), scale)
        hi = lo + Fraction(1, scale)
        phi_lo, phi_hi = (1 + lo) / 2, (1 + hi) / 2
        if self.q >= 0:
            return self.p + self.q * phi_lo, self.p + self.q * phi_hi
        return self.p + self.q * phi_hi, self.p + self.q * phi_lo

    def __repr__(self) -> str:
        return f"QPhi({self.p}, {self.q})"

    def __str__(self) -> str:
        return format_qphi(self)


def _frac(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_qphi(value: QPhi) -> str:
    """Render as "p/q+r/s*phi" (the rational part alone when q = 0)."""
    if value.q == 0:
        return _frac(value.p)
    sign = "+" if value.q > 0 else "-"
    return f"{_frac(value.p)}{sign}{_frac(abs(value.q))}*phi"


def parse_qphi(text: str) -> QPhi:
    text = text.replace(" ", "")
    if not text.endswith("*phi"):
        return QPhi(Fraction(text), 0)
    body = text[: -len("*phi")]
    # split at the last sign that is not the leading one
    for i in range(len(body) - 1, 0, -1):
        if body[i] in "+-":
            return QPhi(Fraction(body[:i]), Fraction(body[i:]))
    return QPhi(0, Fraction(body))
