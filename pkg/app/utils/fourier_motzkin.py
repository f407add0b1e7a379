"""
Exact Fourier–Motzkin elimination over ``Fraction``.

Systems consist of rows ``a·x <= b`` and ``a·x == b``. Eliminating a variable
uses an equality row containing it when one exists (Gaussian substitution);
otherwise every pair of a positive and a negative row is combined. Each step
is recorded (variable, method, sizes of the zero/positive/negative groups) so
the elimination can be replayed or reported.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

ZERO = Fraction(0)


@dataclass(frozen=True)
class FMRow:
    coefficients: Tuple[Fraction, ...]
    is_equality: bool
    rhs: Fraction

    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    def contradicts(self) -> bool:
        if not self.is_constant():
            return False
        return self.rhs != 0 if self.is_equality else self.rhs < 0


@dataclass
class EliminationStep:
    variable: str
    method: str
    zero: int
    positive: int
    negative: int
    rows_after: int


@dataclass
class EliminationTrace:
    steps: List[EliminationStep] = field(default_factory=list)
    contradiction: Optional[FMRow] = None


def _normalise(row: FMRow) -> FMRow:
    """Scale by a positive factor so the first nonzero coefficient is ±1."""
    lead = next((c for c in row.coefficients if c != 0), None)
    if lead is None:
        return row
    scale = abs(lead)
    if row.is_equality and lead < 0:
        scale = lead
    return FMRow(tuple(c / scale for c in row.coefficients), row.is_equality, row.rhs / scale)


class FourierMotzkin:
    """A linear system over named variables supporting exact projection."""

    def __init__(self, names: Sequence[str]):
        self.names = list(names)
        self.index = {name: j for j, name in enumerate(self.names)}
        self.rows: List[FMRow] = []
        self.trace = EliminationTrace()

    def add(self, coefficients: Mapping[str, object], sense: str, rhs) -> None:
        """Add ``Σ c_v·v (sense) rhs`` with sense one of <=, >=, ==."""
        vec = [ZERO] * len(self.names)
        for name, c in coefficients.items():
            vec[self.index[name]] += Fraction(c)
        rhs = Fraction(rhs)
        if sense == ">=":
            vec, rhs, sense = [-c for c in vec], -rhs, "<="
        if sense not in ("<=", "=="):
            raise ValueError(f"unknown sense {sense!r}")
        self._push(FMRow(tuple(vec), sense == "==", rhs))

    def add_nonnegativity(self, names: Optional[Iterable[str]] = None) -> None:
        for name in names if names is not None else self.names:
            self.add({name: -1}, "<=", 0)

    def _push(self, row: FMRow) -> None:
        row = _normalise(row)
        if row.is_constant() and not row.contradicts():
            return
        if row not in self.rows:
            self.rows.append(row)

    def contradiction(self) -> Optional[FMRow]:
        return next((row for row in self.rows if row.contradicts()), None)

    def eliminate(self, name: str) -> None:
        j = self.index[name]
        pivot = next(
            (row for row in self.rows if row.is_equality and row.coefficients[j] != 0),
            None,
        )
        old = self.rows
        self.rows = []
        if pivot is not None:
            for row in old:
                if row is pivot:
                    continue
                c = row.coefficients[j]
                if c == 0:
                    self._push(row)
                    continue
                f = c / pivot.coefficients[j]
                self._push(
                    FMRow(
                        tuple(a - f * p for a, p in zip(row.coefficients, pivot.coefficients)),
                        row.is_equality,
                        row.rhs - f * pivot.rhs,
                    )
                )
            self.trace.steps.append(
                EliminationStep(name, "substitution", 0, 0, 0, len(self.rows))
            )
            return
        zero = [row for row in old if row.coefficients[j] == 0]
        pos = [row for row in old if row.coefficients[j] > 0]
        neg = [row for row in old if row.coefficients[j] < 0]
        for row in zero:
            self._push(row)
        for p in pos:
            for n in neg:
                a, b = p.coefficients[j], -n.coefficients[j]
                self._push(
                    FMRow(
                        tuple(b * x + a * y for x, y in zip(p.coefficients, n.coefficients)),
                        False,
                        b * p.rhs + a * n.rhs,
                    )
                )
        self.trace.steps.append(
            EliminationStep(name, "pairing", len(zero), len(pos), len(neg), len(self.rows))
        )

    def project_onto(self, keep: Iterable[str], order: Optional[Sequence[str]] = None) -> "FourierMotzkin":
        """Eliminate every variable outside ``keep`` (in ``order`` when given)."""
        keep = set(keep)
        for name in order if order is not None else self.names:
            if name in keep:
                continue
            self.eliminate(name)
            found = self.contradiction()
            if found is not None:
                self.trace.contradiction = found
                break
        return self

    def is_feasible(self) -> bool:
        self.project_onto(())
        return self.contradiction() is None

    def bounds(self, name: str) -> Tuple[Optional[Fraction], Optional[Fraction]]:
        """Bounds on ``name`` read from rows that mention only that variable."""
        j = self.index[name]
        lo: Optional[Fraction] = None
        hi: Optional[Fraction] = None
        for row in self.rows:
            others = any(c != 0 for k, c in enumerate(row.coefficients) if k != j)
            c = row.coefficients[j]
            if others or c == 0:
                continue
            value = row.rhs / c
            if row.is_equality:
                lo = value if lo is None else max(lo, value)
                hi = value if hi is None else min(hi, value)
            elif c > 0:
                hi = value if hi is None else min(hi, value)
            else:
                lo = value if lo is None else max(lo, value)
        return lo, hi


def feasible(names: Sequence[str], rows: Iterable[Tuple[Dict[str, object], str, object]], nonnegative: bool = True) -> Tuple[bool, EliminationTrace]:
    """Decide feasibility of a small system by full elimination."""
    system = FourierMotzkin(names)
    for coefficients, sense, rhs in rows:
        system.add(coefficients, sense, rhs)
    if nonnegative:
        system.add_nonnegativity()
    ok = system.is_feasible()
    return ok, system.trace
