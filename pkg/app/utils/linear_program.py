"""
Exact rational simplex (two phases, Bland's rule) with dual certificates.

Problems have the shape

    maximise c·x  subject to  a_r·x (<=|>=|==) b_r  for every row r,  x >= 0.

Every answer carries a replayable certificate:

* INFEASIBLE: Farkas multipliers λ with λ_r >= 0 on <= rows, λ_r <= 0 on >=
  rows, free on == rows, such that Σ λ_r a_r >= 0 componentwise and
  Σ λ_r b_r < 0;
* OPTIMAL: a primal point and multipliers λ (same sign rules) with
  Σ λ_r a_r >= c componentwise and Σ λ_r b_r equal to the optimum;
* UNBOUNDED: a feasible point and a ray d >= 0 with every a_r·d keeping the
  row feasible and c·d > 0.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class Sense(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "=="


class LPStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass(frozen=True)
class Row:
    coefficients: tuple
    sense: Sense
    rhs: Fraction
    label: str = ""


@dataclass
class LPResult:
    status: LPStatus
    point: Optional[List[Fraction]] = None
    optimum: Optional[Fraction] = None
    multipliers: Optional[List[Fraction]] = None
    ray: Optional[List[Fraction]] = None
    pivots: int = 0
    trace: List[str] = field(default_factory=list)


class LinearProgram:
    """A small dense LP over ``Fraction``; rows are added one at a time."""

    def __init__(self, num_vars: int, names: Optional[Sequence[str]] = None):
        self.num_vars = num_vars
        self.names = list(names) if names else [f"x{j}" for j in range(num_vars)]
        self.rows: List[Row] = []
        self.objective: List[Fraction] = [ZERO] * num_vars

    def add_row(self, coefficients: Sequence, sense: Sense, rhs, label: str = "") -> None:
        if len(coefficients) != self.num_vars:
            raise ValueError("row width does not match the number of variables")
        self.rows.append(
            Row(tuple(Fraction(c) for c in coefficients), Sense(sense), Fraction(rhs), label)
        )

    def set_objective(self, coefficients: Sequence) -> None:
        self.objective = [Fraction(c) for c in coefficients]

    def solve(self) -> LPResult:
        return _Tableau(self).run()


class _Tableau:
    def __init__(self, lp: LinearProgram):
        self.lp = lp
        m, n = len(lp.rows), lp.num_vars
        self.m, self.n = m, n
        # columns: originals [0, n), slack/surplus per inequality row, artificials per row
        self.flip = []
        slack_cols = []
        ncols = n
        for row in lp.rows:
            self.flip.append(-1 if row.rhs < 0 else 1)
            if row.sense != Sense.EQ:
                slack_cols.append(ncols)
                ncols += 1
            else:
                slack_cols.append(None)
        self.slack_cols = slack_cols
        self.art_start = ncols
        self.ncols = ncols + m
        self.T: List[List[Fraction]] = []
        for r, row in enumerate(lp.rows):
            s = self.flip[r]
            line = [ZERO] * (self.ncols + 1)
            for j, a in enumerate(row.coefficients):
                line[j] = s * a
            if slack_cols[r] is not None:
                # a·x + t = b for <=, a·x - t = b for >=
                sign = ONE if row.sense == Sense.LE else -ONE
                line[slack_cols[r]] = s * sign
            line[self.art_start + r] = ONE
            line[-1] = s * row.rhs
            self.T.append(line)
        self.basis = [self.art_start + r for r in range(m)]
        self.pivots = 0
        self.trace: List[str] = []

    def _reduced_costs(self, cost: List[Fraction], allowed: int) -> List[Fraction]:
        d = []
        for j in range(allowed):
            v = cost[j]
            for i in range(self.m):
                if self.T[i][j]:
                    v -= cost[self.basis[i]] * self.T[i][j]
            d.append(v)
        return d

    def _pivot(self, i: int, j: int) -> None:
        row = self.T[i]
        piv = row[j]
        self.T[i] = row = [v / piv for v in row]
        for k in range(self.m):
            if k != i and self.T[k][j]:
                f = self.T[k][j]
                self.T[k] = [a - f * b for a, b in zip(self.T[k], row)]
        self.trace.append(f"pivot row {i}: {self.basis[i]} -> {j}")
        self.basis[i] = j
        self.pivots += 1

    def _minimise(self, cost: List[Fraction], allowed: int) -> Optional[int]:
        """Bland's rule on columns [0, allowed). Returns an unbounded column or None."""
        while True:
            d = self._reduced_costs(cost, allowed)
            entering = next((j for j in range(allowed) if d[j] < 0), None)
            if entering is None:
                return None
            best = None
            for i in range(self.m):
                a = self.T[i][entering]
                if a > 0:
                    key = (self.T[i][-1] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return entering
            self._pivot(best[1], entering)

    def _duals(self, cost: List[Fraction]) -> List[Fraction]:
        """y = c_B B^{-1}, read off the artificial columns; mapped to original rows."""
        y = []
        for r in range(self.m):
            col = self.art_start + r
            y.append(sum((cost[self.basis[i]] * self.T[i][col] for i in range(self.m)), ZERO))
        return [-self.flip[r] * y[r] for r in range(self.m)]

    def _point(self) -> List[Fraction]:
        x = [ZERO] * self.n
        for i, b in enumerate(self.basis):
            if b < self.n:
                x[b] = self.T[i][-1]
        return x

    def run(self) -> LPResult:
        lp = self.lp
        phase1 = [ZERO] * self.art_start + [ONE] * self.m
        self._minimise(phase1, self.ncols)
        infeasibility = sum((phase1[b] * self.T[i][-1] for i, b in enumerate(self.basis)), ZERO)
        if infeasibility > 0:
            return LPResult(
                status=LPStatus.INFEASIBLE,
                multipliers=self._duals(phase1),
                pivots=self.pivots,
                trace=self.trace,
            )
        self._drive_out_artificials()
        # phase 2 minimises -c·x; artificial columns never re-enter
        phase2 = [-c for c in lp.objective] + [ZERO] * (self.ncols - self.n)
        unbounded_col = self._minimise(phase2, self.art_start)
        point = self._point()
        if unbounded_col is not None:
            ray = [ZERO] * self.n
            if unbounded_col < self.n:
                ray[unbounded_col] = ONE
            for i, b in enumerate(self.basis):
                if b < self.n:
                    ray[b] = -self.T[i][unbounded_col]
            return LPResult(
                status=LPStatus.UNBOUNDED,
                point=point,
                ray=ray,
                pivots=self.pivots,
                trace=self.trace,
            )
        optimum = sum((c * v for c, v in zip(lp.objective, point)), ZERO)
        return LPResult(
            status=LPStatus.OPTIMAL,
            point=point,
            optimum=optimum,
            multipliers=self._duals(phase2),
            pivots=self.pivots,
            trace=self.trace,
        )

    def _drive_out_artificials(self) -> None:
        for i in range(self.m):
            if self.basis[i] >= self.art_start:
                for j in range(self.art_start):
                    if self.T[i][j] != 0:
                        self._pivot(i, j)
                        break


def check_farkas(rows: Sequence[Row], multipliers: Sequence[Fraction], num_vars: int) -> bool:
    """Replay an infeasibility certificate."""
    if len(rows) != len(multipliers):
        return False
    for row, lam in zip(rows, multipliers):
        if row.sense == Sense.LE and lam < 0:
            return False
        if row.sense == Sense.GE and lam > 0:
            return False
    for j in range(num_vars):
        if sum((lam * row.coefficients[j] for row, lam in zip(rows, multipliers)), ZERO) < 0:
            return False
    return sum((lam * row.rhs for row, lam in zip(rows, multipliers)), ZERO) < 0


def check_upper_bound(
    rows: Sequence[Row],
    multipliers: Sequence[Fraction],
    objective: Sequence[Fraction],
    bound: Fraction,
) -> bool:
    """Replay a dual certificate that c·x <= bound on the feasible region."""
    if len(rows) != len(multipliers):
        return False
    for row, lam in zip(rows, multipliers):
        if row.sense == Sense.LE and lam < 0:
            return False
        if row.sense == Sense.GE and lam > 0:
            return False
    for j, c in enumerate(objective):
        if sum((lam * row.coefficients[j] for row, lam in zip(rows, multipliers)), ZERO) < c:
            return False
    return sum((lam * row.rhs for row, lam in zip(rows, multipliers)), ZERO) <= bound


def satisfies(rows: Sequence[Row], point: Sequence[Fraction]) -> bool:
    if any(v < 0 for v in point):
        return False
    for row in rows:
        lhs = sum((a * v for a, v in zip(row.coefficients, point)), ZERO)
        if row.sense == Sense.LE and lhs > row.rhs:
            return False
        if row.sense == Sense.GE and lhs < row.rhs:
            return False
        if row.sense == Sense.EQ and lhs != row.rhs:
            return False
    return True

