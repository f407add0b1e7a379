"""
The ordered monoid of bounded lower semicontinuous ℕ-valued functions over a
finite space, kept in level-set normal form.
"""

import time
from itertools import combinations
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import logfire

from app.config.analysis_config import analysis_config
from app.exceptions import (
    BaseAnalysisException,
    PreconditionException,
    ValidationException,
    premise_violated,
    search_cap_exceeded,
    separation_failed,
)
from app.models.error_models import ErrorCode
from app.models.lattice_models import (
    Decomposition,
    DimensionReport,
    FiniteSpace,
    LscFn,
    PointSet,
    as_points,
)
from app.utils.rationals import INF, ExtRational, ext, ext_le, ext_sum, fmt

Compactness = Callable[[FrozenSet[str]], bool]


def _always_compact(subset: FrozenSet[str]) -> bool:
    return True


def _show(points: Iterable[str]) -> str:
    return "{" + ",".join(sorted(points)) + "}"


class LatticeService:
    """
    Service class for F(O) over finite spaces
    """

    @staticmethod
    def check_opens(space: FiniteSpace, sets: Sequence[Iterable[str]], field: str) -> List[FrozenSet[str]]:
        out = []
        for index, candidate in enumerate(sets):
            subset = frozenset(candidate)
            if not space.is_open(subset):
                raise ValidationException(
                    message=f"{field}[{index}] = {_show(subset)} is not a member of O",
                    error_code=ErrorCode.INVALID_SPACE,
                    field=field,
                    value=sorted(subset),
                    constraint="member of the open lattice",
                )
            out.append(subset)
        return out

    @staticmethod
    def from_values(space: FiniteSpace, values: Mapping[str, int]) -> LscFn:
        """Level-set chain of a point → ℕ map; every level set must be in O."""
        top = max(values.values(), default=0)
        chain = []
        for level in range(1, top + 1):
            chain.append(frozenset(x for x, v in values.items() if v >= level))
        LatticeService.check_opens(space, chain, "level set")
        return LscFn(chain=tuple(as_points(u) for u in chain))

    @staticmethod
    def normal_form(space: FiniteSpace, terms: Sequence[Iterable[str]]) -> LscFn:
        """
        The unique decreasing chain with the same pointwise sum as Σ 1_{terms}.

        Raises:
            ValidationException: If a term is not a member of O
        """
        opens = LatticeService.check_opens(space, terms, "term")
        values: Dict[str, int] = {x: 0 for x in space.points}
        for u in opens:
            for x in u:
                values[x] += 1
        return LatticeService.from_values(space, values)

    @staticmethod
    def add(space: FiniteSpace, f: LscFn, g: LscFn) -> LscFn:
        return LatticeService.normal_form(space, list(f.chain) + list(g.chain))

    @staticmethod
    def join(f: LscFn, g: LscFn) -> LscFn:
        depth = max(len(f.chain), len(g.chain))
        chain = []
        for k in range(depth):
            upper = set(f.chain[k]) if k < len(f.chain) else set()
            lower = set(g.chain[k]) if k < len(g.chain) else set()
            chain.append(as_points(upper | lower))
        return LscFn(chain=tuple(chain))

    @staticmethod
    def meet(f: LscFn, g: LscFn) -> LscFn:
        chain = []
        for upper, lower in zip(f.chain, g.chain):
            level = as_points(set(upper) & set(lower))
            if not level:
                break
            chain.append(level)
        return LscFn(chain=tuple(chain))

    @staticmethod
    def evaluate(f: LscFn, point: str) -> int:
        return f.value(point)

    @staticmethod
    def leq(space: FiniteSpace, f: LscFn, g: LscFn) -> bool:
        return all(f.value(x) <= g.value(x) for x in space.points)

    @staticmethod
    def closure_fn(space: FiniteSpace, g: LscFn) -> Dict[str, int]:
        """cl g = Σ 1_{cl U_k} over the normal-form chain of g."""
        out = {x: 0 for x in space.points}
        for level in g.chain:
            for x in space.closure(level):
                out[x] += 1
        return out

    @staticmethod
    def way_below(
        space: FiniteSpace, g: LscFn, f: LscFn, compact: Optional[Compactness] = None
    ) -> bool:
        """g ≪ f: cl g <= f pointwise and the support of cl g is compact."""
        compact = compact or _always_compact
        closed = LatticeService.closure_fn(space, g)
        if any(closed[x] > f.value(x) for x in space.points):
            return False
        return compact(frozenset(x for x, v in closed.items() if v))

    @staticmethod
    def largest_way_below(space: FiniteSpace, f: LscFn) -> LscFn:
        """
        Σ 1_{W_k} with W_k the largest member of O whose closure lies in U_k.

        Closure distributes over the finite union of minimal neighbourhoods
        making up an open, so W_k is the union of those N(x) that qualify.
        """
        terms = []
        for level in f.chain:
            inner: FrozenSet[str] = frozenset()
            for cell in space.neighbourhoods.values():
                if space.closure(cell) <= set(level):
                    inner |= cell
            terms.append(inner)
        return LatticeService.normal_form(space, terms)

    @staticmethod
    def _excess_point(
        space: FiniteSpace, ks: Sequence[FrozenSet[str]], vs: Sequence[FrozenSet[str]]
    ) -> Optional[Tuple[str, int, int]]:
        for x in space.points:
            covered = sum(1 for k in ks if x in k)
            available = sum(1 for v in vs if x in v)
            if covered > available:
                return x, covered, available
        return None

    @staticmethod
    def _strata(
        points: Iterable[str], ks: Sequence[FrozenSet[str]], vs: Sequence[FrozenSet[str]]
    ) -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], List[str]]:
        """Points where Σ 1_V = Σ 1_K > 0, grouped by (I, J) membership."""
        strata: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], List[str]] = {}
        for x in points:
            inside_k = tuple(i for i, k in enumerate(ks) if x in k)
            inside_v = tuple(j for j, v in enumerate(vs) if x in v)
            if inside_v and len(inside_k) == len(inside_v):
                strata.setdefault((inside_k, inside_v), []).append(x)
        return strata

    @staticmethod
    def _check_column(
        space: FiniteSpace, column: int, pieces: Sequence[FrozenSet[str]], target: FrozenSet[str], closures: bool
    ) -> None:
        shapes = [space.closure(w) if closures and w else w for w in pieces]
        for i, shape in enumerate(shapes):
            if not shape <= target:
                raise separation_failed(
                    {"column": column, "row": i, "piece": sorted(pieces[i]), "closure": sorted(shape), "target": sorted(target)}
                )
        for a, b in combinations(range(len(shapes)), 2):
            overlap = shapes[a] & shapes[b]
            if overlap:
                raise separation_failed(
                    {"column": column, "rows": [a, b], "overlap": sorted(overlap)}
                )

    @staticmethod
    def _peel(
        space: FiniteSpace, k_sets: Sequence[FrozenSet[str]], v_sets: Sequence[FrozenSet[str]], closures: bool
    ) -> Optional[Tuple[List[List[FrozenSet[str]]], list]]:
        """
        Peel the last V at each round: on the zero set of Σ 1_V − Σ 1_K each
        stratum K_I ∩ V_J is thickened to the union of minimal open
        neighbourhoods of its points and handed to the row that the sorted
        pairing I → J sends to the current column. The covered part is
        removed from every K_i before recursing on the remaining columns.

        Returns None when some point is never reached by a stratum.

        Raises:
            PreconditionException: SEPARATION_FAILED when a column's pieces
                collide or leave their V_j
        """
        n, m = len(k_sets), len(v_sets)
        remaining = list(k_sets)
        pieces: List[List[FrozenSet[str]]] = [[frozenset() for _ in range(m)] for _ in range(n)]
        matched = []
        for column in range(m - 1, -1, -1):
            strata = LatticeService._strata(space.points, remaining, v_sets[: column + 1])
            for (rows, cols), members in sorted(strata.items()):
                if column not in cols:
                    continue
                row = rows[cols.index(column)]
                thickened: FrozenSet[str] = frozenset()
                for x in members:
                    thickened |= space.neighbourhood(x)
                pieces[row][column] |= thickened
                matched.append((rows, cols))
            LatticeService._check_column(
                space, column, [pieces[i][column] for i in range(n)], v_sets[column], closures
            )
            remaining = [remaining[i] - pieces[i][column] for i in range(n)]

        leftover = [i for i in range(n) if remaining[i]]
        if leftover:
            logfire.info("lattice.decompose peeling left points uncovered", rows=leftover)
            return None
        return pieces, matched

    @staticmethod
    def _search_pieces(
        space: FiniteSpace,
        k_sets: Sequence[FrozenSet[str]],
        v_sets: Sequence[FrozenSet[str]],
        closures: bool,
        node_cap: int,
    ) -> Optional[List[List[FrozenSet[str]]]]:
        """
        Complete search over the columns each point of each K_i is sent to.

        A piece only ever needs the minimal neighbourhoods of the points
        assigned to it, and shrinking a piece keeps every constraint, so an
        exhausted search means no decomposition exists.

        Raises:
            BudgetExceededException: SEARCH_CAP_EXCEEDED after ``node_cap`` states
        """
        n, m = len(k_sets), len(v_sets)
        tasks = [(i, x) for i in range(n) for x in sorted(k_sets[i])]
        failed: Set[Tuple[int, Tuple[Tuple[FrozenSet[str], ...], ...]]] = set()
        nodes = 0

        def shape(w: FrozenSet[str]) -> FrozenSet[str]:
            return space.closure(w) if closures and w else w

        def fits(pieces, row: int, column: int) -> bool:
            own = shape(pieces[row][column])
            if not own <= v_sets[column]:
                return False
            return all(not own & shape(pieces[other][column]) for other in range(n) if other != row)

        def solve(index: int, pieces):
            nonlocal nodes
            if index == len(tasks):
                return pieces
            row, x = tasks[index]
            if any(x in w for w in pieces[row]):
                return solve(index + 1, pieces)
            key = (index, pieces)
            if key in failed:
                return None
            nodes += 1
            if nodes > node_cap:
                logfire.warn("lattice.decompose search cap reached", cap=node_cap)
                raise search_cap_exceeded("decompose", node_cap)
            for column in range(m):
                if x not in v_sets[column]:
                    continue
                grown = pieces[row][column] | space.neighbourhood(x)
                updated = pieces[row][:column] + (grown,) + pieces[row][column + 1 :]
                candidate = pieces[:row] + (updated,) + pieces[row + 1 :]
                if not fits(candidate, row, column):
                    continue
                found = solve(index + 1, candidate)
                if found is not None:
                    return found
            failed.add(key)
            return None

        empty = tuple(tuple(frozenset() for _ in range(m)) for _ in range(n))
        found = solve(0, empty)
        logfire.info("lattice.decompose search finished", nodes=nodes, found=found is not None)
        return None if found is None else [list(row) for row in found]

    @staticmethod
    def decompose(
        space: FiniteSpace,
        ks: Sequence[Iterable[str]],
        vs: Sequence[Iterable[str]],
        closures: bool = True,
        node_cap: Optional[int] = None,
    ) -> Decomposition:
        """
        Split K_1..K_n among V_1..V_m.

        Tries the stratum peeling first, which also records the index
        pairing it used. When peeling gets stuck a complete search over
        point-to-column assignments decides the question.

        Args:
            space: Finite space
            ks: Subsets K_i of the points
            vs: Members V_j of O
            closures: Require disjoint closures inside V_j (otherwise only
                disjoint pieces)
            node_cap: States the fallback search may expand; defaults to
                the configured node budget

        Returns:
            Decomposition: pieces W[i][j] with K_i ⊆ ⋃_j W[i][j]

        Raises:
            PreconditionException: PREMISE_VIOLATED when Σ 1_K exceeds Σ 1_V
                somewhere, SEPARATION_FAILED when no assignment keeps the
                pieces of every column apart inside V_j
            BudgetExceededException: SEARCH_CAP_EXCEEDED when the search
                stops before deciding
        """
        universe = frozenset(space.points)
        k_sets = []
        for index, candidate in enumerate(ks):
            subset = frozenset(candidate)
            if not subset <= universe:
                raise ValidationException(
                    message=f"K[{index}] is not a subset of the points",
                    error_code=ErrorCode.INVALID_SPACE,
                    field="K",
                    value=sorted(subset - universe),
                )
            k_sets.append(subset)
        v_sets = LatticeService.check_opens(space, vs, "V")

        excess = LatticeService._excess_point(space, k_sets, v_sets)
        if excess is not None:
            point, covered, available = excess
            raise premise_violated(
                "decompose",
                "Σ 1_K <= Σ 1_V pointwise",
                {"point": point, "sum_k": covered, "sum_v": available},
            )

        start_time = time.time()
        n, m = len(k_sets), len(v_sets)
        with logfire.span("lattice.decompose", n=n, m=m, points=len(space.points)):
            stuck: Optional[PreconditionException] = None
            try:
                peeled = LatticeService._peel(space, k_sets, v_sets, closures)
            except PreconditionException as e:
                if e.error_code != ErrorCode.SEPARATION_FAILED:
                    raise
                stuck, peeled = e, None

            if peeled is not None:
                pieces, matched = peeled
            else:
                found = LatticeService._search_pieces(
                    space, k_sets, v_sets, closures, node_cap or analysis_config.budget_nodes
                )
                if found is None:
                    logfire.warn("lattice.decompose has no solution", n=n, m=m)
                    raise stuck or separation_failed({"rows": n, "columns": m, "searched": True})
                pieces, matched = found, []

            logfire.info(
                "lattice.decompose done",
                strata=len(matched),
                peeled=peeled is not None,
                execution_time=round(time.time() - start_time, 4),
            )
            return Decomposition(
                pieces=tuple(tuple(as_points(w) for w in row) for row in pieces),
                sigma=tuple(matched),
            )

    @staticmethod
    def check_decomposition(
        space: FiniteSpace,
        ks: Sequence[Iterable[str]],
        vs: Sequence[Iterable[str]],
        decomposition: Decomposition,
        closures: bool = True,
    ) -> Optional[str]:
        """First failed postcondition of a decomposition, or None."""
        k_sets = [frozenset(k) for k in ks]
        v_sets = [frozenset(v) for v in vs]
        if len(decomposition.pieces) != len(k_sets):
            return "wrong number of rows"
        for i, k in enumerate(k_sets):
            row = decomposition.pieces[i]
            if len(row) != len(v_sets):
                return f"row {i} has the wrong number of columns"
            covered = frozenset().union(*(frozenset(w) for w in row)) if row else frozenset()
            if not k <= covered:
                return f"K[{i}] not covered at {sorted(k - covered)}"
            for j, w in enumerate(row):
                if not space.is_open(w):
                    return f"W[{i}][{j}] is not a member of O"
        for j, v in enumerate(v_sets):
            shapes = [
                space.closure(decomposition.piece(i, j)) if closures and decomposition.piece(i, j) else decomposition.piece(i, j)
                for i in range(len(k_sets))
            ]
            for i, shape in enumerate(shapes):
                if not shape <= v:
                    return f"W[{i}][{j}] escapes V[{j}]"
            for a, b in combinations(range(len(shapes)), 2):
                if shapes[a] & shapes[b]:
                    return f"W[{a}][{j}] and W[{b}][{j}] overlap"
        return None

    @staticmethod
    def split_way_below(
        space: FiniteSpace, k: LscFn, f: LscFn, g: LscFn, compact: Optional[Compactness] = None
    ) -> Tuple[LscFn, LscFn]:
        """
        k1 ≪ f and k2 ≪ g with k ≪ k1 + k2 ≪ f + g, given k ≪ f + g.

        Decomposes the closed levels of k against the levels of f followed by
        those of g and sums the pieces column block by column block.
        """
        total = LatticeService.add(space, f, g)
        if not LatticeService.way_below(space, k, total, compact):
            raise premise_violated("split_way_below", "k ≪ f + g", {"k": str(k), "f+g": str(total)})

        with logfire.span("lattice.split_way_below", k=str(k), f=str(f), g=str(g)):
            closed = [space.closure(level) for level in k.chain]
            columns = list(f.chain) + list(g.chain)
            split = len(f.chain)
            decomposition = LatticeService.decompose(space, closed, columns)
            first = [decomposition.piece(i, j) for i in range(len(closed)) for j in range(split)]
            second = [decomposition.piece(i, j) for i in range(len(closed)) for j in range(split, len(columns))]
            k1 = LatticeService.normal_form(space, first)
            k2 = LatticeService.normal_form(space, second)

            both = LatticeService.add(space, k1, k2)
            checks = {
                "k1 ≪ f": LatticeService.way_below(space, k1, f, compact),
                "k2 ≪ g": LatticeService.way_below(space, k2, g, compact),
                "k ≪ k1 + k2": LatticeService.way_below(space, k, both, compact),
                "k1 + k2 ≪ f + g": LatticeService.way_below(space, both, total, compact),
            }
            failed = [name for name, ok in checks.items() if not ok]
            if failed:
                logfire.error("lattice.split_way_below postcondition failed", failed=failed)
                raise BaseAnalysisException(
                    message=f"split_way_below postconditions failed: {', '.join(failed)}",
                    error_code=ErrorCode.INTERNAL_ERROR,
                )
            return k1, k2

    @staticmethod
    def interpolate(
        space: FiniteSpace, f: LscFn, g: LscFn, compact: Optional[Compactness] = None
    ) -> LscFn:
        """Some h with f ≪ h ≪ g, given f ≪ g."""
        if not LatticeService.way_below(space, f, g, compact):
            raise premise_violated("interpolate", "f ≪ g", {"f": str(f), "g": str(g)})

        with logfire.span("lattice.interpolate", f=str(f), g=str(g)):
            closed = [space.closure(level) for level in f.chain]
            decomposition = LatticeService.decompose(space, closed, list(g.chain))
            terms = [
                decomposition.piece(i, j) for i in range(len(closed)) for j in range(len(g.chain))
            ]
            h = LatticeService.normal_form(space, terms)
            if not (
                LatticeService.way_below(space, f, h, compact)
                and LatticeService.way_below(space, h, g, compact)
            ):
                logfire.error("lattice.interpolate postcondition failed", h=str(h))
                raise BaseAnalysisException(
                    message=f"interpolate produced {h}, which does not sit between f and g",
                    error_code=ErrorCode.INTERNAL_ERROR,
                )
            return h

    @staticmethod
    def compare_open_sums(space: FiniteSpace, us: Sequence[Iterable[str]], vs: Sequence[Iterable[str]]) -> bool:
        """
        Σ 1_{U_i} <= Σ 1_{V_j} decided by the covering criterion: compact
        K_i ⊆ U_i must be covered by pieces W_{i,j}, disjoint in each column
        and inside V_j. On a finite space K_i = U_i is the hardest case.
        """
        u_sets = LatticeService.check_opens(space, us, "U")
        v_sets = LatticeService.check_opens(space, vs, "V")
        pointwise = LatticeService._excess_point(space, u_sets, v_sets) is None
        try:
            decomposition = LatticeService.decompose(space, u_sets, v_sets, closures=False)
        except BaseAnalysisException as e:
            if e.error_code != ErrorCode.PREMISE_VIOLATED:
                raise
            verdict = False
        else:
            verdict = LatticeService.check_decomposition(space, u_sets, v_sets, decomposition, closures=False) is None
        if verdict != pointwise:
            logfire.error("lattice.compare_open_sums disagrees with pointwise order", covering=verdict, pointwise=pointwise)
        return verdict

    @staticmethod
    def atoms(space: FiniteSpace) -> List[FrozenSet[str]]:
        """Atoms of the set algebra generated by O: points with equal O-membership."""
        family = space.open_sets()
        classes: Dict[Tuple[bool, ...], set] = {}
        for x in space.points:
            classes.setdefault(tuple(x in u for u in family), set()).add(x)
        return sorted((frozenset(c) for c in classes.values()), key=lambda a: sorted(a))

    @staticmethod
    def extend_dimension_function(
        space: FiniteSpace, nu: Mapping[Tuple[str, ...], object]
    ) -> DimensionReport:
        """
        Check the dimension-function axioms and extend ν to a measure.

        The measure of an atom A is ν(N) − ν(N ∖ A) for the minimal open
        neighbourhood N of A; an atom whose neighbourhood has infinite measure
        gets ∞, and an atom that no member of O contains gets 0. Regularity is
        automatic on finite spaces.

        Returns:
            DimensionReport: the first violated axiom with a witness, or the
            atom measures and the measure of every set of the generated algebra
        """
        values: Dict[PointSet, ExtRational] = {as_points(k): ext(v) for k, v in nu.items()}
        opens = [as_points(u) for u in space.opens]
        missing = [u for u in opens if u not in values]
        if missing:
            raise ValidationException(
                message=f"ν is not defined on {_show(missing[0])}",
                error_code=ErrorCode.INVALID_SPACE,
                field="nu",
                value=list(missing[0]),
                constraint="defined on every member of O",
            )

        def nu_of(subset: Iterable[str]) -> ExtRational:
            return values[as_points(subset)]

        with logfire.span("lattice.extend_dimension_function", opens=len(opens)):
            if nu_of(()) != 0:
                return DimensionReport(valid=False, violated_axiom="ν(∅) = 0", witness=f"ν(∅) = {fmt(nu_of(()))}")

            for u, v in combinations(opens, 2):
                for small, big in ((u, v), (v, u)):
                    if set(small) <= set(big) and not ext_le(nu_of(small), nu_of(big)):
                        return DimensionReport(
                            valid=False,
                            violated_axiom="monotone",
                            witness=f"ν({_show(small)}) = {fmt(nu_of(small))} > ν({_show(big)}) = {fmt(nu_of(big))}",
                        )

            for u, v in combinations(opens, 2):
                union = as_points(set(u) | set(v))
                bound = ext_sum([nu_of(u), nu_of(v)])
                if not ext_le(nu_of(union), bound):
                    return DimensionReport(
                        valid=False,
                        violated_axiom="subadditive",
                        witness=f"ν({_show(union)}) = {fmt(nu_of(union))} > ν({_show(u)}) + ν({_show(v)}) = {fmt(bound)}",
                    )
                if not set(u) & set(v) and nu_of(union) != bound:
                    return DimensionReport(
                        valid=False,
                        violated_axiom="additive on disjoint opens",
                        witness=f"ν({_show(union)}) = {fmt(nu_of(union))} != ν({_show(u)}) + ν({_show(v)}) = {fmt(bound)}",
                    )

            measure: Dict[FrozenSet[str], ExtRational] = {}
            open_lookup = set(opens)
            for atom in LatticeService.atoms(space):
                hull = space.neighbourhood(next(iter(atom)))
                if as_points(hull) not in open_lookup:
                    measure[atom] = ext(0)
                    continue
                outer = nu_of(hull)
                inner = nu_of(hull - atom)
                measure[atom] = INF if outer is INF else outer - inner

            for u in opens:
                total = ext_sum(m for atom, m in measure.items() if atom <= set(u))
                if total != nu_of(u):
                    return DimensionReport(
                        valid=False,
                        violated_axiom="additive over atoms",
                        witness=f"atoms inside {_show(u)} sum to {fmt(total)} but ν = {fmt(nu_of(u))}",
                        atoms=tuple((as_points(a), fmt(m)) for a, m in measure.items()),
                    )

            atom_list = list(measure)
            extension = []
            for r in range(len(atom_list) + 1):
                for chosen in combinations(atom_list, r):
                    points = frozenset().union(*chosen) if chosen else frozenset()
                    extension.append((as_points(points), fmt(ext_sum(measure[a] for a in chosen))))
            extension.sort(key=lambda item: (len(item[0]), item[0]))

            logfire.info("lattice.extend_dimension_function extended", atoms=len(atom_list))
            return DimensionReport(
                valid=True,
                atoms=tuple((as_points(a), fmt(m)) for a, m in measure.items()),
                extension=tuple(extension),
            )
