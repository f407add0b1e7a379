"""
Layered graphs: the drunken ladder with its golden-ratio trace, and nested
trace enclosures for arbitrary layered inputs by exact elimination.
"""

import time
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import logfire

from app.exceptions import BaseAnalysisException, ValidationException
from app.models.error_models import ErrorCode
from app.models.graph_models import Interval, LayeredGraph, TraceKind, TraceSolution
from app.utils.fourier_motzkin import FourierMotzkin
from app.utils.qphi import QPhi, format_qphi
from app.utils.rationals import fmt

Bounds = Tuple[Optional[Fraction], Optional[Fraction]]


@lru_cache(maxsize=None)
def fibonacci(n: int) -> int:
    """F_0 = 0, F_1 = 1, F_{n+1} = F_n + F_{n-1}."""
    if n < 0:
        raise ValueError("Fibonacci index must be nonnegative")
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


class DrunkenService:
    """
    Service class for layered graphs and the drunken ladder.
    """

    @staticmethod
    def _check_depth(n: int) -> None:
        if n < 1:
            raise ValidationException(
                message="depth must be at least 1",
                field="depth",
                value=n,
                constraint=">= 1",
            )

    @staticmethod
    def cassini_check(n: int) -> bool:
        """F_{2k+1}·F_{2k-1} − F_{2k}² = 1 for k = 1..n."""
        return all(
            fibonacci(2 * k + 1) * fibonacci(2 * k - 1) - fibonacci(2 * k) ** 2 == 1 for k in range(1, n + 1)
        )

    @staticmethod
    def drunken_graph(n: int) -> LayeredGraph:
        """
        The ladder with levels {a_k, b_k} and edges a_{k+1} → a_k,
        b_{k+1} → a_k, a_k → b_k and b_{k+1} → b_k, to depth n.
        """
        DrunkenService._check_depth(n)
        levels = tuple((f"a{k}", f"b{k}") for k in range(1, n + 2))
        blocks = tuple(
            (
                (f"a{k + 1}", f"a{k}"),
                (f"b{k + 1}", f"a{k}"),
                (f"a{k}", f"b{k}"),
                (f"b{k + 1}", f"b{k}"),
            )
            for k in range(1, n + 1)
        )
        return LayeredGraph(levels=levels, blocks=blocks, period=1)

    @staticmethod
    def ratio_interval(n: int) -> Tuple[Fraction, Fraction]:
        """The bounds F_{2n}/F_{2n-1} <= b_1/a_1 <= F_{2n+1}/F_{2n} forced at depth n."""
        DrunkenService._check_depth(n)
        return (
            Fraction(fibonacci(2 * n), fibonacci(2 * n - 1)),
            Fraction(fibonacci(2 * n + 1), fibonacci(2 * n)),
        )

    @staticmethod
    def ladder_values(n: int, a1: QPhi) -> Dict[str, QPhi]:
        """
        a_k, b_k for k = 1..n+1 from b_1 = φ·a_1 and the closed forms
        a_{k+1} = F_{2k+1}a_1 − F_{2k}b_1, b_{k+1} = F_{2k-1}b_1 − F_{2k}a_1.
        """
        b1 = QPhi.phi() * a1
        values = {"a1": a1, "b1": b1}
        for k in range(1, n + 1):
            values[f"a{k + 1}"] = a1 * fibonacci(2 * k + 1) - b1 * fibonacci(2 * k)
            values[f"b{k + 1}"] = b1 * fibonacci(2 * k - 1) - a1 * fibonacci(2 * k)
        return values

    @staticmethod
    def _verify_ladder(n: int, values: Dict[str, QPhi]) -> None:
        failed: List[str] = []
        for k in range(1, n + 1):
            a, b = values[f"a{k}"], values[f"b{k}"]
            a_next, b_next = values[f"a{k + 1}"], values[f"b{k + 1}"]
            if a != a_next + b_next:
                failed.append(f"a{k} = a{k + 1} + b{k + 1}")
            if b != a + b_next:
                failed.append(f"b{k} = a{k} + b{k + 1}")
        failed.extend(f"{v} > 0" for v, x in values.items() if x.sign() <= 0)
        if failed:
            logfire.error("drunken.verify failed", failed=failed)
            raise BaseAnalysisException(
                message=f"drunken ladder values violate {', '.join(failed)}",
                error_code=ErrorCode.INTERNAL_ERROR,
            )

    @staticmethod
    def drunken_trace(n: int) -> TraceSolution:
        """
        The unique graph trace of the ladder with a_1 = φ^{-1}, exact in ℚ(φ).

        The trace identity is checked at every vertex above the deepest
        level and every value is checked to be positive. With this scaling
        b_1 = 1 and Σ_{k>=2}(a_k + b_k) = 1.

        Args:
            n: Depth of the ladder

        Returns:
            TraceSolution: EXACT values for a_1..a_{n+1}, b_1..b_{n+1}
        """
        DrunkenService._check_depth(n)
        with logfire.span("drunken.drunken_trace", depth=n):
            values = DrunkenService.ladder_values(n, QPhi.phi() ** -1)
            DrunkenService._verify_ladder(n, values)
            return TraceSolution(
                kind=TraceKind.EXACT,
                values=tuple((v, format_qphi(x)) for v, x in values.items()),
                normalized_vertex="b1",
            )

    @staticmethod
    def drunken_trace_normalized(n: int) -> TraceSolution:
        """The same trace scaled so that Σ_{k>=1}(a_k + b_k) = 1, i.e. a_1 = φ^{-3}."""
        DrunkenService._check_depth(n)
        values = DrunkenService.ladder_values(n, QPhi.phi() ** -3)
        DrunkenService._verify_ladder(n, values)
        return TraceSolution(kind=TraceKind.EXACT, values=tuple((v, format_qphi(x)) for v, x in values.items()))

    @staticmethod
    def partial_sums(n: int, a1: Optional[QPhi] = None, start: int = 2) -> List[QPhi]:
        """Σ_{k=start}^{m}(a_k + b_k) for m = start..n+1."""
        values = DrunkenService.ladder_values(n, a1 if a1 is not None else QPhi.phi() ** -1)
        out: List[QPhi] = []
        running = QPhi(0)
        for k in range(start, n + 2):
            running = running + values[f"a{k}"] + values[f"b{k}"]
            out.append(running)
        return out

    # ------------------------------------------------------------------
    # enclosures
    # ------------------------------------------------------------------

    @staticmethod
    def _system(truncated: LayeredGraph, anchor: str) -> FourierMotzkin:
        """Trace identities above the deepest level, T >= 0 and T(anchor) = 1."""
        graph = truncated.to_graph()
        names = list(graph.vertices)
        system = FourierMotzkin(names)
        for level in truncated.levels[:-1]:
            for v in level:
                row: Dict[str, int] = {v: 1}
                for e in graph.incoming(v):
                    row[e.source] = row.get(e.source, 0) - 1
                system.add(row, "==", 0)
        system.add_nonnegativity()
        system.add({anchor: 1}, "==", 1)
        return system

    @staticmethod
    def _level_one_bounds(truncated: LayeredGraph, anchor: str) -> Optional[Dict[str, Bounds]]:
        # deepest variables go first
        order = [v for level in reversed(truncated.levels) for v in level]
        if not DrunkenService._system(truncated, anchor).is_feasible():
            return None
        out: Dict[str, Bounds] = {}
        for w in truncated.levels[0]:
            system = DrunkenService._system(truncated, anchor).project_onto({w}, order)
            if system.contradiction() is not None:
                return None
            out[w] = system.bounds(w)
        return out

    @staticmethod
    def layered_trace_enclosure(layered: LayeredGraph, depth: int) -> TraceSolution:
        """
        Nested enclosures of the level-1 trace values, normalised by
        T(v_0) = 1 for the first vertex v_0 of level 1.

        At each depth d the truncation keeps the trace identity on levels
        1..d, leaves level d+1 free and eliminates variables from the
        deepest level upwards. The first depth without a solution ends the
        computation and is reported as ``infeasible_at``.

        Raises:
            BaseAnalysisException: INTERNAL_ERROR if the enclosures fail to nest
        """
        DrunkenService._check_depth(depth)
        anchor = layered.levels[0][0]
        start_time = time.time()
        intervals: List[Interval] = []
        infeasible_at: Optional[int] = None
        previous: Optional[Dict[str, Bounds]] = None
        with logfire.span("drunken.layered_trace_enclosure", depth=depth, anchor=anchor):
            for d in range(1, depth + 1):
                truncated = layered.extended(d)
                bounds = DrunkenService._level_one_bounds(truncated, anchor)
                if bounds is None:
                    infeasible_at = d
                    logfire.info("drunken.layered_trace_enclosure infeasible", depth=d)
                    break
                if previous is not None:
                    DrunkenService._assert_nested(previous, bounds, d)
                for w, (lo, hi) in bounds.items():
                    intervals.append(
                        Interval(
                            depth=d,
                            vertex=w,
                            lo=None if lo is None else fmt(lo),
                            hi=None if hi is None else fmt(hi),
                        )
                    )
                previous = bounds
            logfire.info(
                "drunken.layered_trace_enclosure done",
                intervals=len(intervals),
                infeasible_at=infeasible_at,
                execution_time=round(time.time() - start_time, 4),
            )
            return TraceSolution(
                kind=TraceKind.ENCLOSURE,
                normalized_vertex=anchor,
                intervals=tuple(intervals),
                infeasible_at=infeasible_at,
            )

    @staticmethod
    def _assert_nested(outer: Dict[str, Bounds], inner: Dict[str, Bounds], depth: int) -> None:
        for w, (lo, hi) in inner.items():
            out_lo, out_hi = outer[w]
            widened = (out_lo is not None and (lo is None or lo < out_lo)) or (
                out_hi is not None and (hi is None or hi > out_hi)
            )
            if widened:
                logfire.error("drunken.enclosure not nested", vertex=w, depth=depth)
                raise BaseAnalysisException(
                    message=f"enclosure for {w} at depth {depth} is not inside the one at depth {depth - 1}",
                    error_code=ErrorCode.INTERNAL_ERROR,
                )
