"""Exact minimization of channel count over consecutively divisible intervals.

Finds average transmission intervals l with 1 <= l_n <= d_n, each consecutive
ratio a positive integer, minimizing the exact load sum 1/l_n (and therefore
its ceiling, the channel count).  Any optimum has some l_i = d_i: otherwise
scaling the whole chain up by min(d_i/l_i) stays feasible and strictly lowers
the load.  That witness makes the candidate set of first intervals finite:
l_1 = d_i/k for some source i and integer k, so enumerating those bases and
running a divisor-chain dynamic program per base is exhaustive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .constraints import AoiConstraints
from .schedulers import IntervalAssignment, cs


@dataclass(frozen=True)
class ChainSolution:
    """An optimal consecutively divisible interval assignment for one group."""

    intervals: IntervalAssignment
    constraints: AoiConstraints
    total_load: Fraction
    channels: int
    base: Fraction
    witness_index: int


@lru_cache(maxsize=65536)
def _solve_values(values: tuple, counts: tuple):
    """Core solver on the distinct-value summary.

    All sources sharing a deadline share an interval in some optimum: within
    an equal-deadline run, moving every source onto the run's largest feasible
    multiplier lowers the load without tightening later divisibility choices.
    The DP state is therefore (run, chain multiplier).  Returns
    (load, run interval tuple) with ties broken toward the lexicographically
    largest interval sequence, then the smallest base.
    """
    bases = set()
    for u in values:
        for k in range(1, u + 1):
            b = Fraction(u, k)
            if 1 <= b <= values[0]:
                bases.add(b)
    best = None  # (load, per-run intervals descending-lex preference, base)
    for base in sorted(bases):
        # states: multiplier m -> (cost, per-run multiplier prefix)
        states = {1: (Fraction(counts[0], base), (1,))}
        for u, o in zip(values[1:], counts[1:]):
            nxt = {}
            cap = int(Fraction(u) / base)
            for m, (cost, prefix) in states.items():
                k = 1
                while m * k <= cap:
                    m2 = m * k
                    cost2 = cost + Fraction(o, base * m2)
                    entry = nxt.get(m2)
                    if (entry is None or cost2 < entry[0]
                            or (cost2 == entry[0] and prefix > entry[1][:-1])):
                        nxt[m2] = (cost2, prefix + (m2,))
                    k += 1
            states = nxt
            if not states:
                break
        if not states:
            continue
        for cost, prefix in states.values():
            run_intervals = tuple(base * m for m in prefix)
            candidate = (cost, run_intervals, base)
            if best is None:
                best = candidate
            elif (cost, ) < (best[0], ):
                best = candidate
            elif cost == best[0]:
                if run_intervals > best[1] or (run_intervals == best[1]
                                               and base < best[2]):
                    best = candidate
    assert best is not None, "base 1 is always feasible"
    return best[0], best[1]


def solve_chain(constraints: AoiConstraints) -> ChainSolution:
    """Exact minimizer of ceil(sum 1/l_n) over order-preserving consecutively
    divisible interval assignments with 1 <= l_n <= d_n."""
    if len(constraints) == 0:
        raise ValueError("solve_chain requires at least one source")
    load, run_intervals = _solve_values(constraints.distinct_values,
                                        constraints.occurrences)
    per_source = []
    for interval, count in zip(run_intervals, constraints.occurrences):
        per_source.extend([interval] * count)
    intervals = IntervalAssignment(tuple(per_source), constraints.ids)
    witness = next((i for i, (l, d) in
                    enumerate(zip(per_source, constraints.deadlines)) if l == d),
                   None)
    assert witness is not None, "an optimal chain always touches a deadline"
    return ChainSolution(intervals=intervals,
                         constraints=constraints,
                         total_load=load,
                         channels=math.ceil(load),
                         base=per_source[0],
                         witness_index=witness)


def unused_part(intervals) -> Fraction:
    """Idle fraction of the channels claimed by an interval vector:
    ceil(sum 1/l) - sum 1/l, computed exactly."""
    seq = [Fraction(l) for l in intervals]
    if any(l < 1 for l in seq):
        raise ValueError("every interval must be >= 1")
    load = sum((1 / l for l in seq), Fraction(0))
    return math.ceil(load) - load


def schedule_from_chain(solution: ChainSolution):
    """Materialize a chain solution as a schedule via the interval scheduler."""
    schedule = cs(solution.intervals, solution.constraints)
    assert schedule.num_channels == solution.channels
    return schedule
