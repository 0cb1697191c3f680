"""Brute-force optimum via the age-vector state graph, for tiny instances.

A schedule keeping every age within its deadline visits only states in the
box [1, d_1] x ... x [1, d_N]; K channels are sufficient exactly when the
graph of valid states, with one edge per choice of transmitting sources,
retains a state after iteratively deleting dead ends (a finite graph where
every surviving state has a surviving successor contains a cycle, and any
cycle is a feasible cyclic schedule).  Transmitting strictly fewer than
min(K, N) sources never helps, since resetting an age to 1 only enlarges the
set of valid futures, so only full-capacity decisions are explored.
"""

from __future__ import annotations

import math
from itertools import combinations, product

from .bounds import lower_bound
from .constraints import AoiConstraints
from .schedule import CyclicSchedule, checked


class StateBudgetExceeded(RuntimeError):
    """The instance's state space is too large to enumerate."""


DEFAULT_STATE_BUDGET = 2_000_000


def _check_budget(deadlines, budget):
    total = math.prod(deadlines)
    if total > budget:
        raise StateBudgetExceeded(
            f"state space has {total} states (> budget {budget})")
    return total


def _surviving_states(deadlines, channels, budget):
    """Alive bitmap over the state space after dead-end pruning, or None when
    the edge count would overrun the budget."""
    n = len(deadlines)
    cap = min(channels, n)
    total = math.prod(deadlines)
    decisions = list(combinations(range(n), cap))
    if total * len(decisions) > 16 * budget:
        raise StateBudgetExceeded(
            f"{total} states x {len(decisions)} decisions exceeds the "
            f"enumeration budget")
    # Mixed-radix encoding: digit i is age_i - 1 with radix d_i.
    weights = [1] * n
    for i in range(n - 1, 0, -1):
        weights[i - 1] = weights[i] * deadlines[i]

    decision_masks = [frozenset(t) for t in decisions]
    alive = bytearray([1]) * total
    counts = [0] * total
    stack = []
    ages = [1] * n
    for s in range(total):
        c = 0
        for t in decision_masks:
            if all(ages[i] < deadlines[i] for i in range(n) if i not in t):
                c += 1
        counts[s] = c
        if c == 0:
            alive[s] = 0
            stack.append(s)
        # increment mixed-radix age vector
        for i in range(n - 1, -1, -1):
            if ages[i] < deadlines[i]:
                ages[i] += 1
                break
            ages[i] = 1
    while stack:
        s = stack.pop()
        ages = _decode(s, deadlines, weights)
        scheduled = [i for i in range(n) if ages[i] == 1]
        if len(scheduled) != cap:
            continue  # no full-capacity predecessor produces this state
        others = [i for i in range(n) if ages[i] != 1]
        # Predecessors: others one slot younger, scheduled sources any age.
        base = sum((ages[i] - 2) * weights[i] for i in others)
        for combo in product(*(range(deadlines[i]) for i in scheduled)):
            p = base + sum(a * w for a, w in
                           zip(combo, (weights[i] for i in scheduled)))
            counts[p] -= 1
            if counts[p] == 0 and alive[p]:
                alive[p] = 0
                stack.append(p)
    return alive, weights, decision_masks


def _decode(state, deadlines, weights):
    return [(state // w) % d + 1 for w, d in zip(weights, deadlines)]


def optimal_channels(constraints: AoiConstraints,
                     state_budget: int = DEFAULT_STATE_BUDGET) -> int:
    """True minimum channel count, by exhaustive state-graph search."""
    if len(constraints) == 0:
        raise ValueError("optimal_channels requires at least one source")
    deadlines = constraints.deadlines
    _check_budget(deadlines, state_budget)
    for channels in range(lower_bound(constraints), len(deadlines) + 1):
        alive, _, _ = _surviving_states(deadlines, channels, state_budget)
        if any(alive):
            return channels
    raise AssertionError("scheduling every source each slot is always feasible")


def extract_witness(constraints: AoiConstraints, channels: int,
                    state_budget: int = DEFAULT_STATE_BUDGET):
    """A verified cyclic schedule on the given channel count, from a cycle in
    the pruned state graph; raises ValueError when infeasible."""
    deadlines = constraints.deadlines
    n = len(deadlines)
    _check_budget(deadlines, state_budget)
    alive, weights, decision_masks = _surviving_states(
        deadlines, channels, state_budget)
    start = next((s for s in range(len(alive)) if alive[s]), None)
    if start is None:
        raise ValueError(f"{channels} channels are infeasible for {deadlines}")

    def step(state):
        ages = _decode(state, deadlines, weights)
        for t in decision_masks:
            nxt = 0
            ok = True
            for i in range(n):
                if i in t:
                    age = 1
                elif ages[i] < deadlines[i]:
                    age = ages[i] + 1
                else:
                    ok = False
                    break
                nxt += (age - 1) * weights[i]
            if ok and alive[nxt]:
                return t, nxt
        raise AssertionError("alive states always have an alive successor")

    seen = {}
    order = []
    moves = []
    s = start
    while s not in seen:
        seen[s] = len(order)
        order.append(s)
        t, s2 = step(s)
        moves.append(t)
        s = s2
    first = seen[s]
    cycle_moves = moves[first:]
    cycle = len(cycle_moves)
    assignments = []
    for slot, chosen in enumerate(cycle_moves):
        for ch, i in enumerate(sorted(chosen)):
            assignments.append((ch, slot, constraints.ids[i]))
    schedule = CyclicSchedule.from_assignments(cycle, channels, assignments)
    return checked(schedule, constraints)
