"""Constructive schedulers with optimality guarantees on their input classes.

Every constructor re-verifies its output against the source deadlines before
returning; the index arithmetic here is subtle enough that the verifier acts
as a safety net, turning any construction bug into a loud internal error
instead of a silently infeasible schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .bounds import is_consecutively_divisible, is_harmonic
from .constraints import AoiConstraints
from .schedule import (CyclicSchedule, ScheduleConstructionError, checked,
                       combine)


@dataclass(frozen=True)
class ResourceBlockSequence:
    """Slots ``start_slot + m*stride`` on one channel of a cyclic grid."""

    channel: int
    start_slot: int
    stride: int
    cycle_length: int

    def __post_init__(self):
        if self.cycle_length % self.stride != 0:
            raise ValueError("stride must divide cycle_length")
        if not 0 <= self.start_slot < self.stride:
            raise ValueError("start_slot must lie in [0, stride)")

    def slots(self):
        return range(self.start_slot, self.cycle_length, self.stride)


@dataclass(frozen=True)
class IntervalAssignment:
    """Average transmission intervals, one per source, sorted ascending."""

    intervals: tuple
    ids: tuple

    def __post_init__(self):
        if len(self.intervals) != len(self.ids):
            raise ValueError("intervals and ids must have equal length")
        if any(l < 1 for l in self.intervals):
            raise ValueError("every interval must be >= 1")

    @classmethod
    def from_intervals(cls, intervals, ids=None) -> "IntervalAssignment":
        intervals = tuple(Fraction(l) for l in intervals)
        if ids is None:
            ids = tuple(f"s{i + 1}" for i in range(len(intervals)))
        return cls(intervals, tuple(ids))

    @property
    def expansion_factor(self) -> int:
        """Minimal positive integer a with a * intervals[0] an integer."""
        return self.intervals[0].denominator

    @property
    def load(self) -> Fraction:
        return sum((1 / l for l in self.intervals), Fraction(0))


def gd(constraints: AoiConstraints):
    """Schedule each distinct deadline value on its own channels.

    Value u packs u sources per channel at stride u, so o occurrences use
    ceil(o/u) channels; the per-value blocks are stacked on disjoint channels.
    Optimal whenever every value's occurrence count is a multiple of the
    value, and in particular for a single distinct value.
    """
    if len(constraints) == 0:
        raise ValueError("gd requires at least one source")
    components = []
    start = 0
    for u, o in zip(constraints.distinct_values, constraints.occurrences):
        ids = constraints.ids[start:start + o]
        start += o
        channels = -(-o // u)
        assignments = [(i // u, i % u, src) for i, src in enumerate(ids)]
        components.append(
            CyclicSchedule.from_assignments(u, channels, assignments))
    return checked(combine(components), constraints)


def _fill_sequences(constraints: AoiConstraints, base: int, sequences,
                    cycle_length: int):
    """Distribute stride-``base`` block sequences over sources whose deadlines
    are multiples of ``base``.

    Sources are taken in ascending deadline order; a deadline of u claims
    every (u/base)-th block of a sequence, so one sequence carries u/base such
    sources.  Occurrence counts must be whole multiples of u/base (except for
    u == base), which makes every sequence fill exactly.
    """
    assignments = []
    seq_idx = 0
    pos = 0
    for u, src_ids in _group_by_value(constraints):
        if u % base != 0:
            raise ValueError(f"deadline {u} is not a multiple of base {base}")
        width = u // base
        if u != base and len(src_ids) % width != 0:
            raise ValueError(
                f"{len(src_ids)} sources with deadline {u} cannot fill whole "
                f"stride-{base} sequences (need multiples of {width})")
        for j, src in enumerate(src_ids):
            seq = sequences[seq_idx + j // width]
            start = seq.start_slot + (j % width) * base
            assignments.extend((seq.channel, t, src)
                               for t in range(start, cycle_length, u))
        seq_idx += len(src_ids) // width
    if seq_idx != len(sequences):
        raise ScheduleConstructionError(
            f"sequence fill mismatch: consumed {seq_idx} of {len(sequences)}")
    return assignments


def _group_by_value(constraints: AoiConstraints):
    start = 0
    for u, o in zip(constraints.distinct_values, constraints.occurrences):
        yield u, constraints.ids[start:start + o]
        start += o


def hs_with_base(constraints: AoiConstraints, base: int):
    """Harmonic scheduling against an explicit base value.

    Builds the auxiliary all-``base`` instance with one entry per claimed
    block sequence, lays its sequences out by the distinct-value construction,
    then fills each sequence with real sources.  Uses ceil(load) channels.
    """
    if len(constraints) == 0:
        raise ValueError("cannot schedule an empty source set")
    seq_count = 0
    for u, o in zip(constraints.distinct_values, constraints.occurrences):
        if u % base != 0 or (u != base and (o * base) % u != 0):
            raise ValueError(
                f"deadlines are not harmonic over base {base}: value {u} x{o}")
        seq_count += o * base // u
    channels = -(-seq_count // base)
    cycle = math.lcm(*constraints.distinct_values)
    sequences = [ResourceBlockSequence(i // base, i % base, base, cycle)
                 for i in range(seq_count)]
    assignments = _fill_sequences(constraints, base, sequences, cycle)
    schedule = CyclicSchedule.from_assignments(cycle, channels, assignments)
    return checked(schedule, constraints)


def hs(constraints: AoiConstraints):
    """Optimal scheduler for harmonic deadline multisets.

    Requires the harmonic property (see ``is_harmonic``); uses exactly
    ceil(sum 1/d_n) channels, meeting the load lower bound.
    """
    if not is_harmonic(constraints):
        raise ValueError("hs requires harmonic deadlines")
    return hs_with_base(constraints, constraints.deadlines[0])


def _stv_sequences(u1: int, o1: int, u2: int, o2: int):
    """Block layout for two distinct deadline values with integral load.

    The cycle lcm(u1,u2) splits into runs of gcd(u1,u2) consecutive slots,
    each run holding gcd*K blocks.  Value u1 occupies the first o1*gcd/u1
    block positions of every run, the pattern repeating every u1 slots;
    value u2 takes the remaining positions, repeating every u2 slots.
    Returns (cycle, channels, sequences for u1, sequences for u2).
    """
    if u1 >= u2:
        raise ValueError("stv requires two distinct values with u1 < u2")
    if o1 < 1 or o2 < 1:
        raise ValueError("stv requires at least one source of each value")
    load = Fraction(o1, u1) + Fraction(o2, u2)
    if load.denominator != 1:
        raise ValueError(f"combined load {load} is not an integer")
    channels = int(load)
    g = math.gcd(u1, u2)
    cycle = math.lcm(u1, u2)
    # Integral load forces both divisibilities (linear Diophantine argument).
    if o1 % (u1 // g) != 0 or o2 % (u2 // g) != 0:
        raise ScheduleConstructionError(
            f"occurrence counts ({o1}, {o2}) violate the divisibility "
            f"implied by integral load for values ({u1}, {u2})")
    per_run_1 = o1 * g // u1
    per_run_2 = o2 * g // u2
    if per_run_1 + per_run_2 != g * channels:
        raise ScheduleConstructionError("block positions do not fill the runs")

    def sequence(run, position, stride):
        start = run * g + position // channels
        return ResourceBlockSequence(position % channels, start, stride, cycle)

    seqs1 = [sequence(i // per_run_1, i % per_run_1, u1) for i in range(o1)]
    seqs2 = [sequence(j // per_run_2, per_run_1 + j % per_run_2, u2)
             for j in range(o2)]
    return cycle, channels, seqs1, seqs2


def stv(u1: int, o1: int, u2: int, o2: int):
    """Optimal scheduler for two distinct deadline values whose combined load
    o1/u1 + o2/u2 is an integer; uses exactly that many channels.

    Sources are named s1..s{o1+o2}, the u1 sources first.
    """
    cycle, channels, seqs1, seqs2 = _stv_sequences(u1, o1, u2, o2)
    ids = [f"s{i + 1}" for i in range(o1 + o2)]
    assignments = []
    for seq, src in zip(seqs1 + seqs2, ids):
        assignments.extend((seq.channel, t, src) for t in seq.slots())
    constraints = AoiConstraints.from_deadlines([u1] * o1 + [u2] * o2, ids)
    schedule = CyclicSchedule.from_assignments(cycle, channels, assignments)
    return checked(schedule, constraints)


def harmonic_pair(first: AoiConstraints, second: AoiConstraints):
    """Optimal scheduler for two harmonic deadline families with distinct
    bases whose combined load is an integer.

    Lays out blocks for base-deadline stand-ins via the two-value scheduler
    (one stand-in per block sequence, counts n_i = base_i * load_i), then
    fills each side's sequences with its real sources harmonically.
    """
    if len(first) == 0 or len(second) == 0:
        raise ValueError("both source sets must be non-empty")
    if first.deadlines[0] > second.deadlines[0]:
        first, second = second, first
    b1, b2 = first.deadlines[0], second.deadlines[0]
    if b1 == b2:
        raise ValueError("the two families must have distinct bases")
    n1 = b1 * first.load
    n2 = b2 * second.load
    if n1.denominator != 1 or n2.denominator != 1:
        raise ValueError(f"family loads must be multiples of 1/base "
                         f"(got {first.load} over {b1}, {second.load} over {b2})")
    total = first.load + second.load
    if total.denominator != 1:
        raise ValueError(f"combined load {total} is not an integer")
    base_cycle, channels, seqs1, seqs2 = _stv_sequences(b1, int(n1), b2, int(n2))
    cycle = math.lcm(base_cycle,
                     *first.distinct_values, *second.distinct_values)
    assignments = _fill_sequences(first, b1, seqs1, cycle)
    assignments += _fill_sequences(second, b2, seqs2, cycle)
    merged = first.merge(second)
    schedule = CyclicSchedule.from_assignments(cycle, channels, assignments)
    return checked(schedule, merged)


def cas(constraints: AoiConstraints):
    """Greedy scheduler for consecutively divisible integer deadlines.

    Takes sources in ascending order; each claims the lexicographically first
    free block (t, k) with t < d and then every d-th slot on that channel.
    Because earlier strides divide later ones, a free first block guarantees
    the whole stride is free.  Uses exactly ceil(load) channels.
    """
    if len(constraints) == 0:
        raise ValueError("cas requires at least one source")
    if not is_consecutively_divisible(constraints.deadlines):
        raise ValueError("cas requires consecutively divisible deadlines")
    channels = math.ceil(constraints.load)
    cycle = constraints.deadlines[-1]
    occupied = [[False] * cycle for _ in range(channels)]
    assignments = []
    for d, src in zip(constraints.deadlines, constraints.ids):
        block = next(((t, k) for t in range(d) for k in range(channels)
                      if not occupied[k][t]), None)
        if block is None:
            raise ScheduleConstructionError(
                f"no free block within deadline {d} for source {src!r}")
        t0, k = block
        for t in range(t0, cycle, d):
            if occupied[k][t]:
                raise ScheduleConstructionError(
                    f"stride collision at (t={t}, k={k}) for source {src!r}")
            occupied[k][t] = True
            assignments.append((k, t, src))
    schedule = CyclicSchedule.from_assignments(cycle, channels, assignments)
    return checked(schedule, constraints)


class _SearchExhausted(Exception):
    pass


def _place_dfs(strides, ids, a, channels, expanded_cycle, out_cycle,
               expanded_channels, node_limit, canonical):
    """Phase placement by depth-first search.

    Source i transmits at expanded slots t_i + m*stride_i; any phase
    t_i in [0, stride_i) keeps every compressed gap within ceil(l_i), so the
    search space per source is one stride.  A phase is feasible when its slot
    has a free channel (earlier strides divide later ones, so a free first
    block implies the whole stride is free on that channel) and every
    periodic copy lands in an output group with remaining budget.  Candidates
    are tried fullest-budget group first (earliest on ties), then
    least-occupied slot; with ``node_limit`` equal to the source count the
    search degenerates to the plain greedy.  ``canonical`` forces
    nondecreasing phases among equal strides, pruning permutation-equivalent
    branches during backtracking (interchangeable sources).  Raises
    _SearchExhausted at the node limit; tight instances whose placement must
    tile the groups perfectly can thrash here, and the caller then falls back
    to an exact solve.
    """
    budget = [channels] * out_cycle
    cells = [[None] * expanded_cycle for _ in range(expanded_channels)]
    occupancy = [0] * expanded_cycle
    nodes = 0
    chosen = [0] * len(ids)

    def place(i) -> bool:
        nonlocal nodes
        if i == len(ids):
            return True
        stride = strides[i]
        floor_slot = (chosen[i - 1]
                      if canonical and i and strides[i - 1] == stride else 0)
        slots = sorted(range(floor_slot, stride),
                       key=lambda t: (-budget[t // a], t // a, occupancy[t], t))
        for slot in slots:
            if occupancy[slot] >= expanded_channels:
                continue
            hits = range(slot, expanded_cycle, stride)
            if any(budget[t // a] < 1 for t in hits):
                continue
            channel = next(k for k in range(expanded_channels)
                           if cells[k][slot] is None)
            nodes += 1
            if nodes > node_limit:
                raise _SearchExhausted
            for t in hits:
                cells[channel][t] = ids[i]
                occupancy[t] += 1
                budget[t // a] -= 1
            chosen[i] = slot
            if place(i + 1):
                return True
            for t in hits:
                cells[channel][t] = None
                occupancy[t] -= 1
                budget[t // a] += 1
        return False

    if not place(0):
        raise _SearchExhausted
    return cells


def _cover_slots(intervals, ids, out_cycle, channels):
    """Direct per-slot schedule when no exact-stride phase assignment exists.

    Exact expanded strides are a sufficient but not necessary device: a chain
    can be infeasible under exact strides at ceil(load) channels while an
    irregular cadence meeting every gap bound exists.  This solves the real
    requirement as an integer program over the compressed grid: source i
    transmits somewhere in every cyclic window of ceil(l_i) slots, at most
    ``channels`` sources share a slot, and the total number of transmissions
    is minimized.  Returns per-slot source lists.
    """
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix

    n = len(ids)
    windows = [min(math.ceil(l), out_cycle) for l in intervals]
    rows, cols = [], []
    for t in range(out_cycle):
        rows.extend([t] * n)
        cols.extend(i * out_cycle + t for i in range(n))
    lower = [0.0] * out_cycle
    upper = [float(channels)] * out_cycle
    row = out_cycle
    for i, w in enumerate(windows):
        for start in range(out_cycle):
            rows.extend([row] * w)
            cols.extend(i * out_cycle + (start + j) % out_cycle
                        for j in range(w))
            lower.append(1.0)
            upper.append(float(w))
            row += 1
    matrix = coo_matrix(([1.0] * len(rows), (rows, cols)),
                        shape=(row, n * out_cycle)).tocsr()
    result = milp(c=np.ones(n * out_cycle),
                  constraints=LinearConstraint(matrix, np.array(lower),
                                               np.array(upper)),
                  integrality=np.ones(n * out_cycle),
                  bounds=Bounds(0, 1),
                  options={"time_limit": 60})
    if not result.success:
        raise ScheduleConstructionError(
            "no per-slot schedule meets the gap bounds at ceil(load) channels")
    per_slot = [[] for _ in range(out_cycle)]
    for i, src in enumerate(ids):
        for t in range(out_cycle):
            if result.x[i * out_cycle + t] > 0.5:
                per_slot[t].append(src)
    return per_slot


def _place_expanded(intervals, ids, a, channels, expanded_cycle, out_cycle,
                    expanded_channels):
    strides = [int(a * l) for l in intervals]
    try:
        # First pass is the plain greedy (no backtracking): fullest-budget
        # group, then least-occupied slot.
        return _place_dfs(strides, ids, a, channels, expanded_cycle,
                          out_cycle, expanded_channels,
                          node_limit=len(ids), canonical=False)
    except _SearchExhausted:
        pass
    return _place_dfs(strides, ids, a, channels, expanded_cycle,
                      out_cycle, expanded_channels,
                      node_limit=2000, canonical=True)


def cs(assignment: IntervalAssignment, constraints: AoiConstraints | None = None):
    """Scheduler for consecutively divisible rational transmission intervals.

    Operates in an expanded integer-slot domain (every interval times the
    minimal integer a that clears the first interval's denominator), placing
    each source's first block in the least-loaded group of a consecutive
    expanded slots among the first ceil(l) groups, then compresses every a
    expanded slots into one output slot.  Uses exactly ceil(sum 1/l) channels;
    a source's worst compressed gap never exceeds ceil(l).

    When ``constraints`` is given the result is verified against those
    deadlines (every interval must satisfy l <= d); otherwise it is verified
    against the ceil(l) envelope.
    """
    intervals = assignment.intervals
    ids = assignment.ids
    if not intervals:
        raise ValueError("cs requires at least one interval")
    if not is_consecutively_divisible(intervals):
        raise ValueError("cs requires consecutively divisible intervals")
    if constraints is not None:
        if list(constraints.ids) != list(ids):
            raise ValueError("interval ids must match the constraints' sources")
        if any(l > d for l, d in zip(intervals, constraints.deadlines)):
            raise ValueError("every interval must be within its deadline")
    a = assignment.expansion_factor
    channels = math.ceil(assignment.load)
    last = intervals[-1]
    expanded_cycle = int(a * last) if last.denominator == 1 else int(a * a * last)
    out_cycle = expanded_cycle // a
    expanded_channels = -(-channels // a)
    cells = _place_expanded(intervals, ids, a, channels, expanded_cycle,
                            out_cycle, expanded_channels)
    expanded_channels = len(cells)
    order = {src: i for i, src in enumerate(ids)}
    assignments = []
    for s in range(out_cycle):
        bucket = [cells[k][t] for t in range(s * a, (s + 1) * a)
                  for k in range(expanded_channels) if cells[k][t] is not None]
        if len(set(bucket)) != len(bucket):
            raise ScheduleConstructionError(f"source doubled in output slot {s}")
        if len(bucket) > channels:
            raise ScheduleConstructionError(
                f"output slot {s} holds {len(bucket)} sources (> {channels})")
        assignments.extend((ch, s, src)
                           for ch, src in enumerate(sorted(bucket, key=order.get)))
    schedule = CyclicSchedule.from_assignments(out_cycle, channels, assignments)
    if constraints is None:
        constraints = AoiConstraints.from_deadlines(
            [math.ceil(l) for l in intervals], ids)
    return checked(schedule, constraints)
