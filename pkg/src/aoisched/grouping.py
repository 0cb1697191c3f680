"""Two-step grouping: harmonic source extraction, then heuristic grouping.

Step 1 (``hsi``) peels off source subsets that admit provably optimal,
fully-utilized schedules: per-base harmonic prefixes with integer load, then
cross-base pairs whose combined load is an integer.  Step 2 (``hga``) packs
the leftover sources into groups around candidate center deadlines, keeping
each group's interval chain close to the members' deadlines, and solves the
exact chain optimizer per group.  ``tga`` runs both and stacks the schedules
on disjoint channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .bounds import lower_bound
from .chains import ChainSolution, _solve_values, solve_chain
from .constraints import AoiConstraints
from .schedule import checked, combine
from .schedulers import IntervalAssignment, cs, harmonic_pair, hs_with_base


@dataclass(frozen=True)
class Group:
    """One scheduling group: members, its center deadline value, the solved
    interval chain, and the resulting sub-schedule."""

    member_ids: tuple
    center: int
    chain: ChainSolution
    sub_schedule: object


@dataclass(frozen=True)
class GroupingScheme:
    groups: tuple
    total_channels: int
    leftover: tuple = ()


@dataclass(frozen=True)
class HsiResult:
    """Outcome of harmonic source identification.

    ``channels_used`` equals the exact load of the extracted sources (an
    integer: every claimed channel is fully utilized).  ``remainder_after_part1``
    supports the roll-back heuristic in ``tga``.
    """

    harmonic_sources: tuple
    remainder: AoiConstraints
    schedule: object
    channels_used: int
    part1_components: tuple
    part2_components: tuple
    part1_indices: tuple
    remainder_after_part1: AoiConstraints


@lru_cache(maxsize=65536)
def distance(center_deadline: int, source_deadline: int) -> Fraction:
    """Rate inflation from forcing a source's interval into a chain through
    the center: the gap between the best divisibility-compatible rate and the
    source's own 1/d."""
    if center_deadline < 1 or source_deadline < 1:
        raise ValueError("deadlines must be >= 1")
    c, d = center_deadline, source_deadline
    if d >= c:
        return Fraction(1, (d // c) * c) - Fraction(1, d)
    return Fraction(-(-c // d), c) - Fraction(1, d)


def _bundles_for_base(base: int, remaining: dict):
    """Whole bundles of same-valued sources, each bundle contributing load
    exactly 1/base: value u divisible by base yields floor(o*base/u) bundles
    of u/base sources.  Returns [(value, bundle_count)] ascending."""
    out = []
    for u in sorted(remaining):
        o = len(remaining[u])
        if o and u % base == 0:
            n_bundles = o * base // u
            if n_bundles:
                out.append((u, n_bundles))
    return out


def _take_bundles(bundles, limit: int, remaining: dict, base: int):
    """Consume the first ``limit`` bundles (ascending value; earliest sources
    first) and return the claimed sorted-order indices."""
    taken = []
    left = limit
    for u, n_bundles in bundles:
        take = min(left, n_bundles)
        width = u // base
        for _ in range(take):
            taken.extend(remaining[u][:width])
            del remaining[u][:width]
        left -= take
        if left == 0:
            break
    assert left == 0, "bundle selection exceeded availability"
    return taken


def hsi(constraints: AoiConstraints) -> HsiResult:
    """Identify and schedule source subsets with exact integer load.

    Part 1 walks the distinct values ascending; for each base it gathers
    whole bundles from all divisible values, keeps the longest prefix whose
    load is the floor of the bundle load, and schedules it harmonically.
    Part 2 pairs bases u_i < u_j with gcd > 1 and u_j not a multiple of u_i,
    solving for the largest compatible sub-loads whose sum is an integer and
    scheduling them through the two-value block layout.
    """
    if len(constraints) == 0:
        raise ValueError("hsi requires at least one source")
    values = constraints.distinct_values
    remaining = {u: [] for u in values}
    for i, d in enumerate(constraints.deadlines):
        remaining[d].append(i)
    selected = []
    part1_indices = []
    part1_components = []
    for base in values:
        if not any(remaining.values()):
            break
        bundles = _bundles_for_base(base, remaining)
        total_bundles = sum(n for _, n in bundles)
        floor_load = total_bundles // base
        if floor_load == 0:
            continue
        taken = _take_bundles(bundles, floor_load * base, remaining, base)
        sub = constraints.subset(taken)
        part1_components.append(hs_with_base(sub, base))
        selected.extend(taken)
        part1_indices.extend(taken)

    remainder_after_part1 = constraints.subset(
        sorted(i for idxs in remaining.values() for i in idxs))

    part2_components = []
    for i, u_i in enumerate(values):
        for u_j in values[i + 1:]:
            if math.gcd(u_i, u_j) <= 1 or u_j % u_i == 0:
                continue
            # The pair construction assumes each base is still present.
            if not remaining[u_i] or not remaining[u_j]:
                continue
            side_i = _bundles_for_base(u_i, remaining)
            side_j = [(u, n) for u, n in _bundles_for_base(u_j, remaining)
                      if u % u_i != 0]
            s_i = sum(n for _, n in side_i)
            s_j = sum(n for _, n in side_j)
            if s_i == 0 or s_j == 0:
                continue
            b = (s_i * u_j + s_j * u_i) // (u_i * u_j)
            if b == 0:
                continue
            step = u_i // math.gcd(u_i, u_j)
            s_i_prime = min(s_i, b * u_i - 1) // step * step
            if s_i_prime < 1:
                continue
            s_j_prime = (b * u_i * u_j - u_j * s_i_prime) // u_i
            if s_j_prime > s_j:
                continue
            taken_i = _take_bundles(side_i, s_i_prime, remaining, u_i)
            taken_j = _take_bundles(side_j, s_j_prime, remaining, u_j)
            part2_components.append(
                harmonic_pair(constraints.subset(taken_i),
                              constraints.subset(taken_j)))
            selected.extend(taken_i + taken_j)

    remainder = constraints.subset(
        sorted(i for idxs in remaining.values() for i in idxs))
    schedule = combine(part1_components + part2_components)
    channels = sum(c.num_channels for c in part1_components + part2_components)
    picked = constraints.subset(sorted(selected))
    assert picked.load == channels, "extracted load must be exactly integral"
    return HsiResult(harmonic_sources=tuple(picked.ids),
                     remainder=remainder,
                     schedule=schedule,
                     channels_used=channels,
                     part1_components=tuple(part1_components),
                     part2_components=tuple(part2_components),
                     part1_indices=tuple(sorted(part1_indices)),
                     remainder_after_part1=remainder_after_part1)


def _group_solution(constraints: AoiConstraints, indices) -> ChainSolution:
    """Solve the chain optimizer for a member subset, via the value-summary
    cache shared with solve_chain."""
    sub = constraints.subset(indices)
    load, run_intervals = _solve_values(sub.distinct_values, sub.occurrences)
    per_source = []
    for interval, count in zip(run_intervals, sub.occurrences):
        per_source.extend([interval] * count)
    intervals = IntervalAssignment(tuple(per_source), sub.ids)
    witness = next(i for i, (l, d) in
                   enumerate(zip(per_source, sub.deadlines)) if l == d)
    return ChainSolution(intervals=intervals, constraints=sub,
                         total_load=load, channels=math.ceil(load),
                         base=per_source[0], witness_index=witness)


def _assign_to_centers(constraints: AoiConstraints, centers):
    """Minimum-distance assignment; ties go to the lower center deadline."""
    members = {c: [] for c in centers}
    for i, d in enumerate(constraints.deadlines):
        best = min(centers, key=lambda c: (distance(c, d), c))
        members[best].append(i)
    return members


def _rearrange(constraints: AoiConstraints, members, gamma: Fraction):
    """Move sources out of groups whose approximated channel use is too idle.

    For each group whose unused part of the approximated rates r = D + 1/d
    exceeds gamma (snapshot taken before any move), keep the largest
    descending-rate prefix with integral floor load and push each remaining
    source to the minimum-distance group that still has room for its rate;
    with no such group it lands in the group with the smallest center.
    """
    centers = sorted(members)
    rate = {c: {i: distance(c, constraints.deadlines[i]) +
                Fraction(1, constraints.deadlines[i])
                for i in members[c]} for c in centers}
    sums = {c: sum(rate[c].values(), Fraction(0)) for c in centers}

    def unused(c):
        return math.ceil(sums[c]) - sums[c] if sums[c] > 0 else Fraction(0)

    flagged = [c for c in centers if unused(c) > gamma]
    first_center = centers[0]
    for c in flagged:
        ordered = sorted(members[c], key=lambda i: (-rate[c][i], i))
        floor_total = int(sums[c])
        kept, acc = [], Fraction(0)
        movers = []
        for i in ordered:
            if not movers and acc + rate[c][i] <= floor_total:
                acc += rate[c][i]
                kept.append(i)
            else:
                movers.append(i)
        for i in movers:
            d = constraints.deadlines[i]
            r_into = {g: distance(g, d) + Fraction(1, d)
                      for g in centers if g != c}
            fits = [g for g in centers if g != c and r_into[g] <= unused(g)]
            target = min(fits, key=lambda g: (distance(g, d), g)) if fits \
                else first_center
            members[c].remove(i)
            sums[c] -= rate[c][i]
            del rate[c][i]
            r_new = distance(target, d) + Fraction(1, d)
            members[target].append(i)
            rate[target][i] = r_new
            sums[target] += r_new
    for c in centers:
        members[c].sort()
    return members


def hga(constraints: AoiConstraints, gamma: Fraction = Fraction(1, 2)) -> GroupingScheme:
    """Heuristic grouping: pick center deadlines, assign sources by minimum
    distance, fix over-idle groups, and solve the chain optimizer per group.

    The single-group chain solution (channel count K1) is always a fallback,
    so the result never exceeds K1.  Enumeration stops at the first scheme
    matching the global load lower bound; group counts range over [2, K1-1]
    and center sets over distinct deadline values.
    """
    if len(constraints) == 0:
        raise ValueError("hga requires at least one source")
    gamma = Fraction(gamma)
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    k1 = solve_chain(constraints)
    lb = lower_bound(constraints)
    if k1.channels == lb:
        return _build_scheme(constraints,
                             [(k1.constraints.deadlines[k1.witness_index],
                               tuple(range(len(constraints))))])
    values = constraints.distinct_values
    best_partition = None
    best_channels = None
    seen = set()
    for group_count in range(2, k1.channels):
        for centers in combinations(values, group_count):
            members = _assign_to_centers(constraints, centers)
            members = _rearrange(constraints, members, gamma)
            parts = [(c, tuple(idx)) for c, idx in sorted(members.items())
                     if idx]
            key = frozenset(idx for _, idx in parts)
            if key in seen:
                continue
            seen.add(key)
            group_lb = sum(
                math.ceil(constraints.subset(idx).load) for _, idx in parts)
            if group_lb > k1.channels:
                continue
            channels = sum(_group_solution(constraints, idx).channels
                           for _, idx in parts)
            if channels == lb:
                return _build_scheme(constraints, parts)
            if best_channels is None or channels < best_channels:
                best_channels = channels
                best_partition = parts
    if best_channels is None or k1.channels <= best_channels:
        return _build_scheme(constraints,
                             [(k1.constraints.deadlines[k1.witness_index],
                               tuple(range(len(constraints))))])
    return _build_scheme(constraints, best_partition)


def _build_scheme(constraints: AoiConstraints, parts) -> GroupingScheme:
    groups = []
    total = 0
    for center, indices in parts:
        chain = _group_solution(constraints, indices)
        sub_schedule = cs(chain.intervals, chain.constraints)
        assert sub_schedule.num_channels == chain.channels
        groups.append(Group(member_ids=chain.constraints.ids,
                            center=center,
                            chain=chain,
                            sub_schedule=sub_schedule))
        total += chain.channels
    return GroupingScheme(groups=tuple(groups), total_channels=total)


def tga(constraints: AoiConstraints, gamma: Fraction = Fraction(1, 2)):
    """Full two-step pipeline: harmonic extraction, leftover grouping, and a
    combined schedule on disjoint channel blocks.

    When the second extraction pass leaves the same set of distinct leftover
    deadline values as the first, the second pass is rolled back: thinning a
    value without removing it tends to hurt the grouping step more than the
    extracted integer load helps.
    Returns (schedule, grouping scheme, extraction result).
    """
    if len(constraints) == 0:
        raise ValueError("tga requires at least one source")
    result = hsi(constraints)
    roll_back = (result.remainder_after_part1.distinct_values
                 == result.remainder.distinct_values)
    if roll_back:
        components = list(result.part1_components)
        remainder = result.remainder_after_part1
        channels = sum(c.num_channels for c in components)
        kept_ids = {src for c in components for src in c.sources()}
        result = HsiResult(
            harmonic_sources=tuple(s for s in constraints.ids if s in kept_ids),
            remainder=remainder,
            schedule=combine(components),
            channels_used=channels,
            part1_components=result.part1_components,
            part2_components=(),
            part1_indices=result.part1_indices,
            remainder_after_part1=remainder)
    else:
        components = list(result.part1_components) + list(result.part2_components)
        remainder = result.remainder
    if len(remainder):
        scheme = hga(remainder, gamma)
        components.extend(g.sub_schedule for g in scheme.groups)
    else:
        scheme = GroupingScheme(groups=(), total_channels=0)
    schedule = combine(components)
    assert schedule.num_channels == result.channels_used + scheme.total_channels
    return checked(schedule, constraints), scheme, result
