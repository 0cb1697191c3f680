"""Closed-form channel bounds and the structural predicates they rest on."""

from __future__ import annotations

import math
from fractions import Fraction

from .constraints import AoiConstraints


def lower_bound(constraints: AoiConstraints) -> int:
    """Minimum channels any scheduler needs: ceil of the total load sum 1/d_n.

    Each source consumes at least a 1/d_n fraction of one channel's slots,
    so the ceiling of the exact rational load is a hard floor on channels.
    """
    if len(constraints) == 0:
        raise ValueError("lower_bound requires at least one source")
    return math.ceil(constraints.load)


def gd_upper_bound(constraints: AoiConstraints) -> int:
    """Channels used when each distinct deadline value gets its own channels.

    Value u with o occurrences packs u sources per channel, hence ceil(o/u)
    channels per value; the sum is achieved constructively by ``gd``.
    """
    if len(constraints) == 0:
        raise ValueError("gd_upper_bound requires at least one source")
    return sum(-(-o // u) for u, o in
               zip(constraints.distinct_values, constraints.occurrences))


def is_harmonic(constraints: AoiConstraints) -> bool:
    """True when the deadline multiset is harmonic.

    Requires at least two distinct values, every distinct value divisible by
    the smallest, and for each larger value u its occurrence count a multiple
    of u / u_min.  The smallest value's own count is unconstrained.
    """
    u = constraints.distinct_values
    o = constraints.occurrences
    if len(u) < 2:
        return False
    base = u[0]
    for value, count in zip(u[1:], o[1:]):
        if value % base != 0:
            return False
        if count % (value // base) != 0:
            return False
    return True


def is_consecutively_divisible(values) -> bool:
    """True when every element is >= 1 and each consecutive ratio is a
    positive integer (exact rational test; ratios of 1 are allowed)."""
    seq = [Fraction(v) for v in values]
    if any(v < 1 for v in seq):
        return False
    for prev, cur in zip(seq, seq[1:]):
        ratio = cur / prev
        if ratio.denominator != 1 or ratio < 1:
            return False
    return True
