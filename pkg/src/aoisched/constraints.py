"""Deadline multisets: the input to every scheduler in this package."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property


@dataclass(frozen=True)
class AoiConstraints:
    """A multiset of per-source freshness deadlines, stored sorted ascending.

    ``deadlines[i]`` is the maximum tolerated age, in slots, of the source
    named ``ids[i]``.  Sorting is stable with respect to the caller's input
    order, so schedules always refer back to caller-visible source names.
    """

    deadlines: tuple[int, ...]
    ids: tuple[str, ...]

    def __post_init__(self):
        if len(self.deadlines) != len(self.ids):
            raise ValueError("deadlines and ids must have equal length")
        for d in self.deadlines:
            if not isinstance(d, int) or d < 1:
                raise ValueError(f"deadlines must be integers >= 1, got {d!r}")
        if any(a > b for a, b in zip(self.deadlines, self.deadlines[1:])):
            raise ValueError("deadlines must be sorted ascending")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("source ids must be unique")

    @classmethod
    def from_deadlines(cls, deadlines, ids=None) -> "AoiConstraints":
        """Build from deadlines in caller order; default ids are s1..sN."""
        deadlines = list(deadlines)
        if ids is None:
            ids = [f"s{i + 1}" for i in range(len(deadlines))]
        else:
            ids = list(ids)
            if len(ids) != len(deadlines):
                raise ValueError("ids must match deadlines in length")
        order = sorted(range(len(deadlines)), key=lambda i: deadlines[i])
        return cls(tuple(int(deadlines[i]) for i in order),
                   tuple(ids[i] for i in order))

    def __len__(self) -> int:
        return len(self.deadlines)

    @cached_property
    def distinct_values(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.deadlines)))

    @cached_property
    def occurrences(self) -> tuple[int, ...]:
        """Occurrence count of each distinct value, aligned with distinct_values."""
        counts = {}
        for d in self.deadlines:
            counts[d] = counts.get(d, 0) + 1
        return tuple(counts[u] for u in self.distinct_values)

    @cached_property
    def load(self) -> Fraction:
        """Sum of 1/d over all sources, computed exactly."""
        return sum((Fraction(1, d) for d in self.deadlines), Fraction(0))

    def deadline_of(self, source_id: str) -> int:
        return self.deadlines[self.ids.index(source_id)]

    def subset(self, indices) -> "AoiConstraints":
        """Sub-multiset at the given sorted-order indices (order preserved)."""
        indices = sorted(indices)
        return AoiConstraints(tuple(self.deadlines[i] for i in indices),
                              tuple(self.ids[i] for i in indices))

    def merge(self, other: "AoiConstraints") -> "AoiConstraints":
        """Union of two multisets; source ids must be disjoint."""
        if set(self.ids) & set(other.ids):
            raise ValueError("cannot merge constraints with overlapping ids")
        pairs = sorted(zip(self.deadlines + other.deadlines,
                           self.ids + other.ids), key=lambda p: p[0])
        return AoiConstraints(tuple(d for d, _ in pairs), tuple(s for _, s in pairs))


def constraints_to_json(constraints: AoiConstraints, name: str = "instance") -> str:
    """Canonical JSON form: {"d": [...], "id": name}, deadlines in sorted order."""
    return json.dumps({"id": name, "d": list(constraints.deadlines)},
                      sort_keys=True, indent=2)


def constraints_from_json(text: str) -> tuple[str, AoiConstraints]:
    """Parse constraints JSON, returning (instance name, constraints)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed constraints JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValueError("malformed constraints JSON: expected an object")
    if "d" not in obj:
        raise ValueError("constraints JSON missing field 'd'")
    d = obj["d"]
    if not isinstance(d, list) or not d:
        raise ValueError("constraints field 'd' must be a non-empty list")
    for x in d:
        if not isinstance(x, int) or isinstance(x, bool) or x < 1:
            raise ValueError(f"constraints field 'd' must hold integers >= 1, got {x!r}")
    name = obj.get("id", "instance")
    if not isinstance(name, str):
        raise ValueError("constraints field 'id' must be a string")
    return name, AoiConstraints.from_deadlines(d)
