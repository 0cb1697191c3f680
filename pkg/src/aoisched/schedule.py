"""Cyclic schedule containers, the age simulator, and the feasibility verifier."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .bounds import lower_bound
from .constraints import AoiConstraints


class ScheduleConstructionError(RuntimeError):
    """A constructor produced a schedule that failed its own postcondition."""


class CyclicSchedule:
    """A concrete periodic slot grid.

    ``grid[k][t]`` holds the sources transmitting on channel k in slot t of
    one cycle, normalized to a tuple.  A well-formed schedule has at most one
    source per cell; the verifier reports cells that violate this so that
    malformed schedules can be diagnosed rather than rejected at construction.
    Slots and channels are 0-based.
    """

    def __init__(self, cycle_length: int, num_channels: int, grid):
        if cycle_length < 1:
            raise ValueError("cycle_length must be >= 1")
        if num_channels < 0:
            raise ValueError("num_channels must be >= 0")
        norm = []
        for row in grid:
            cells = []
            for cell in row:
                if cell is None:
                    cells.append(())
                elif isinstance(cell, str):
                    cells.append((cell,))
                else:
                    cells.append(tuple(cell))
            if len(cells) != cycle_length:
                raise ValueError("every channel row must have cycle_length cells")
            norm.append(tuple(cells))
        if len(norm) != num_channels:
            raise ValueError("grid must have num_channels rows")
        self.cycle_length = cycle_length
        self.num_channels = num_channels
        self.grid = tuple(norm)
        self._slots_by_source = None

    @classmethod
    def from_assignments(cls, cycle_length, num_channels, assignments,
                         strict=True) -> "CyclicSchedule":
        """Build from (channel, slot, source) triples.

        With ``strict`` (the default, used by every constructor in this
        package) a doubly-assigned cell raises instead of silently stacking.
        """
        grid = [[[] for _ in range(cycle_length)] for _ in range(num_channels)]
        for channel, slot, source in assignments:
            cell = grid[channel][slot % cycle_length]
            if cell and strict:
                raise ScheduleConstructionError(
                    f"cell (slot={slot % cycle_length}, channel={channel}) assigned "
                    f"to both {cell[0]!r} and {source!r}")
            cell.append(source)
        return cls(cycle_length, num_channels, grid)

    @classmethod
    def empty(cls) -> "CyclicSchedule":
        return cls(1, 0, [])

    def __eq__(self, other):
        return (isinstance(other, CyclicSchedule)
                and self.cycle_length == other.cycle_length
                and self.num_channels == other.num_channels
                and self.grid == other.grid)

    def __repr__(self):
        return (f"CyclicSchedule(C={self.cycle_length}, K={self.num_channels}, "
                f"sources={len(self.sources())})")

    def _slot_index(self):
        if self._slots_by_source is None:
            table = {}
            for row in self.grid:
                for t, cell in enumerate(row):
                    for src in cell:
                        table.setdefault(src, []).append(t)
            self._slots_by_source = {s: tuple(sorted(ts)) for s, ts in table.items()}
        return self._slots_by_source

    def sources(self):
        return sorted(self._slot_index())

    def transmission_pattern(self, source_id):
        """(sorted transmission slots, period) or None if never scheduled."""
        slots = self._slot_index().get(source_id)
        if slots is None:
            return None
        return slots, self.cycle_length

    def scheduled_at(self, t: int):
        """Set of sources transmitting in absolute slot t."""
        t = t % self.cycle_length
        return {src for row in self.grid for src in row[t]}

    def conflict_cells(self):
        return [(t, k) for k, row in enumerate(self.grid)
                for t, cell in enumerate(row) if len(cell) > 1]

    def occupancy(self, channel: int) -> int:
        """Occupied slots on one channel over a cycle."""
        return sum(1 for cell in self.grid[channel] if cell)

    def materialize(self, max_cells: int = 10_000_000) -> "CyclicSchedule":
        return self

    def to_json_dict(self) -> dict:
        rows = []
        for row in self.grid:
            cells = []
            for cell in row:
                if len(cell) > 1:
                    raise ValueError("cannot serialize a schedule with cell conflicts")
                cells.append(cell[0] if cell else None)
            rows.append(cells)
        return {"cycle_length": self.cycle_length,
                "num_channels": self.num_channels,
                "grid": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)


def schedule_from_json(text: str) -> CyclicSchedule:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed schedule JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValueError("malformed schedule JSON: expected an object")
    for field in ("cycle_length", "num_channels", "grid"):
        if field not in obj:
            raise ValueError(f"schedule JSON missing field '{field}'")
    cyc, k, grid = obj["cycle_length"], obj["num_channels"], obj["grid"]
    if not isinstance(cyc, int) or cyc < 1:
        raise ValueError("schedule field 'cycle_length' must be an integer >= 1")
    if not isinstance(k, int) or k < 0:
        raise ValueError("schedule field 'num_channels' must be an integer >= 0")
    if not isinstance(grid, list) or len(grid) != k:
        raise ValueError("schedule field 'grid' must list one row per channel")
    for row in grid:
        if not isinstance(row, list) or len(row) != cyc:
            raise ValueError("schedule field 'grid' rows must have cycle_length cells")
        for cell in row:
            if cell is not None and not isinstance(cell, str):
                raise ValueError("schedule field 'grid' cells must be a source id or null")
    return CyclicSchedule(cyc, k, grid)


class CombinedSchedule:
    """Several schedules stacked on disjoint channel blocks.

    The combination repeats with the lcm of the component cycles, which can be
    astronomically larger than any component; all queries therefore answer
    from the owning component instead of expanding the joint cycle.  A
    source's cyclic transmission gaps in the combination equal its gaps in its
    component, so feasibility checks are exact without materialization.
    """

    def __init__(self, components):
        flat = []
        for comp in components:
            if isinstance(comp, CombinedSchedule):
                flat.extend(comp.components)
            elif comp.num_channels > 0 or comp.sources():
                flat.append(comp)
        self.components = tuple(flat)
        self.cycle_length = math.lcm(*(c.cycle_length for c in flat)) if flat else 1
        self.num_channels = sum(c.num_channels for c in flat)
        offsets = []
        base = 0
        owner = {}
        for comp in flat:
            offsets.append(base)
            base += comp.num_channels
            for src in comp.sources():
                if src in owner:
                    raise ValueError(f"source {src!r} appears in two components")
                owner[src] = comp
        self.channel_offsets = tuple(offsets)
        self._owner = owner

    def __eq__(self, other):
        return (isinstance(other, CombinedSchedule)
                and self.components == other.components)

    def __repr__(self):
        return (f"CombinedSchedule(C={self.cycle_length}, K={self.num_channels}, "
                f"components={len(self.components)})")

    def sources(self):
        return sorted(self._owner)

    def transmission_pattern(self, source_id):
        comp = self._owner.get(source_id)
        if comp is None:
            return None
        return comp.transmission_pattern(source_id)

    def scheduled_at(self, t: int):
        out = set()
        for comp in self.components:
            out |= comp.scheduled_at(t)
        return out

    def conflict_cells(self):
        cells = []
        for comp, off in zip(self.components, self.channel_offsets):
            cells.extend((t, k + off) for t, k in comp.conflict_cells())
        return cells

    def materialize(self, max_cells: int = 10_000_000) -> CyclicSchedule:
        """Expand to a single concrete grid; guarded against cycle blow-up."""
        cells = self.cycle_length * self.num_channels
        if cells > max_cells:
            raise ScheduleConstructionError(
                f"materializing needs {cells} cells (> {max_cells}); "
                "the combined cycle is too long for a concrete grid")
        grid = []
        for comp in self.components:
            reps = self.cycle_length // comp.cycle_length
            for row in comp.grid:
                grid.append(list(row) * reps)
        return CyclicSchedule(self.cycle_length, self.num_channels, grid)

    def to_json_dict(self) -> dict:
        return self.materialize().to_json_dict()

    def to_json(self) -> str:
        return self.materialize().to_json()


def combine(schedules):
    """Stack schedules on disjoint channels; identity on a single schedule."""
    flat = []
    for s in schedules:
        if isinstance(s, CombinedSchedule):
            flat.extend(s.components)
        elif s.num_channels > 0 or s.sources():
            flat.append(s)
    if not flat:
        return CyclicSchedule.empty()
    if len(flat) == 1:
        return flat[0]
    return CombinedSchedule(flat)


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of checking a schedule against deadlines.

    ``violations`` holds (source id, worst cyclic gap, deadline) triples; the
    gap is None when the source never transmits.  ``feasible`` is true exactly
    when both violations and channel_conflicts are empty.
    """

    feasible: bool
    violations: tuple
    channel_conflicts: tuple
    lower_bound: int
    meets_lower_bound: bool


def _max_cyclic_gap(slots, period):
    worst = slots[0] + period - slots[-1]
    for a, b in zip(slots, slots[1:]):
        worst = max(worst, b - a)
    return worst


def verify(schedule, constraints: AoiConstraints) -> VerificationReport:
    """Check steady-state feasibility: no cell conflicts, every source
    scheduled, and every source's worst cyclic transmission gap within its
    deadline.  The schedule is treated as repeating in both directions."""
    conflicts = tuple(schedule.conflict_cells())
    violations = []
    for d, src in zip(constraints.deadlines, constraints.ids):
        pattern = schedule.transmission_pattern(src)
        if pattern is None:
            violations.append((src, None, d))
            continue
        slots, period = pattern
        gap = _max_cyclic_gap(slots, period)
        if gap > d:
            violations.append((src, gap, d))
    feasible = not conflicts and not violations
    lb = lower_bound(constraints) if len(constraints) else 0
    return VerificationReport(
        feasible=feasible,
        violations=tuple(violations),
        channel_conflicts=conflicts,
        lower_bound=lb,
        meets_lower_bound=feasible and schedule.num_channels == lb,
    )


def checked(schedule, constraints: AoiConstraints):
    """Postcondition gate used by every constructor: verify or raise."""
    report = verify(schedule, constraints)
    if not report.feasible:
        raise ScheduleConstructionError(
            f"constructed schedule failed verification: "
            f"violations={report.violations[:3]} conflicts={report.channel_conflicts[:3]}")
    return schedule


@dataclass(frozen=True)
class AoiTrace:
    """Per-source age trajectories over a simulated horizon.

    ``ages[i][t]`` is the age of source ``ids[i]`` at time t, for t in
    [0, horizon]; index 0 holds the initial ages.
    """

    ids: tuple
    ages: tuple
    horizon: int

    def max_age(self, source_id) -> int:
        return max(self.ages[self.ids.index(source_id)])


def simulate_aoi(schedule, constraints: AoiConstraints, horizon: int,
                 initial_ages=None) -> AoiTrace:
    """Step the age recurrence slot by slot against the repeating schedule.

    A scheduled source's age drops to 1 at the next slot; otherwise it grows
    by 1.  Default initial ages put the system in steady state (time since the
    source's last transmission of the previous cycle); sources the schedule
    never serves require explicit initial ages since no steady state exists.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    n = len(constraints)
    if initial_ages is None:
        ages0 = []
        for src in constraints.ids:
            pattern = schedule.transmission_pattern(src)
            if pattern is None:
                raise ValueError(
                    f"source {src!r} never appears in the schedule; "
                    "pass explicit initial_ages to simulate it")
            slots, period = pattern
            ages0.append(period - slots[-1])
    else:
        ages0 = [int(a) for a in initial_ages]
        if len(ages0) != n:
            raise ValueError("initial_ages must give one age per source")
        if any(a < 1 for a in ages0):
            raise ValueError("ages are always >= 1")
    rows = [[a] for a in ages0]
    for t in range(horizon):
        transmitting = schedule.scheduled_at(t)
        for i, src in enumerate(constraints.ids):
            rows[i].append(1 if src in transmitting else rows[i][-1] + 1)
    return AoiTrace(ids=constraints.ids,
                    ages=tuple(tuple(r) for r in rows),
                    horizon=horizon)
