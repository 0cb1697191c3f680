"""Random-instance benchmark harness with deterministic, splittable seeding.

Instances are drawn from numpy's PCG64 bit generator.  The per-instance seed
is derived by spawning the master seed with the key (n, instance index) via
``numpy.random.SeedSequence``, so the instance set is independent of
execution order and identical across platforms; the derived 64-bit value is
recorded per row and is sufficient to regenerate the instance.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import gd_upper_bound, lower_bound
from .chains import solve_chain
from .constraints import AoiConstraints
from .grouping import tga
from .oracle import DEFAULT_STATE_BUDGET, optimal_channels
from .schedulers import gd

ALGORITHMS = ("lb", "gd", "aion", "tga", "oracle")
CSV_COLUMNS = ("n", "idx", "seed", "lb", "gd", "aion", "tga", "oracle",
               "t_gd_ms", "t_aion_ms", "t_tga_ms")
TIMEOUT_MARKER = "timeout"


@dataclass(frozen=True)
class BenchmarkConfig:
    n_values: tuple
    d_min: int = 2
    d_max: int = 10
    instances: int = 100
    seed: int = 42
    gamma: Fraction = Fraction(1, 2)
    algorithms: tuple = ("lb", "gd", "aion", "tga")
    time_budget: float | None = None
    state_budget: int = DEFAULT_STATE_BUDGET

    def __post_init__(self):
        if not (2 <= self.d_min <= self.d_max):
            raise ValueError("deadline bounds must satisfy 2 <= d_min <= d_max")
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")


@dataclass(frozen=True)
class BenchmarkRecord:
    n: int
    idx: int
    seed: int
    counts: dict
    timings_ms: dict

    def csv_row(self):
        row = [self.n, self.idx, self.seed]
        for alg in ("lb", "gd", "aion", "tga", "oracle"):
            value = self.counts.get(alg)
            row.append("" if value is None else value)
        for alg in ("gd", "aion", "tga"):
            t = self.timings_ms.get(alg)
            row.append("" if t is None else f"{t:.3f}")
        return row


def instance_seed(master_seed: int, n: int, idx: int) -> int:
    """Derived 64-bit seed for instance ``idx`` at source count ``n``."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(n, idx))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def generate_instance(n: int, d_min: int, d_max: int, seed: int) -> AoiConstraints:
    """n deadlines drawn i.i.d. uniform on integers [d_min, d_max]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= d_min <= d_max:
        raise ValueError("bounds must satisfy 1 <= d_min <= d_max")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    draws = rng.integers(d_min, d_max + 1, size=n)
    return AoiConstraints.from_deadlines(int(d) for d in draws)


def _run_instance(constraints, cfg) -> tuple[dict, dict]:
    counts = {"lb": lower_bound(constraints)}
    timings = {}

    def timed(alg, fn):
        start = time.perf_counter()
        value = fn()
        elapsed = time.perf_counter() - start
        timings[alg] = elapsed * 1000.0
        if cfg.time_budget is not None and elapsed > cfg.time_budget:
            counts[alg] = TIMEOUT_MARKER
        else:
            counts[alg] = value

    if "gd" in cfg.algorithms:
        timed("gd", lambda: gd(constraints).num_channels)
    if "aion" in cfg.algorithms:
        # Counted from the exact chain solution, without building a grid.
        timed("aion", lambda: solve_chain(constraints).channels)
    if "tga" in cfg.algorithms:
        timed("tga", lambda: tga(constraints, cfg.gamma)[0].num_channels)
    if "oracle" in cfg.algorithms:
        if math.prod(constraints.deadlines) <= cfg.state_budget:
            counts["oracle"] = optimal_channels(constraints, cfg.state_budget)
        else:
            counts["oracle"] = None
    _sanity(counts)
    return counts, timings


def _sanity(counts):
    lb = counts["lb"]
    for alg in ("gd", "aion", "tga", "oracle"):
        value = counts.get(alg)
        if isinstance(value, int) and value < lb:
            raise AssertionError(f"{alg} returned {value} below the bound {lb}")
    tga_count = counts.get("tga")
    aion_count = counts.get("aion")
    if isinstance(tga_count, int) and isinstance(aion_count, int):
        if tga_count > aion_count:
            raise AssertionError(
                f"grouping ({tga_count}) exceeded single-chain ({aion_count})")


def run_benchmark(cfg: BenchmarkConfig):
    """Yield one verified BenchmarkRecord per (n, instance)."""
    for n in cfg.n_values:
        for idx in range(cfg.instances):
            seed = instance_seed(cfg.seed, n, idx)
            constraints = generate_instance(n, cfg.d_min, cfg.d_max, seed)
            counts, timings = _run_instance(constraints, cfg)
            yield BenchmarkRecord(n=n, idx=idx, seed=seed,
                                  counts=counts, timings_ms=timings)


def summarize(records):
    """Per-n means for each algorithm plus the mean gap to the lower bound."""
    by_n = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec)
    summary = {}
    for n in sorted(by_n):
        rows = by_n[n]
        entry = {"instances": len(rows)}
        for alg in ALGORITHMS:
            values = [r.counts[alg] for r in rows
                      if isinstance(r.counts.get(alg), int)]
            if values:
                mean = sum(values) / len(values)
                entry[f"mean_{alg}"] = mean
                if alg != "lb":
                    paired = [(r.counts[alg], r.counts["lb"]) for r in rows
                              if isinstance(r.counts.get(alg), int)]
                    entry[f"gap_{alg}"] = sum(v - l for v, l in paired) / len(paired)
        summary[n] = entry
    return summary


def write_csv(records, stream):
    """Emit rows incrementally; returns the records for summarizing."""
    writer = csv.writer(stream)
    writer.writerow(CSV_COLUMNS)
    out = []
    for rec in records:
        writer.writerow(rec.csv_row())
        out.append(rec)
    return out


def format_summary(summary) -> str:
    lines = []
    algs = [a for a in ALGORITHMS
            if any(f"mean_{a}" in e for e in summary.values())]
    header = ["n"] + [f"mean_{a}" for a in algs] + \
             [f"gap_{a}" for a in algs if a != "lb"]
    lines.append("  ".join(f"{h:>10}" for h in header))
    for n, entry in sorted(summary.items()):
        cells = [f"{n:>10}"]
        for a in algs:
            v = entry.get(f"mean_{a}")
            cells.append(f"{v:>10.3f}" if v is not None else f"{'-':>10}")
        for a in algs:
            if a == "lb":
                continue
            v = entry.get(f"gap_{a}")
            cells.append(f"{v:>10.3f}" if v is not None else f"{'-':>10}")
        lines.append("  ".join(cells))
    return "\n".join(lines)
