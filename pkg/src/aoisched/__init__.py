"""Cyclic schedules meeting per-source age-of-information deadlines with a
minimal number of channels: constructive schedulers, an exact interval-chain
optimizer, two-step grouping, a brute-force optimum, and a benchmark harness.
"""

from .bench import (BenchmarkConfig, BenchmarkRecord, generate_instance,
                    instance_seed, run_benchmark, summarize)
from .bounds import (gd_upper_bound, is_consecutively_divisible, is_harmonic,
                     lower_bound)
from .chains import ChainSolution, schedule_from_chain, solve_chain, unused_part
from .constraints import (AoiConstraints, constraints_from_json,
                          constraints_to_json)
from .grouping import (Group, GroupingScheme, HsiResult, distance, hga, hsi,
                       tga)
from .oracle import (DEFAULT_STATE_BUDGET, StateBudgetExceeded,
                     extract_witness, optimal_channels)
from .schedule import (AoiTrace, CombinedSchedule, CyclicSchedule,
                       ScheduleConstructionError, VerificationReport, combine,
                       schedule_from_json, simulate_aoi, verify)
from .schedulers import (IntervalAssignment, ResourceBlockSequence, cas, cs,
                         gd, harmonic_pair, hs, hs_with_base, stv)

__all__ = [
    "AoiConstraints", "AoiTrace", "BenchmarkConfig", "BenchmarkRecord",
    "ChainSolution", "CombinedSchedule", "CyclicSchedule",
    "DEFAULT_STATE_BUDGET", "Group", "GroupingScheme", "HsiResult",
    "IntervalAssignment", "ResourceBlockSequence", "ScheduleConstructionError",
    "StateBudgetExceeded", "VerificationReport", "cas", "combine",
    "constraints_from_json", "constraints_to_json", "cs", "distance",
    "extract_witness", "gd", "gd_upper_bound", "generate_instance",
    "harmonic_pair", "hga", "hs", "hs_with_base", "hsi", "instance_seed",
    "is_consecutively_divisible", "is_harmonic", "lower_bound",
    "optimal_channels", "run_benchmark", "schedule_from_chain",
    "schedule_from_json", "simulate_aoi", "solve_chain", "stv", "summarize",
    "tga", "unused_part", "verify",
]
