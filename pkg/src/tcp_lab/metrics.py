"""Effectiveness and applicability metrics for prioritized cycles.

Fault model: CI histories carry no fault matrix, so each failing execution
counts as one distinct fault revealed by exactly that test; the rank of a
fault is the 1-based position of its failing test in the evaluated order.

The area-style metrics (weighted percentage of faults detected, with and
without cost awareness) are defined on failed cycles only. Their rectified
variants min-max normalize against the exact best and worst achievable
values over all permutations of the cycle, so 1 is always the optimal
ordering and 0 the worst; cycles whose bounds coincide (single test, or
every test failing with equal costs) are degenerate and excluded from
aggregation by callers.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

from tcp_lab.model import CycleRecord, TestCaseId, TestExecution

# Bounds closer than this are considered degenerate for rectification.
DEGENERATE_EPSILON = 1e-12


class MetricError(ValueError):
    """Base for metric preconditions that callers may handle."""


class NoFaultsError(MetricError):
    """Fault-detection metrics are undefined on passing cycles."""


class ZeroTotalTimeError(MetricError):
    """Cost-aware metrics are undefined when total execution time is 0."""


class DegenerateBoundsError(MetricError):
    """Min-max rectification is undefined when best and worst coincide."""


class NoFailingCyclesError(MetricError):
    """Time-reduction metrics need at least one failing cycle."""


class ZeroBaselineTimeError(MetricError):
    """Relative time reduction is undefined against a zero-time baseline."""


class NoDataError(MetricError):
    """Aggregation over an empty population; values are never imputed."""


def _ordered_executions(
    order: Sequence[TestCaseId], cycle: CycleRecord
) -> list[TestExecution]:
    by_case = {e.case: e for e in cycle.executions}
    if len(order) != len(by_case) or set(order) != set(by_case):
        raise ValueError("order is not a permutation of the cycle's suite")
    return [by_case[case] for case in order]


def _fault_ranks(executions: Sequence[TestExecution]) -> list[int]:
    """1-based ranks of failing tests in the evaluated order."""
    return [i + 1 for i, e in enumerate(executions) if e.failed]


def apfd(order: Sequence[TestCaseId], cycle: CycleRecord) -> float:
    """Average percentage of faults detected for one evaluated order."""
    executions = _ordered_executions(order, cycle)
    ranks = _fault_ranks(executions)
    if not ranks:
        raise NoFaultsError("cycle has no failing executions")
    n = len(executions)
    m = len(ranks)
    return 1.0 - sum(ranks) / (n * m) + 1.0 / (2 * n)


def apfd_c(order: Sequence[TestCaseId], cycle: CycleRecord) -> float:
    """Cost-cognizant variant weighting by execution times (equal severities)."""
    executions = _ordered_executions(order, cycle)
    ranks = _fault_ranks(executions)
    if not ranks:
        raise NoFaultsError("cycle has no failing executions")
    durations = [e.duration for e in executions]
    total = sum(durations)
    if total == 0:
        raise ZeroTotalTimeError("total execution time is zero")
    n = len(durations)
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + durations[i]
    numerator = sum(suffix[r - 1] - durations[r - 1] / 2 for r in ranks)
    return numerator / (total * len(ranks))


def napfd(
    order: Sequence[TestCaseId],
    cycle: CycleRecord,
    executed_prefix_length: int,
) -> float:
    """Constrained-execution variant; faults outside the prefix go undetected.

    The detected fraction scales the value and undetected fault ranks count
    as zero. The suite size stays the full ``n`` under the prefix constraint.
    """
    executions = _ordered_executions(order, cycle)
    ranks = _fault_ranks(executions)
    if not ranks:
        raise NoFaultsError("cycle has no failing executions")
    n = len(executions)
    if not 0 <= executed_prefix_length <= n:
        raise ValueError("executed prefix must be between 0 and the suite size")
    m = len(ranks)
    detected = [r for r in ranks if r <= executed_prefix_length]
    p = len(detected) / m
    return p - sum(detected) / (n * m) + p / (2 * n)


def apfd_bounds(cycle: CycleRecord) -> tuple[float, float]:
    """Exact (min, max) achievable by any permutation of the cycle's suite.

    The maximum places all failing tests at ranks 1..m, the minimum at the
    last m ranks. With every test failing the bounds coincide; callers of
    the rectified metric treat that as degenerate.
    """
    ranks = _fault_ranks(cycle.executions)
    if not ranks:
        raise NoFaultsError("cycle has no failing executions")
    n = len(cycle.executions)
    m = len(ranks)
    best_sum = m * (m + 1) // 2
    worst_sum = m * n - m * (m - 1) // 2
    low = 1.0 - worst_sum / (n * m) + 1.0 / (2 * n)
    high = 1.0 - best_sum / (n * m) + 1.0 / (2 * n)
    return low, high


def apfd_c_bounds(cycle: CycleRecord) -> tuple[float, float]:
    """Exact (min, max) of the cost-cognizant metric over all permutations.

    The optimum runs the failing tests first in ascending duration; the
    worst runs them last in descending duration. Passing-test order does not
    affect the value in either arrangement (adjacent-swap argument; also
    certified against a brute-force permutation oracle in the test suite).
    """
    failing = sorted(
        (e for e in cycle.executions if e.failed), key=lambda e: e.duration
    )
    if not failing:
        raise NoFaultsError("cycle has no failing executions")
    passing = [e for e in cycle.executions if not e.failed]
    best = [e.case for e in failing] + [e.case for e in passing]
    worst = [e.case for e in passing] + [e.case for e in reversed(failing)]
    return apfd_c(worst, cycle), apfd_c(best, cycle)


def _rectify(value: float, bounds: tuple[float, float]) -> float:
    low, high = bounds
    if high - low < DEGENERATE_EPSILON:
        raise DegenerateBoundsError("metric bounds coincide for this cycle")
    rectified = (value - low) / (high - low)
    return min(1.0, max(0.0, rectified))


def rapfd(order: Sequence[TestCaseId], cycle: CycleRecord) -> float:
    """Min-max rectified fault-detection metric, 1 for optimal and 0 for worst."""
    return _rectify(apfd(order, cycle), apfd_bounds(cycle))


def rapfd_c(order: Sequence[TestCaseId], cycle: CycleRecord) -> float:
    """Min-max rectified cost-cognizant metric, 1 for optimal and 0 for worst."""
    return _rectify(apfd_c(order, cycle), apfd_c_bounds(cycle))


def ntr(pairs: Sequence[tuple[float, float]]) -> float:
    """Normalized time reduction over failing cycles.

    Each pair is (full execution time, time to first fault); the value is
    the fraction of failing-cycle time saved by stopping at the first fault.
    """
    if not pairs:
        raise NoFailingCyclesError("no failing cycles to evaluate")
    for full, to_first in pairs:
        if to_first > full:
            raise ValueError("time to first fault exceeds full execution time")
    total_full = sum(full for full, _ in pairs)
    if total_full == 0:
        raise ZeroTotalTimeError("failing cycles have zero total time")
    saved = sum(full - to_first for full, to_first in pairs)
    return saved / total_full


@dataclass(frozen=True)
class CycleTiming:
    """Durations making up one cycle's testing time.

    ``prioritization`` is the wall-clock cost of ranking (zero when no
    prioritization runs), ``build`` the compilation/static-analysis time the
    ranking can hide behind, ``first_fault`` the time until the end of the
    first failing test (None on passing cycles), and ``full_execution`` the
    time to run the whole suite.
    """

    prioritization: float
    build: float
    first_fault: float | None
    full_execution: float

    def __post_init__(self) -> None:
        for name in ("prioritization", "build", "full_execution"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.first_fault is not None:
            if self.first_fault < 0:
                raise ValueError("first_fault must be >= 0")
            if self.first_fault > self.full_execution:
                raise ValueError("first_fault cannot exceed full_execution")


def testing_time(timing: CycleTiming) -> float:
    """Total testing time of a cycle: unhidden prioritization overhead plus
    execution until the first fault (or the whole suite when none fails)."""
    overhead = max(timing.prioritization - timing.build, 0.0)
    spent = (
        timing.first_fault
        if timing.first_fault is not None
        else timing.full_execution
    )
    return overhead + spent


def atr(approach_tt: Sequence[float], baseline_tt: Sequence[float]) -> float:
    """Actual time reduction of an approach against the no-prioritization
    baseline over the same cycle population; negative values mean the
    approach would be harmful in practice."""
    if len(approach_tt) != len(baseline_tt):
        raise ValueError("approach and baseline must cover the same cycles")
    total_baseline = sum(baseline_tt)
    if total_baseline == 0:
        raise ZeroBaselineTimeError("baseline testing time is zero")
    return 1.0 - sum(approach_tt) / total_baseline


def mean_median(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        raise NoDataError("empty population")
    return statistics.mean(values), statistics.median(values)


@dataclass(frozen=True)
class Aggregate:
    """Per-project and cross-project aggregation of per-cycle values.

    Cross-project rows are the unweighted mean and median of the available
    per-project means; projects with no data do not contribute.
    """

    per_project: dict[str, tuple[float, float]]
    cross_mean: float
    cross_median: float


def aggregate(values_by_project: Mapping[str, Sequence[float]]) -> Aggregate:
    per_project = {
        project: mean_median(values)
        for project, values in values_by_project.items()
        if values
    }
    if not per_project:
        raise NoDataError("no project has any data")
    project_means = [mean for mean, _ in per_project.values()]
    return Aggregate(
        per_project=per_project,
        cross_mean=statistics.mean(project_means),
        cross_median=statistics.median(project_means),
    )
