"""Core data model shared by every prioritization approach.

A test suite is prioritized into a :class:`RankedSuite`, an ordered partition
of the suite into tie groups. Approaches implement :class:`Approach` and obey
a strict replay protocol: ``rank`` sees only the case identifiers of the
cycle about to run (never its verdicts or durations), ``observe`` is called
exactly once per cycle after ranking, and ``reset`` restores the initial
state. :func:`validate_ranking` enforces the partition guarantees and
:func:`flatten` turns a ranking into an executable total order.
"""

from __future__ import annotations

import enum
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

TestCaseId = str

DUPLICATE_CASE = "DUPLICATE_CASE"
MISSING_CASE = "MISSING_CASE"
FOREIGN_CASE = "FOREIGN_CASE"


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"


class FlattenPolicy(enum.Enum):
    STABLE = "stable"
    RANDOM = "random"


class RankingError(ValueError):
    """A ranking is not an exact partition of the suite it was built for."""

    def __init__(self, code: str, case: TestCaseId):
        self.code = code
        self.case = case
        super().__init__(f"{code}: {case!r}")


@dataclass(frozen=True)
class TestExecution:
    """One test case run within a cycle: identity, cost, and outcome."""

    __test__ = False  # domain type, not a pytest case

    case: TestCaseId
    duration: float
    verdict: Verdict

    def __post_init__(self) -> None:
        if not self.case:
            raise ValueError("test case id must be non-empty")
        if not self.duration >= 0:
            raise ValueError(f"duration must be >= 0, got {self.duration}")

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.FAIL


@dataclass(frozen=True)
class CycleRecord:
    """One CI build: the executed suite plus build metadata.

    ``build_time`` is the time spent on compilation and static analysis; it
    is ``None`` until joined from an external build-time table. ``executions``
    keeps the project's original execution order.
    """

    index: int
    job_id: str
    commit_id: str
    build_time: float | None
    executions: tuple[TestExecution, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "executions", tuple(self.executions))
        if not self.executions:
            raise ValueError(f"cycle {self.index} has no executions")
        if self.build_time is not None and not self.build_time >= 0:
            raise ValueError(f"build_time must be >= 0, got {self.build_time}")
        seen: set[TestCaseId] = set()
        for execution in self.executions:
            if execution.case in seen:
                raise ValueError(
                    f"cycle {self.index} contains duplicate case {execution.case!r}"
                )
            seen.add(execution.case)

    @property
    def suite(self) -> tuple[TestCaseId, ...]:
        """Case ids in original execution order."""
        return tuple(e.case for e in self.executions)

    @property
    def failed(self) -> bool:
        """A cycle is failed iff at least one execution failed."""
        return any(e.failed for e in self.executions)

    @property
    def total_duration(self) -> float:
        return sum(e.duration for e in self.executions)


@dataclass(frozen=True)
class ProjectHistory:
    """Chronologically ordered cycles of one subject program.

    ``sources`` optionally maps a case id to the source text backing it, for
    code-distance approaches. Treat instances as immutable values; operations
    that change a history return a new one.
    """

    project: str
    cycles: tuple[CycleRecord, ...]
    sources: Mapping[TestCaseId, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cycles", tuple(self.cycles))
        for previous, current in zip(self.cycles, self.cycles[1:]):
            if current.index <= previous.index:
                raise ValueError(
                    f"cycle indices must be strictly increasing: "
                    f"{previous.index} then {current.index}"
                )

    @property
    def failed_cycles(self) -> tuple[CycleRecord, ...]:
        return tuple(c for c in self.cycles if c.failed)


@dataclass(frozen=True)
class RankedSuite:
    """An ordered partition of a suite into tie groups.

    Groups are semantically sets; the internal tuple order of each group
    records the cycle's original case order so that STABLE flattening needs
    no extra context.
    """

    groups: tuple[tuple[TestCaseId, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "groups", tuple(tuple(group) for group in self.groups)
        )
        for group in self.groups:
            if not group:
                raise ValueError("ranking groups must be non-empty")

    def __iter__(self):
        return iter(self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def cases(self) -> tuple[TestCaseId, ...]:
        """All cases in group order (within groups: original order)."""
        return tuple(case for group in self.groups for case in group)

    def is_all_singletons(self) -> bool:
        return all(len(group) == 1 for group in self.groups)


def ranked_from_scores(
    suite: Sequence[TestCaseId],
    score_of,
    *,
    descending: bool = False,
) -> RankedSuite:
    """Group a suite by score, preserving original order inside tie groups.

    ``score_of`` maps a case id to a sortable score; equal scores form one
    tie group. Ascending by default (lower score first).
    """
    scored = [(score_of(case), position, case) for position, case in enumerate(suite)]
    scored.sort(key=lambda item: (-item[0] if descending else item[0], item[1]))
    groups: list[list[TestCaseId]] = []
    last_score: object = None
    for score, _, case in scored:
        if groups and score == last_score:
            groups[-1].append(case)
        else:
            groups.append([case])
            last_score = score
    return RankedSuite(tuple(tuple(g) for g in groups))


def validate_ranking(suite: Iterable[TestCaseId], ranking: RankedSuite) -> None:
    """Check that ``ranking`` partitions ``suite`` exactly.

    Raises :class:`RankingError` with code DUPLICATE_CASE, FOREIGN_CASE, or
    MISSING_CASE naming the offending case id.
    """
    suite_set = set(suite)
    seen: set[TestCaseId] = set()
    for group in ranking.groups:
        for case in group:
            if case in seen:
                raise RankingError(DUPLICATE_CASE, case)
            if case not in suite_set:
                raise RankingError(FOREIGN_CASE, case)
            seen.add(case)
    missing = suite_set - seen
    if missing:
        raise RankingError(MISSING_CASE, min(missing))


def flatten(
    ranking: RankedSuite,
    policy: FlattenPolicy = FlattenPolicy.STABLE,
    seed: int = 0,
) -> list[TestCaseId]:
    """Turn a ranking into a total order respecting group order.

    STABLE keeps each group's stored (original) order; RANDOM shuffles each
    group with one RNG seeded by ``seed``, so equal seeds give equal output.
    """
    if policy is FlattenPolicy.STABLE:
        return list(ranking.cases())
    rng = random.Random(seed)
    order: list[TestCaseId] = []
    for group in ranking.groups:
        members = list(group)
        rng.shuffle(members)
        order.extend(members)
    return order


class Approach(ABC):
    """Behavioral contract for every prioritization approach.

    ``rank`` receives the cycle's suite in original execution order and must
    return a valid :class:`RankedSuite`; the current cycle's verdicts and
    durations are not available to it by construction. ``observe`` is called
    exactly once per cycle, after ``rank``, with the cycle's full execution
    results. ``rank`` must be free of state changes so that repeated calls
    under the same observe history return the same ranking. ``reset``
    restores the freshly constructed state.

    Instances are stateful and confined to a single replay sequence; run
    distinct instances for concurrent evaluations.
    """

    @abstractmethod
    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        """Prioritize the given suite using only previously observed cycles."""

    def observe(self, executions: Sequence[TestExecution]) -> None:
        """Consume one cycle's execution results."""

    def reset(self) -> None:
        """Restore the initial state."""
