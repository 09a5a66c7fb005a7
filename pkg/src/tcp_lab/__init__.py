"""tcp-lab: test case prioritization toolkit.

Prioritizers, approach combinators, APFD-family evaluation metrics, and a
CLI harness that replays CI build histories.
"""

from tcp_lab.model import (
    Approach,
    CycleRecord,
    FlattenPolicy,
    ProjectHistory,
    RankedSuite,
    RankingError,
    TestCaseId,
    TestExecution,
    Verdict,
    flatten,
    validate_ranking,
)

__version__ = "0.1.0"

__all__ = [
    "Approach",
    "CycleRecord",
    "FlattenPolicy",
    "ProjectHistory",
    "RankedSuite",
    "RankingError",
    "TestCaseId",
    "TestExecution",
    "Verdict",
    "flatten",
    "validate_ranking",
    "__version__",
]
