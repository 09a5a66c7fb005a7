"""Base (non-combinator) prioritization approaches.

History-based approaches score each case from previously observed cycles,
most of them through exponential smoothing of per-case observations; the
code-distance approach orders cases along a greedy farthest-neighbour chain
through a bag-of-tokens representation of their source texts.

Scoring conventions: a case's smoothed state updates only on cycles where
the case actually ran, and state is retained if a case disappears from the
suite and later returns.
"""

from __future__ import annotations

import enum
import math
import random
import re
from collections import Counter
from typing import Callable, Mapping, Sequence

from tcp_lab.model import (
    Approach,
    RankedSuite,
    TestCaseId,
    TestExecution,
    ranked_from_scores,
)

DEFAULT_ALPHA = 0.8

# Guard against division by a zero smoothed duration in failure-density scores.
ZERO_DURATION_EPSILON = 1e-9

CodeVector = Mapping[str, int]


class AlphaRangeError(ValueError):
    """Smoothing factor outside (0, 1]."""

    def __init__(self, alpha: float):
        super().__init__(f"ALPHA_OUT_OF_RANGE: alpha must be in (0, 1], got {alpha}")


class ZeroVectorError(ValueError):
    """Cosine distance is undefined when both vectors are empty."""


def _check_alpha(alpha: float) -> float:
    if not 0 < alpha <= 1:
        raise AlphaRangeError(alpha)
    return alpha


def exp_smooth_step(prev: float, alpha: float, observation: float) -> float:
    """One exponential smoothing update: alpha*observation + (1-alpha)*prev."""
    _check_alpha(alpha)
    return alpha * observation + (1 - alpha) * prev


class SmoothedSeries:
    """Per-case exponentially smoothed values, lazily initialized at 0."""

    def __init__(self, alpha: float):
        self.alpha = _check_alpha(alpha)
        self._values: dict[TestCaseId, float] = {}

    def update(self, case: TestCaseId, observation: float) -> None:
        self._values[case] = exp_smooth_step(
            self._values.get(case, 0.0), self.alpha, observation
        )

    def value(self, case: TestCaseId) -> float:
        return self._values.get(case, 0.0)

    def snapshot(self) -> dict[TestCaseId, float]:
        return dict(self._values)

    def reset(self) -> None:
        self._values.clear()


class BaseOrder(Approach):
    """Run the suite in its original arrangement; the no-prioritization baseline."""

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        return RankedSuite(tuple((case,) for case in suite))


class RandomOrder(Approach):
    """Shuffle the suite uniformly, one fresh sub-seed per cycle.

    The sub-seed advances in ``observe`` so that ranking is repeatable for a
    fixed observe history; two instances with equal seeds replay identically.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.reset()

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        order = list(suite)
        random.Random(self._cycle_seed).shuffle(order)
        return RankedSuite(tuple((case,) for case in order))

    def observe(self, executions: Sequence[TestExecution]) -> None:
        self._cycle_seed = self._stream.getrandbits(64)

    def reset(self) -> None:
        self._stream = random.Random(self.seed)
        self._cycle_seed = self._stream.getrandbits(64)


class RecentnessOrder(Approach):
    """Cases seen in fewer prior cycles run first; equal counts tie."""

    def __init__(self):
        self._appearances: Counter[TestCaseId] = Counter()

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        return ranked_from_scores(suite, lambda case: self._appearances[case])

    def observe(self, executions: Sequence[TestExecution]) -> None:
        for execution in executions:
            self._appearances[execution.case] += 1

    def reset(self) -> None:
        self._appearances.clear()


class Folder(enum.Enum):
    """Aggregation applied to a case's per-cycle failure indicators."""

    SUM = "sum"
    EXP_SMOOTH = "exp_smooth"


class FoldFailsOrder(Approach):
    """Fold each case's failure history into a score; higher scores run first.

    SUM accumulates the number of failing cycles (the total strategy);
    EXP_SMOOTH applies exponential smoothing to the 0/1 failure indicator,
    which weighs recent failures more.
    """

    def __init__(self, folder: Folder = Folder.SUM, alpha: float = DEFAULT_ALPHA):
        self.folder = Folder(folder)
        if self.folder is Folder.EXP_SMOOTH:
            self._smoothed = SmoothedSeries(alpha)
        else:
            _check_alpha(alpha)
            self._smoothed = None
        self._sums: Counter[TestCaseId] = Counter()

    def score(self, case: TestCaseId) -> float:
        if self._smoothed is not None:
            return self._smoothed.value(case)
        return float(self._sums[case])

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        return ranked_from_scores(suite, self.score, descending=True)

    def observe(self, executions: Sequence[TestExecution]) -> None:
        for execution in executions:
            indicator = 1.0 if execution.failed else 0.0
            if self._smoothed is not None:
                self._smoothed.update(execution.case, indicator)
            else:
                self._sums[execution.case] += int(indicator)

    def reset(self) -> None:
        if self._smoothed is not None:
            self._smoothed.reset()
        self._sums.clear()


class ExeTimeOrder(Approach):
    """Cheapest-first by exponentially smoothed execution time.

    Unseen cases score 0 and therefore lead the ranking as one tie group.
    """

    def __init__(self, alpha: float = DEFAULT_ALPHA):
        self._smoothed = SmoothedSeries(alpha)

    def score(self, case: TestCaseId) -> float:
        return self._smoothed.value(case)

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        return ranked_from_scores(suite, self.score)

    def observe(self, executions: Sequence[TestExecution]) -> None:
        for execution in executions:
            self._smoothed.update(execution.case, execution.duration)

    def reset(self) -> None:
        self._smoothed.reset()


class FailDensityOrder(Approach):
    """Rank by smoothed failures divided by smoothed execution time."""

    def __init__(
        self,
        alpha_fail: float = DEFAULT_ALPHA,
        alpha_time: float = DEFAULT_ALPHA,
    ):
        self._fails = SmoothedSeries(alpha_fail)
        self._times = SmoothedSeries(alpha_time)

    def score(self, case: TestCaseId) -> float:
        return self._fails.value(case) / max(
            self._times.value(case), ZERO_DURATION_EPSILON
        )

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        return ranked_from_scores(suite, self.score, descending=True)

    def observe(self, executions: Sequence[TestExecution]) -> None:
        for execution in executions:
            self._fails.update(execution.case, 1.0 if execution.failed else 0.0)
            self._times.update(execution.case, execution.duration)

    def reset(self) -> None:
        self._fails.reset()
        self._times.reset()


_NON_ALNUM = re.compile(r"[^0-9A-Za-z]+")
_CAMEL_HUMP = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


def tokenize(source: str) -> CodeVector:
    """Bag-of-tokens representation of a source text.

    Splits on non-alphanumeric boundaries and camelCase humps, lowercases,
    and counts. Empty text gives an empty vector.
    """
    counts: Counter[str] = Counter()
    for chunk in _NON_ALNUM.split(source):
        for token in _CAMEL_HUMP.split(chunk):
            if token:
                counts[token.lower()] += 1
    return counts


class DistanceMetric(enum.Enum):
    MANHATTAN = "manhattan"
    EUCLIDEAN = "euclidean"
    COSINE_DISTANCE = "cosine"


def vector_distance(u: CodeVector, v: CodeVector, metric: DistanceMetric) -> float:
    """Distance between two sparse token-count vectors.

    Cosine distance is 1 - cosine similarity; it raises
    :class:`ZeroVectorError` when both vectors are empty, and an empty
    vector is at distance 1 from any non-empty one.
    """
    metric = DistanceMetric(metric)
    if metric is DistanceMetric.COSINE_DISTANCE:
        if not u and not v:
            raise ZeroVectorError("cosine distance undefined for two empty vectors")
        if not u or not v:
            return 1.0
        dot = sum(count * v.get(token, 0) for token, count in u.items())
        norm_u = math.sqrt(sum(count * count for count in u.values()))
        norm_v = math.sqrt(sum(count * count for count in v.values()))
        return max(0.0, 1.0 - dot / (norm_u * norm_v))
    keys = u.keys() | v.keys()
    diffs = (u.get(token, 0) - v.get(token, 0) for token in keys)
    if metric is DistanceMetric.MANHATTAN:
        return float(sum(abs(d) for d in diffs))
    return math.sqrt(sum(d * d for d in diffs))


class StartPolicy(enum.Enum):
    FARTHEST_PAIR = "farthest_pair"
    FIRST_CASE = "first_case"


def safe_distance(u: CodeVector, v: CodeVector, metric: DistanceMetric) -> float:
    """vector_distance with the two-empty-vectors cosine case mapped to 0."""
    try:
        return vector_distance(u, v, metric)
    except ZeroVectorError:
        return 0.0


class SourceVectors:
    """Lazy tokenized vectors for a project's case sources.

    Cases without a source text get the empty vector.
    """

    def __init__(self, sources: Mapping[TestCaseId, str] | None):
        self._sources = sources or {}
        self._cache: dict[TestCaseId, CodeVector] = {}

    def vector(self, case: TestCaseId) -> CodeVector:
        if case not in self._cache:
            self._cache[case] = tokenize(self._sources.get(case, ""))
        return self._cache[case]


def farthest_pair_start(
    suite: Sequence[TestCaseId],
    distance: Callable[[TestCaseId, TestCaseId], float],
) -> TestCaseId:
    """Member of the maximum-distance pair with the lower original position.

    Ties between pairs resolve to the earliest pair in position order.
    """
    best_distance = -1.0
    best_start = suite[0]
    for i in range(len(suite)):
        for j in range(i + 1, len(suite)):
            d = distance(suite[i], suite[j])
            if d > best_distance:
                best_distance = d
                best_start = suite[i]
    return best_start


class CodeDistOrder(Approach):
    """Greedy longest-distance chain through the code representation space.

    Starting per policy, repeatedly appends the unvisited case farthest from
    the last chosen one; distance ties resolve to the original order. Exact
    longest-path search would be intractable, hence the greedy step.
    """

    def __init__(
        self,
        metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
        start: StartPolicy = StartPolicy.FARTHEST_PAIR,
        sources: Mapping[TestCaseId, str] | None = None,
    ):
        self.metric = DistanceMetric(metric)
        self.start = StartPolicy(start)
        self._vectors = SourceVectors(sources)

    def _distance(self, a: TestCaseId, b: TestCaseId) -> float:
        return safe_distance(self._vectors.vector(a), self._vectors.vector(b), self.metric)

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        if self.start is StartPolicy.FARTHEST_PAIR:
            first = farthest_pair_start(suite, self._distance)
        else:
            first = suite[0]
        position = {case: i for i, case in enumerate(suite)}
        remaining = [case for case in suite if case != first]
        chain = [first]
        while remaining:
            last = chain[-1]
            best = min(
                remaining,
                key=lambda case: (-self._distance(last, case), position[case]),
            )
            remaining.remove(best)
            chain.append(best)
        return RankedSuite(tuple((case,) for case in chain))
