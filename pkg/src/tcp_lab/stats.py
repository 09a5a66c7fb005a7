"""Nonparametric comparison of approaches across subject programs.

The comparison protocol is an omnibus Friedman test over per-project scores
followed, only on rejection, by pairwise two-sided Wilcoxon signed-rank
tests with Holm adjustment. Groupings for critical-difference diagrams
connect approaches whose pairwise differences are all non-significant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.stats import chi2

# Largest number of non-zero differences for which the exact Wilcoxon null
# distribution is enumerated; above this the normal approximation with
# continuity and tie corrections is used.
WILCOXON_EXACT_LIMIT = 20


class DegenerateMatrixError(ValueError):
    """Score matrix too small, ragged, or containing non-finite entries."""


@dataclass(frozen=True)
class ScoreMatrix:
    """Rows are subject programs, columns approaches, entries per-project means."""

    approaches: tuple[str, ...]
    projects: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "approaches", tuple(self.approaches))
        object.__setattr__(self, "projects", tuple(self.projects))
        object.__setattr__(
            self, "values", tuple(tuple(row) for row in self.values)
        )
        if len(self.approaches) < 2:
            raise DegenerateMatrixError("need at least 2 approaches")
        if len(self.projects) < 2:
            raise DegenerateMatrixError("need at least 2 projects")
        if len(self.values) != len(self.projects):
            raise DegenerateMatrixError("one row per project required")
        for row in self.values:
            if len(row) != len(self.approaches):
                raise DegenerateMatrixError("ragged score matrix")
            for entry in row:
                if not math.isfinite(entry):
                    raise DegenerateMatrixError(f"non-finite entry {entry!r}")

    def column(self, approach: str) -> tuple[float, ...]:
        j = self.approaches.index(approach)
        return tuple(row[j] for row in self.values)


def _descending_ranks(row: Sequence[float]) -> list[float]:
    """Within-row ranks: the highest value gets rank 1; ties average."""
    k = len(row)
    order = sorted(range(k), key=lambda j: -row[j])
    ranks = [0.0] * k
    i = 0
    while i < k:
        j = i
        while j + 1 < k and row[order[j + 1]] == row[order[i]]:
            j += 1
        average = (i + j) / 2 + 1
        for t in range(i, j + 1):
            ranks[order[t]] = average
        i = j + 1
    return ranks


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    mean_ranks: tuple[float, ...]


def friedman(matrix: ScoreMatrix) -> FriedmanResult:
    """Friedman test in the classic chi-square mean-rank form.

    Ranks are assigned within each project row (best score = rank 1, ties
    averaged); the statistic follows chi-square with k-1 degrees of freedom
    under the null of no difference between approaches.
    """
    k = len(matrix.approaches)
    n = len(matrix.projects)
    rank_sums = [0.0] * k
    for row in matrix.values:
        for j, rank in enumerate(_descending_ranks(row)):
            rank_sums[j] += rank
    mean_ranks = tuple(total / n for total in rank_sums)
    center = (k + 1) / 2
    statistic = 12.0 * n / (k * (k + 1)) * sum(
        (rank - center) ** 2 for rank in mean_ranks
    )
    p_value = float(chi2.sf(statistic, k - 1))
    return FriedmanResult(statistic, p_value, mean_ranks)


@dataclass(frozen=True)
class WilcoxonResult:
    """Two-sided signed-rank test outcome.

    ``all_zero`` flags the degenerate every-difference-zero input, reported
    as p = 1 by convention.
    """

    p_value: float
    n_nonzero: int
    all_zero: bool
    method: str


def _signed_ranks(differences: Sequence[float]) -> tuple[list[float], float]:
    """Average ranks of |d| (ascending) and the positive-rank sum."""
    n = len(differences)
    order = sorted(range(n), key=lambda i: abs(differences[i]))
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and abs(differences[order[j + 1]]) == abs(
            differences[order[i]]
        ):
            j += 1
        average = (i + j) / 2 + 1
        for t in range(i, j + 1):
            ranks[order[t]] = average
        i = j + 1
    w_plus = sum(rank for rank, d in zip(ranks, differences) if d > 0)
    return ranks, w_plus


def _exact_two_sided(ranks: Sequence[float], w_plus: float) -> float:
    # Doubled ranks are integers even with tie-averaged half ranks, allowing
    # an exact subset-sum convolution of the null distribution.
    doubled = [int(round(2 * r)) for r in ranks]
    total = sum(doubled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled:
        for s in range(total, r - 1, -1):
            if counts[s - r]:
                counts[s] += counts[s - r]
    w2 = int(round(2 * w_plus))
    universe = 2 ** len(ranks)
    at_most = sum(counts[: w2 + 1]) / universe
    at_least = sum(counts[w2:]) / universe
    return min(1.0, 2.0 * min(at_most, at_least))


def _normal_two_sided(ranks: Sequence[float], w_plus: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4
    variance = n * (n + 1) * (2 * n + 1) / 24
    tie_sizes: dict[float, int] = {}
    for r in ranks:
        tie_sizes[r] = tie_sizes.get(r, 0) + 1
    variance -= sum(t**3 - t for t in tie_sizes.values()) / 48
    correction = 0.5 * (1 if w_plus > mean else -1 if w_plus < mean else 0)
    z = (w_plus - mean - correction) / math.sqrt(variance)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2)))


def wilcoxon_signed_rank(pairs: Sequence[tuple[float, float]]) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped (Wilcoxon convention). The null
    distribution is exact up to ``WILCOXON_EXACT_LIMIT`` non-zero
    differences and normally approximated above.
    """
    if not pairs:
        raise ValueError("at least one pair required")
    differences = [x - y for x, y in pairs]
    nonzero = [d for d in differences if d != 0]
    if not nonzero:
        return WilcoxonResult(1.0, 0, True, "all_zero")
    ranks, w_plus = _signed_ranks(nonzero)
    if len(nonzero) <= WILCOXON_EXACT_LIMIT:
        return WilcoxonResult(
            _exact_two_sided(ranks, w_plus), len(nonzero), False, "exact"
        )
    return WilcoxonResult(
        _normal_two_sided(ranks, w_plus), len(nonzero), False, "normal"
    )


def holm_adjust(p_values: Sequence[float]) -> list[float]:
    """Holm step-down adjustment, returned in the original order."""
    for p in p_values:
        if not 0 <= p <= 1:
            raise ValueError(f"p-value out of [0, 1]: {p}")
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running = 0.0
    for position, index in enumerate(order):
        candidate = min((m - position) * p_values[index], 1.0)
        running = max(running, candidate)
        adjusted[index] = running
    return adjusted


@dataclass(frozen=True)
class CdGrouping:
    """Critical-difference data: mean ranks plus connected groups.

    Groups are ordered best-first by mean rank; an approach can appear in
    several overlapping groups, and together the groups cover all
    approaches. ``pairwise_p`` holds the Holm-adjusted p-values (empty when
    the omnibus test did not reject).
    """

    mean_ranks: dict[str, float]
    groups: tuple[tuple[str, ...], ...]
    friedman_statistic: float
    friedman_p: float
    pairwise_p: dict[tuple[str, str], float]


def cd_grouping(matrix: ScoreMatrix, alpha: float = 0.05) -> CdGrouping:
    """Group approaches with no pairwise significant differences.

    If the Friedman test does not reject at ``alpha``, a single group
    containing every approach is returned. Otherwise pairwise Wilcoxon tests
    on the per-project scores are Holm-adjusted and approaches are joined
    when no pair inside the group differs at ``alpha``; groups are maximal
    contiguous runs in mean-rank order.
    """
    omnibus = friedman(matrix)
    names = matrix.approaches
    mean_ranks = dict(zip(names, omnibus.mean_ranks))
    by_rank = sorted(names, key=lambda name: mean_ranks[name])
    if omnibus.p_value >= alpha:
        return CdGrouping(
            mean_ranks,
            (tuple(by_rank),),
            omnibus.statistic,
            omnibus.p_value,
            {},
        )
    pairs = [
        (names[a], names[b])
        for a in range(len(names))
        for b in range(a + 1, len(names))
    ]
    raw = [
        wilcoxon_signed_rank(
            list(zip(matrix.column(a), matrix.column(b)))
        ).p_value
        for a, b in pairs
    ]
    adjusted = dict(zip(pairs, holm_adjust(raw)))

    def differs(a: str, b: str) -> bool:
        p = adjusted.get((a, b), adjusted.get((b, a)))
        return p < alpha

    k = len(by_rank)
    groups: list[tuple[str, ...]] = []
    covered_up_to = -1
    for start in range(k):
        end = start
        while end + 1 < k and all(
            not differs(by_rank[end + 1], by_rank[i]) for i in range(start, end + 1)
        ):
            end += 1
        if end > covered_up_to:
            groups.append(tuple(by_rank[start : end + 1]))
            covered_up_to = end
    return CdGrouping(
        mean_ranks,
        tuple(groups),
        omnibus.statistic,
        omnibus.p_value,
        adjusted,
    )
