"""Approach combinators: mixers, interpolators, and tiebreakers.

Combinators treat sub-approaches as black boxes: each cycle every active
child prioritizes the suite independently and only the resulting rankings
are merged. Execution feedback and resets propagate to all children, even
those whose weight currently excludes them from ranking, so children keep
training throughout.

The module also defines the declarative spec-tree format (JSON-compatible
nested dicts) from which :func:`build` constructs approach instances, and
the preset table of ready-made combined approaches.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from tcp_lab.approaches import (
    DEFAULT_ALPHA,
    BaseOrder,
    CodeDistOrder,
    DistanceMetric,
    ExeTimeOrder,
    FailDensityOrder,
    Folder,
    FoldFailsOrder,
    RandomOrder,
    RecentnessOrder,
    SourceVectors,
    StartPolicy,
    farthest_pair_start,
    safe_distance,
)
from tcp_lab.model import (
    Approach,
    FlattenPolicy,
    RankedSuite,
    TestCaseId,
    TestExecution,
    flatten,
    ranked_from_scores,
)

DEFAULT_SCHULZE_CAP = 1000


class QueueMismatchError(ValueError):
    """Sub-rankings do not cover the same suite."""


class SuiteTooLargeError(ValueError):
    """Suite exceeds the configured cap for a cubic-time merging scheme."""


class InvalidSpecError(ValueError):
    """An approach spec tree cannot be built."""


def _check_same_suite(
    rankings: Sequence[RankedSuite], suite: Sequence[TestCaseId]
) -> None:
    expected = set(suite)
    if len(expected) != len(suite):
        raise QueueMismatchError("suite contains duplicate cases")
    for ranking in rankings:
        cases = ranking.cases()
        if len(cases) != len(suite) or set(cases) != expected:
            raise QueueMismatchError("ranking does not cover the expected suite")


def _check_weights(weights: Sequence[float], count: int) -> None:
    if len(weights) != count:
        raise ValueError("one weight per ranking required")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    if not any(w > 0 for w in weights):
        raise ValueError("at least one weight must be positive")


def random_mix(
    queues: Sequence[Sequence[TestCaseId]],
    weights: Sequence[float],
    seed: int = 0,
) -> RankedSuite:
    """Merge total orders by weighted random draws.

    Each step picks queue ``i`` with probability ``weights[i] / sum`` and
    emits its first not-yet-emitted case. Deterministic per seed.
    """
    if not queues:
        raise ValueError("at least one queue required")
    _check_weights(weights, len(queues))
    reference = list(queues[0])
    _check_same_suite(
        [RankedSuite(tuple((c,) for c in q)) for q in queues], reference
    )
    indices = [i for i in range(len(queues)) if weights[i] > 0]
    active_weights = [weights[i] for i in indices]
    pointers = [0] * len(queues)
    emitted: set[TestCaseId] = set()
    order: list[TestCaseId] = []
    rng = random.Random(seed)
    for _ in range(len(reference)):
        picked = rng.choices(indices, weights=active_weights)[0]
        queue = queues[picked]
        p = pointers[picked]
        while queue[p] in emitted:
            p += 1
        pointers[picked] = p + 1
        emitted.add(queue[p])
        order.append(queue[p])
    return RankedSuite(tuple((case,) for case in order))


def borda_mix(
    rankings: Sequence[RankedSuite],
    weights: Sequence[float],
    suite: Sequence[TestCaseId] | None = None,
) -> RankedSuite:
    """Merge rankings by weighted positional (Borda) scoring.

    In a ranking over ``n`` cases the first position is worth ``n - 1``
    points down to 0 for the last; tied cases receive the average of the
    points their positions span. Scores are weight-multiplied and summed;
    the output sorts descending by score with equal scores tied.

    ``suite`` fixes the original case order used inside output tie groups;
    it defaults to the first ranking's case order.
    """
    if not rankings:
        raise ValueError("at least one ranking required")
    _check_weights(weights, len(rankings))
    if suite is None:
        suite = rankings[0].cases()
    _check_same_suite(rankings, suite)
    n = len(suite)
    scores: dict[TestCaseId, float] = {case: 0.0 for case in suite}
    for ranking, weight in zip(rankings, weights):
        position = 0
        for group in ranking.groups:
            size = len(group)
            points = n - 1 - position - (size - 1) / 2
            for case in group:
                scores[case] += weight * points
            position += size
    return ranked_from_scores(suite, scores.__getitem__, descending=True)


def pairwise_preferences(
    rankings: Sequence[RankedSuite],
    weights: Sequence[float],
    suite: Sequence[TestCaseId],
) -> list[list[float]]:
    """d[x][y] = total weight of rankings placing x strictly before y."""
    index = {case: i for i, case in enumerate(suite)}
    n = len(suite)
    d = [[0.0] * n for _ in range(n)]
    for ranking, weight in zip(rankings, weights):
        if weight == 0:
            continue
        above: list[TestCaseId] = []
        for group in ranking.groups:
            for earlier in above:
                for case in group:
                    d[index[earlier]][index[case]] += weight
            above.extend(group)
    return d


def strongest_paths(d: Sequence[Sequence[float]]) -> list[list[float]]:
    """Widest-path strengths: maximize the minimum edge along any path.

    Floyd-Warshall-style relaxation over the preference matrix.
    """
    n = len(d)
    p = [list(row) for row in d]
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            pji = p[j][i]
            row_i = p[i]
            row_j = p[j]
            for k in range(n):
                if k == i or k == j:
                    continue
                strength = pji if pji < row_i[k] else row_i[k]
                if strength > row_j[k]:
                    row_j[k] = strength
    return p


def schulze_mix(
    rankings: Sequence[RankedSuite],
    weights: Sequence[float],
    suite: Sequence[TestCaseId] | None = None,
    max_suite: int = DEFAULT_SCHULZE_CAP,
) -> RankedSuite:
    """Merge rankings with the Schulze (strongest-path) method.

    x beats y iff the strongest path from x to y is stronger than the one
    from y to x; cases are ordered by descending count of beaten opponents,
    equal counts tied. This satisfies the majority winner rule but costs
    O(n^3), hence the suite-size cap.
    """
    if not rankings:
        raise ValueError("at least one ranking required")
    _check_weights(weights, len(rankings))
    if suite is None:
        suite = rankings[0].cases()
    _check_same_suite(rankings, suite)
    n = len(suite)
    if n > max_suite:
        raise SuiteTooLargeError(
            f"suite of {n} cases exceeds the Schulze cap of {max_suite}"
        )
    index = {case: i for i, case in enumerate(suite)}
    p = strongest_paths(pairwise_preferences(rankings, weights, suite))
    beats = [0] * n
    for x in range(n):
        for y in range(n):
            if x != y and p[x][y] > p[y][x]:
                beats[x] += 1
    return ranked_from_scores(suite, lambda case: beats[index[case]], descending=True)


@dataclass
class Cutoff:
    """Progress towards a cycle-count goal driving interpolation."""

    target: int
    progress: int = 0

    def __post_init__(self) -> None:
        if self.target < 1:
            raise ValueError("cutoff target must be >= 1")
        if self.progress < 0:
            raise ValueError("progress must be >= 0")

    @property
    def fraction(self) -> float:
        return min(self.progress / self.target, 1.0)


def interpolate_weights(cutoff: Cutoff) -> tuple[float, float]:
    """Weights (before, after) = (1 - f, f) for f = min(progress/target, 1)."""
    f = cutoff.fraction
    return 1.0 - f, f


class CountMode:
    FAILED_CYCLES = "failed_cycles"
    ALL_CYCLES = "all_cycles"

    _VALUES = (FAILED_CYCLES, ALL_CYCLES)


def break_ties(primary: RankedSuite, secondary: RankedSuite) -> RankedSuite:
    """Refine each primary tie group by the secondary ranking's relative order.

    Secondary residual ties persist in the output. Group boundaries of the
    primary ranking are never crossed.
    """
    if set(primary.cases()) != set(secondary.cases()):
        raise QueueMismatchError("primary and secondary rankings cover different suites")
    groups: list[tuple[TestCaseId, ...]] = []
    for primary_group in primary.groups:
        members = set(primary_group)
        for secondary_group in secondary.groups:
            refined = tuple(case for case in secondary_group if case in members)
            if refined:
                groups.append(refined)
    return RankedSuite(tuple(groups))


def break_ties_codedist(
    primary: RankedSuite,
    vectors: SourceVectors,
    metric: DistanceMetric,
) -> RankedSuite:
    """Refine primary tie groups by farthest-point selection in code space.

    Groups are processed in order; within a group the next pick maximizes
    the minimum distance to everything already prioritized, across the whole
    suite rather than per group. The very first pick applies the
    farthest-pair start rule restricted to the first group. Distance ties
    resolve to the original order.
    """

    def distance(a: TestCaseId, b: TestCaseId) -> float:
        return safe_distance(vectors.vector(a), vectors.vector(b), metric)

    picked: list[TestCaseId] = []
    min_dist: dict[TestCaseId, float] = {}
    pending = [list(group) for group in primary.groups]

    def pick(case: TestCaseId, group: list[TestCaseId]) -> None:
        group.remove(case)
        picked.append(case)
        for other_group in pending:
            for candidate in other_group:
                d = distance(candidate, case)
                if candidate not in min_dist or d < min_dist[candidate]:
                    min_dist[candidate] = d

    for group in pending:
        if not picked and group:
            pick(farthest_pair_start(list(group), distance), group)
        while group:
            best_index = max(
                range(len(group)),
                key=lambda i: (min_dist[group[i]], -i),
            )
            pick(group[best_index], group)
    return RankedSuite(tuple((case,) for case in picked))


class _Combined(Approach):
    """Shared feedback/reset propagation over child approaches."""

    def __init__(self, children: Sequence[Approach]):
        self._children = list(children)

    def observe(self, executions: Sequence[TestExecution]) -> None:
        for child in self._children:
            child.observe(executions)

    def reset(self) -> None:
        for child in self._children:
            child.reset()


class _MixedOrder(_Combined):
    """Base for mixers: weighted children, zero-weight ones never ranked."""

    def __init__(self, children: Sequence[tuple[Approach, float]]):
        approaches = [child for child, _ in children]
        weights = [weight for _, weight in children]
        if not children:
            raise ValueError("a mixer needs at least one child")
        _check_weights(weights, len(children))
        super().__init__(approaches)
        self._weights = weights

    def _active(self) -> tuple[list[Approach], list[float]]:
        active = [
            (child, weight)
            for child, weight in zip(self._children, self._weights)
            if weight > 0
        ]
        return [c for c, _ in active], [w for _, w in active]


class RandomMixedOrder(_MixedOrder):
    """Mixer emitting cases by weighted random draws from child queues."""

    def __init__(self, children: Sequence[tuple[Approach, float]], seed: int = 0):
        super().__init__(children)
        self.seed = seed
        self._reset_seed_stream()

    def _reset_seed_stream(self) -> None:
        self._stream = random.Random(self.seed)
        self._cycle_seed = self._stream.getrandbits(64)

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        children, weights = self._active()
        queues = [
            flatten(child.rank(suite), FlattenPolicy.STABLE) for child in children
        ]
        return random_mix(queues, weights, seed=self._cycle_seed)

    def observe(self, executions: Sequence[TestExecution]) -> None:
        super().observe(executions)
        self._cycle_seed = self._stream.getrandbits(64)

    def reset(self) -> None:
        super().reset()
        self._reset_seed_stream()


class BordaMixedOrder(_MixedOrder):
    """Mixer merging child rankings by weighted Borda count."""

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        children, weights = self._active()
        rankings = [child.rank(suite) for child in children]
        return borda_mix(rankings, weights, suite=suite)


class SchulzeMixedOrder(_MixedOrder):
    """Mixer merging child rankings by the Schulze method."""

    def __init__(
        self,
        children: Sequence[tuple[Approach, float]],
        max_suite: int = DEFAULT_SCHULZE_CAP,
    ):
        super().__init__(children)
        self.max_suite = max_suite

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        children, weights = self._active()
        rankings = [child.rank(suite) for child in children]
        return schulze_mix(rankings, weights, suite=suite, max_suite=self.max_suite)


class InterpolatedOrder(_Combined):
    """Shift weight from a before-approach to an after-approach as cycles pass.

    Realized as a Borda mix of the two children under the interpolation
    weights; both children receive feedback every cycle, so the after child
    trains during the before phase. Progress counts failed cycles or all
    cycles depending on the mode, advancing only on replayed cycles.
    """

    def __init__(
        self,
        before: Approach,
        after: Approach,
        cutoff: int,
        count_mode: str = CountMode.FAILED_CYCLES,
    ):
        super().__init__([before, after])
        if cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        if count_mode not in CountMode._VALUES:
            raise ValueError(f"unknown count mode: {count_mode!r}")
        self.before = before
        self.after = after
        self.cutoff = cutoff
        self.count_mode = count_mode
        self._progress = 0

    @property
    def progress(self) -> int:
        return self._progress

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        weight_before, weight_after = interpolate_weights(
            Cutoff(self.cutoff, self._progress)
        )
        active = [
            (child, weight)
            for child, weight in ((self.before, weight_before), (self.after, weight_after))
            if weight > 0
        ]
        rankings = [child.rank(suite) for child, _ in active]
        return borda_mix(rankings, [w for _, w in active], suite=suite)

    def observe(self, executions: Sequence[TestExecution]) -> None:
        super().observe(executions)
        if self.count_mode == CountMode.ALL_CYCLES or any(
            e.failed for e in executions
        ):
            self._progress += 1

    def reset(self) -> None:
        super().reset()
        self._progress = 0


class GenericBrokenOrder(_Combined):
    """Tiebreaker running a secondary approach inside each primary tie group."""

    def __init__(self, primary: Approach, secondary: Approach):
        super().__init__([primary, secondary])
        self.primary = primary
        self.secondary = secondary

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        return break_ties(self.primary.rank(suite), self.secondary.rank(suite))


class CodeDistBrokenOrder(_Combined):
    """Tiebreaker spreading picks across the code representation space."""

    def __init__(
        self,
        primary: Approach,
        metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
        sources: Mapping[TestCaseId, str] | None = None,
    ):
        super().__init__([primary])
        self.primary = primary
        self.metric = DistanceMetric(metric)
        self._vectors = SourceVectors(sources)

    def rank(self, suite: Sequence[TestCaseId]) -> RankedSuite:
        return break_ties_codedist(self.primary.rank(suite), self._vectors, self.metric)


# --- declarative spec trees ------------------------------------------------

_ORDER_SUFFIX = "_order"

_LEAF_TYPES = {
    "base",
    "random",
    "recentness",
    "fold_fails",
    "exe_time",
    "fail_density",
    "code_dist",
}
_COMBINATOR_TYPES = {
    "random_mix",
    "borda_mix",
    "schulze_mix",
    "interpolated",
    "break_ties",
    "break_ties_codedist",
}

_ALLOWED_KEYS = {
    "base": set(),
    "random": {"seed"},
    "recentness": set(),
    "fold_fails": {"folder", "alpha"},
    "exe_time": {"alpha"},
    "fail_density": {"alpha_fail", "alpha_time"},
    "code_dist": {"metric", "start"},
    "random_mix": {"children", "seed"},
    "borda_mix": {"children"},
    "schulze_mix": {"children", "max_suite"},
    "interpolated": {"before", "after", "cutoff", "count_mode"},
    "break_ties": {"primary", "secondary"},
    "break_ties_codedist": {"primary", "metric"},
}


def _canonical_type(raw: object) -> str:
    if not isinstance(raw, str) or not raw:
        raise InvalidSpecError(f"spec node needs a string 'type', got {raw!r}")
    name = raw
    if name.endswith(_ORDER_SUFFIX) and name[: -len(_ORDER_SUFFIX)] in _LEAF_TYPES:
        name = name[: -len(_ORDER_SUFFIX)]
    if name not in _LEAF_TYPES and name not in _COMBINATOR_TYPES:
        raise InvalidSpecError(f"unknown approach type {raw!r}")
    return name


class _SeedAllocator:
    """Deterministic per-node seeds for randomized specs without explicit ones."""

    def __init__(self, master_seed: int):
        self._rng = random.Random(master_seed)

    def seed_for(self, node: Mapping) -> int:
        explicit = node.get("seed")
        drawn = self._rng.getrandbits(63)
        if explicit is None:
            return drawn
        if not isinstance(explicit, int):
            raise InvalidSpecError(f"seed must be an integer, got {explicit!r}")
        return explicit


def _float_param(node: Mapping, key: str, default: float) -> float:
    value = node.get(key, default)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise InvalidSpecError(f"{key} must be a number, got {value!r}")
    return float(value)


def _build_children(
    node: Mapping, builder
) -> list[tuple[Approach, float]]:
    children = node.get("children")
    if not isinstance(children, list) or not children:
        raise InvalidSpecError("a mixer needs a non-empty 'children' list")
    built: list[tuple[Approach, float]] = []
    for entry in children:
        if not isinstance(entry, Mapping) or "spec" not in entry:
            raise InvalidSpecError(
                "each mixer child must be an object with 'weight' and 'spec'"
            )
        weight = entry.get("weight", 1)
        if not isinstance(weight, (int, float)) or isinstance(weight, bool) or weight < 0:
            raise InvalidSpecError(f"child weight must be >= 0, got {weight!r}")
        built.append((builder(entry["spec"]), float(weight)))
    if not any(weight > 0 for _, weight in built):
        raise InvalidSpecError("a mixer needs at least one child with weight > 0")
    return built


def build(
    spec: Mapping | str,
    *,
    sources: Mapping[TestCaseId, str] | None = None,
    master_seed: int = 0,
) -> Approach:
    """Construct an approach from a spec tree or preset name.

    ``sources`` backs the code-distance nodes; randomized nodes without an
    explicit ``seed`` get one derived deterministically from ``master_seed``
    and their position in the tree.
    """
    seeds = _SeedAllocator(master_seed)

    def construct(node: Mapping | str) -> Approach:
        if isinstance(node, str):
            table = presets()
            if node not in table:
                raise InvalidSpecError(f"unknown preset {node!r}")
            return construct(table[node])
        if not isinstance(node, Mapping):
            raise InvalidSpecError(f"spec node must be an object, got {node!r}")
        kind = _canonical_type(node.get("type"))
        extra = set(node) - _ALLOWED_KEYS[kind] - {"type", "comment"}
        if extra:
            raise InvalidSpecError(
                f"unexpected keys {sorted(extra)} for type {kind!r}"
            )
        if kind == "base":
            return BaseOrder()
        if kind == "random":
            return RandomOrder(seed=seeds.seed_for(node))
        if kind == "recentness":
            return RecentnessOrder()
        if kind == "fold_fails":
            folder_raw = node.get("folder", "sum")
            try:
                folder = Folder(folder_raw)
            except ValueError:
                raise InvalidSpecError(f"unknown folder {folder_raw!r}") from None
            return FoldFailsOrder(folder, alpha=_float_param(node, "alpha", DEFAULT_ALPHA))
        if kind == "exe_time":
            return ExeTimeOrder(alpha=_float_param(node, "alpha", DEFAULT_ALPHA))
        if kind == "fail_density":
            return FailDensityOrder(
                alpha_fail=_float_param(node, "alpha_fail", DEFAULT_ALPHA),
                alpha_time=_float_param(node, "alpha_time", DEFAULT_ALPHA),
            )
        if kind == "code_dist":
            return CodeDistOrder(
                metric=_metric_param(node),
                start=_start_param(node),
                sources=sources,
            )
        if kind == "random_mix":
            seed = seeds.seed_for(node)
            return RandomMixedOrder(_build_children(node, construct), seed=seed)
        if kind == "borda_mix":
            return BordaMixedOrder(_build_children(node, construct))
        if kind == "schulze_mix":
            cap = node.get("max_suite", DEFAULT_SCHULZE_CAP)
            if not isinstance(cap, int) or cap < 1:
                raise InvalidSpecError(f"max_suite must be a positive integer, got {cap!r}")
            return SchulzeMixedOrder(_build_children(node, construct), max_suite=cap)
        if kind == "interpolated":
            for key in ("before", "after", "cutoff"):
                if key not in node:
                    raise InvalidSpecError(f"interpolated spec needs {key!r}")
            cutoff = node["cutoff"]
            if not isinstance(cutoff, int) or cutoff < 1:
                raise InvalidSpecError(f"cutoff must be a positive integer, got {cutoff!r}")
            count_mode = node.get("count_mode", CountMode.FAILED_CYCLES)
            if count_mode not in CountMode._VALUES:
                raise InvalidSpecError(f"unknown count_mode {count_mode!r}")
            return InterpolatedOrder(
                construct(node["before"]),
                construct(node["after"]),
                cutoff=cutoff,
                count_mode=count_mode,
            )
        if kind == "break_ties":
            for key in ("primary", "secondary"):
                if key not in node:
                    raise InvalidSpecError(f"break_ties spec needs {key!r}")
            return GenericBrokenOrder(
                construct(node["primary"]), construct(node["secondary"])
            )
        if kind == "break_ties_codedist":
            if "primary" not in node:
                raise InvalidSpecError("break_ties_codedist spec needs 'primary'")
            return CodeDistBrokenOrder(
                construct(node["primary"]),
                metric=_metric_param(node),
                sources=sources,
            )
        raise InvalidSpecError(f"unknown approach type {kind!r}")  # pragma: no cover

    def _metric_param(node: Mapping) -> DistanceMetric:
        raw = node.get("metric", DistanceMetric.EUCLIDEAN.value)
        try:
            return DistanceMetric(raw)
        except ValueError:
            raise InvalidSpecError(f"unknown metric {raw!r}") from None

    def _start_param(node: Mapping) -> StartPolicy:
        raw = node.get("start", StartPolicy.FARTHEST_PAIR.value)
        try:
            return StartPolicy(raw)
        except ValueError:
            raise InvalidSpecError(f"unknown start policy {raw!r}") from None

    return construct(spec)


def spec_is_randomized(spec: Mapping | str) -> bool:
    """True if the spec tree (or named preset) contains a randomized node."""
    if isinstance(spec, str):
        table = presets()
        if spec not in table:
            raise InvalidSpecError(f"unknown preset {spec!r}")
        return spec_is_randomized(table[spec])
    if not isinstance(spec, Mapping):
        raise InvalidSpecError(f"spec node must be an object, got {spec!r}")
    kind = _canonical_type(spec.get("type"))
    if kind in ("random", "random_mix"):
        return True
    nested: list[Mapping | str] = []
    for child in spec.get("children", []) or []:
        if isinstance(child, Mapping) and "spec" in child:
            nested.append(child["spec"])
    for key in ("before", "after", "primary", "secondary"):
        if key in spec:
            nested.append(spec[key])
    return any(spec_is_randomized(sub) for sub in nested)


def presets() -> dict[str, Mapping]:
    """Named ready-made combinator specs.

    The three-way mixers blend failure folding, recentness, and execution
    time with the execution-time weight halved; the interpolator hands over
    from an equal Borda mix of execution time and recentness to failure
    density after five failed cycles; the tiebreakers refine the clusters of
    total-strategy failure folding.
    """
    mixer_children = [
        {"weight": 1, "spec": {"type": "fold_fails", "folder": "exp_smooth"}},
        {"weight": 1, "spec": {"type": "recentness"}},
        {"weight": 0.5, "spec": {"type": "exe_time"}},
    ]
    interpolator_before = {
        "type": "borda_mix",
        "children": [
            {"weight": 1, "spec": {"type": "exe_time"}},
            {"weight": 1, "spec": {"type": "recentness"}},
        ],
    }
    return {
        "P1.1": {"type": "random_mix", "children": mixer_children},
        "P1.2": {"type": "borda_mix", "children": mixer_children},
        "P1.3": {"type": "schulze_mix", "children": mixer_children},
        "P2": {
            "type": "interpolated",
            "before": interpolator_before,
            "after": {"type": "fail_density"},
            "cutoff": 5,
            "count_mode": "failed_cycles",
        },
        "P3.1": {
            "type": "break_ties",
            "primary": {"type": "fold_fails", "folder": "sum"},
            "secondary": {"type": "exe_time"},
        },
        "P3.2": {
            "type": "break_ties_codedist",
            "primary": {"type": "fold_fails", "folder": "sum"},
            "metric": "euclidean",
        },
    }
