"""Domain types shared by all algorithms: hypotheses, distributions, mixtures,
weights, sample accounting, and per-round diagnostics.

Synthetic instances are exact point-mass distributions over a finite domain,
so distribution errors are computable exactly; dataset-backed instances are
with-replacement resamplers over partition rows and are evaluated empirically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MASS_TOL = 1e-12

__all__ = [
    "MASS_TOL",
    "LabeledExample",
    "FiniteDomain",
    "Hypothesis",
    "TableHypothesis",
    "ThresholdStump",
    "TreeHypothesis",
    "PluralityVote",
    "PointMassDistribution",
    "SampleOracle",
    "PointMassOracle",
    "DatasetOracle",
    "MixtureOracle",
    "WeightState",
    "SampleLedger",
    "RoundDiagnostics",
    "PlayerInstance",
    "exact_error",
    "empirical_error",
    "normalize_weights",
    "mixture_sampler",
    "balance_ratio",
    "as_sample",
]


@dataclass(frozen=True)
class LabeledExample:
    """A single (point, label) pair; `point` is a finite-domain id or a feature vector."""

    point: object
    label: int


@dataclass(frozen=True)
class FiniteDomain:
    """Finite instance space. Point ids are indices into `point_names`."""

    point_names: tuple[str, ...]
    n_labels: int = 2
    pinned: tuple[tuple[int, int], ...] = ()  # (point id, forced label)

    @property
    def size(self) -> int:
        return len(self.point_names)

    def name_to_id(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.point_names)}


# ---------------------------------------------------------------------------
# Hypotheses
# ---------------------------------------------------------------------------


class Hypothesis:
    """A deterministic, total labeling function.

    Finite-domain hypotheses map int arrays of point ids to labels; feature
    hypotheses map (n, f) float arrays to labels. Evaluation is pure.
    """

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> int:
        if np.ndim(x) <= 0:
            return int(self.evaluate(np.asarray([x]))[0])
        return int(self.evaluate(np.asarray(x)[None, :])[0])


class TableHypothesis(Hypothesis):
    """Member of a finite class: a label table over the whole domain."""

    def __init__(self, table: np.ndarray, class_id: str = "", member_index: int | None = None):
        self.table = np.asarray(table, dtype=np.int64)
        self.class_id = class_id
        self.member_index = member_index

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        return self.table[np.asarray(xs, dtype=np.intp)]

    def __repr__(self) -> str:
        return f"TableHypothesis({self.class_id!r}, index={self.member_index})"


class ThresholdStump(Hypothesis):
    """Single-feature threshold rule on feature vectors."""

    def __init__(self, feature: int, threshold: float, left_label: int, right_label: int):
        self.feature = feature
        self.threshold = float(threshold)
        self.left_label = int(left_label)
        self.right_label = int(right_label)

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        col = np.asarray(xs, dtype=float)[:, self.feature]
        return np.where(col <= self.threshold, self.left_label, self.right_label)

    def __repr__(self) -> str:
        return (
            f"ThresholdStump(x[{self.feature}] <= {self.threshold!r} "
            f"-> {self.left_label} else {self.right_label})"
        )


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "label")

    def __init__(self, feature=None, threshold=None, left=None, right=None, label=None):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.label = label

    @property
    def is_leaf(self) -> bool:
        return self.label is not None


class TreeHypothesis(Hypothesis):
    """Axis-aligned binary decision tree on feature vectors."""

    def __init__(self, root: _TreeNode, depth: int = 0, n_leaves: int = 1):
        self.root = root
        self.depth = depth
        self.n_leaves = n_leaves

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.empty(len(xs), dtype=np.int64)
        stack = [(self.root, np.arange(len(xs)))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node.is_leaf:
                out[idx] = node.label
                continue
            mask = xs[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
        return out


class PluralityVote(Hypothesis):
    """Pointwise most-frequent output of the child hypotheses.

    Ties go to the smallest label value so replays are deterministic. With a
    single child this evaluates identically to that child. Vote counts are
    materialized per query; `as_table` bakes an optional lookup table for
    finite domains.
    """

    def __init__(self, children: Sequence[Hypothesis]):
        children = tuple(children)
        if not children:
            raise ValueError("plurality requires at least one hypothesis")
        self.children = children

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        votes = np.stack([g.evaluate(xs) for g in self.children])
        if len(self.children) == 1:
            return votes[0]
        candidates = np.unique(votes)
        counts = (votes[None, :, :] == candidates[:, None, None]).sum(axis=1)
        return candidates[np.argmax(counts, axis=0)]

    def as_table(self, domain_size: int) -> TableHypothesis:
        ids = np.arange(domain_size)
        return TableHypothesis(self.evaluate(ids), class_id="plurality-table")


# ---------------------------------------------------------------------------
# Distributions and oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointMassDistribution:
    """Exact labeled distribution: distinct support points with masses summing to 1."""

    points: np.ndarray
    labels: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int64)
        masses = np.asarray(self.masses, dtype=float)
        if not (points.shape == labels.shape == masses.shape) or points.ndim != 1:
            raise ValueError("support arrays must be 1-d and aligned")
        if points.size == 0:
            raise ValueError("empty support")
        if np.unique(points).size != points.size:
            raise ValueError("support points must be distinct")
        if np.any(masses < 0):
            raise ValueError("negative mass")
        if abs(masses.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {masses.sum()!r}, not 1")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int, float]]) -> "PointMassDistribution":
        pts, labs, ms = zip(*pairs)
        return cls(np.asarray(pts), np.asarray(labs), np.asarray(ms))

    @property
    def support_size(self) -> int:
        return len(self.points)


def exact_error(g: Hypothesis, dist: PointMassDistribution) -> float:
    """Probability mass of the support points that g labels differently."""
    mismatch = g.evaluate(dist.points) != dist.labels
    return float(dist.masses[mismatch].sum())


def as_sample(sample) -> tuple[np.ndarray, np.ndarray]:
    """Normalize a sample (array pair or LabeledExample sequence) to arrays."""
    if isinstance(sample, tuple) and len(sample) == 2:
        xs, ys = sample
        return np.asarray(xs), np.asarray(ys, dtype=np.int64)
    examples = list(sample)
    if examples and isinstance(examples[0], LabeledExample):
        xs = np.asarray([e.point for e in examples])
        ys = np.asarray([e.label for e in examples], dtype=np.int64)
        return xs, ys
    raise TypeError("expected (xs, ys) arrays or a sequence of LabeledExample")


def empirical_error(g: Hypothesis, sample) -> float:
    """Fraction of the multiset labeled differently by g, with multiplicity."""
    xs, ys = as_sample(sample)
    if len(ys) == 0:
        raise ValueError("empirical error of an empty sample is undefined")
    return float(np.mean(g.evaluate(xs) != ys))


class SampleOracle:
    """I.i.d. sampler for one player's distribution.

    `player` is the rng-stream id used when deriving per-player streams;
    identical seed and stream id reproduce the exact draw sequence.
    """

    player: int = 0

    def draw(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


class PointMassOracle(SampleOracle):
    def __init__(self, dist: PointMassDistribution, player: int = 0):
        self.dist = dist
        self.player = player
        cum = np.cumsum(dist.masses)
        cum[-1] = 1.0
        self._cum = cum

    def draw(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        idx = np.searchsorted(self._cum, rng.random(int(n)), side="right")
        idx = np.minimum(idx, len(self._cum) - 1)
        return self.dist.points[idx], self.dist.labels[idx]


class DatasetOracle(SampleOracle):
    """Resamples partition rows with replacement."""

    def __init__(self, features: np.ndarray, labels: np.ndarray, player: int = 0):
        if len(features) == 0:
            raise ValueError("empty partition part")
        self.features = np.asarray(features, dtype=float)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.player = player

    def draw(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        idx = rng.integers(0, len(self.labels), size=int(n))
        return self.features[idx], self.labels[idx]


class MixtureOracle(SampleOracle):
    """Weighted mixture of player oracles.

    A draw of n examples picks a player count vector ~ Multinomial(n, p) and
    then draws each player's share from its own oracle, merged in player-index
    order; every example is charged to the player it was drawn from.
    """

    def __init__(self, p: np.ndarray, oracles: Sequence[SampleOracle]):
        p = np.asarray(p, dtype=float)
        if p.ndim != 1 or len(p) != len(oracles):
            raise ValueError("probability vector and oracle list disagree")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("invalid mixture probabilities")
        self.p = p / p.sum()
        self.oracles = tuple(oracles)

    def draw_with_counts(self, n: int, rng: np.random.Generator):
        counts = rng.multinomial(int(n), self.p)
        xs_parts, ys_parts = [], []
        for oracle, c in zip(self.oracles, counts):
            xs, ys = oracle.draw(int(c), rng)
            xs_parts.append(xs)
            ys_parts.append(ys)
        return np.concatenate(xs_parts), np.concatenate(ys_parts), counts

    def draw(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        xs, ys, _ = self.draw_with_counts(n, rng)
        return xs, ys


def mixture_sampler(p, oracles: Sequence[SampleOracle]) -> MixtureOracle:
    """Oracle for the p-weighted average of the players' distributions."""
    if isinstance(p, WeightState):
        p = p.probabilities()
    return MixtureOracle(np.asarray(p, dtype=float), oracles)


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightState:
    """Per-player weights, stored as base-2 exponents.

    The algorithms only ever double weights, so w_i = 2**exponents[i] exactly,
    with exponents[i] counting the rounds in which player i failed its test.
    """

    exponents: np.ndarray
    round: int = 0

    def __post_init__(self):
        object.__setattr__(self, "exponents", np.asarray(self.exponents, dtype=np.int64))

    @classmethod
    def initial(cls, k: int) -> "WeightState":
        if k < 1:
            raise ValueError("need at least one player")
        return cls(np.zeros(k, dtype=np.int64), round=0)

    @property
    def k(self) -> int:
        return len(self.exponents)

    def weights(self) -> np.ndarray:
        return np.exp2(self.exponents.astype(float))

    def probabilities(self) -> np.ndarray:
        shifted = np.exp2((self.exponents - self.exponents.max()).astype(float))
        return shifted / shifted.sum()

    def total(self) -> float:
        return float(self.weights().sum())  # inf past float range; log_total stays finite

    def log_total(self) -> float:
        shift = int(self.exponents.max())
        rest = np.exp2((self.exponents - shift).astype(float)).sum()
        return float(shift * np.log(2.0) + np.log(rest))

    def doubled(self, excluded: np.ndarray) -> "WeightState":
        excluded = np.asarray(excluded, dtype=bool)
        return WeightState(self.exponents + excluded.astype(np.int64), self.round + 1)


def normalize_weights(w) -> np.ndarray:
    """Probability vector p(i) = w_i / sum(w); rejects nonpositive weights."""
    if isinstance(w, WeightState):
        return w.probabilities()
    arr = np.asarray(w, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("weights must be a nonempty vector")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError("weights must be positive and finite")
    return arr / arr.sum()


# ---------------------------------------------------------------------------
# Accounting and diagnostics
# ---------------------------------------------------------------------------


class SampleLedger:
    """Single-writer draw counter, split per player, phase, and round."""

    PHASES = ("learn", "test")

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("need at least one player")
        self.k = k
        self._totals = {phase: np.zeros(k, dtype=np.int64) for phase in self.PHASES}
        self._by_round: dict[tuple[int, str], np.ndarray] = {}

    def charge(self, player: int, n: int, phase: str = "learn", round: int = 0) -> None:
        if n < 0:
            raise ValueError("draw counts never decrease")
        counts = np.zeros(self.k, dtype=np.int64)
        counts[player] = n
        self.charge_counts(counts, phase, round)

    def charge_counts(self, counts: np.ndarray, phase: str = "learn", round: int = 0) -> None:
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (self.k,) or np.any(counts < 0):
            raise ValueError("bad count vector")
        self._totals[phase] += counts
        key = (round, phase)
        if key not in self._by_round:
            self._by_round[key] = np.zeros(self.k, dtype=np.int64)
        self._by_round[key] += counts

    def per_player(self, phase: str | None = None) -> np.ndarray:
        if phase is None:
            return sum(self._totals.values()).copy()
        return self._totals[phase].copy()

    def total(self, phase: str | None = None) -> int:
        return int(self.per_player(phase).sum())

    def round_counts(self, round: int, phase: str) -> np.ndarray:
        return self._by_round.get((round, phase), np.zeros(self.k, dtype=np.int64)).copy()

    def rounds(self) -> list[int]:
        return sorted({r for (r, _) in self._by_round})

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleLedger) or other.k != self.k:
            return NotImplemented
        if set(self._by_round) != set(other._by_round):
            return False
        return all(np.array_equal(self._by_round[k], other._by_round[k]) for k in self._by_round)


def balance_ratio(ledger: SampleLedger) -> float:
    """Largest per-player draw count over the per-player average."""
    per_player = ledger.per_player()
    total = per_player.sum()
    if total <= 0:
        raise ValueError("balance ratio of an empty ledger is undefined")
    return float(per_player.max() / (total / ledger.k))


@dataclass
class RoundDiagnostics:
    """Proof-side quantities recorded per round.

    `total_weight` is W at the start of the round (inf past float range; the
    log form is always finite), `growth` is ln(W_next / W). `learner_failed`
    and `test_failures` are only known when exact errors are computable.
    """

    t: int
    total_weight: float
    log_total_weight: float
    growth: float
    learner_failed: int | None
    test_failures: np.ndarray | None
    probabilities: np.ndarray | None = None
    player_errors: np.ndarray | None = None
    high_error_mass: float | None = None
    passed: np.ndarray | None = None  # the accuracy-test pass mask Z

    def __post_init__(self):
        if not self.total_weight > 0:
            raise ValueError("total weight must be positive")
        if self.growth > np.log(2.0) + 1e-12:
            raise ValueError("total weight can at most double per round")

    @property
    def test_failure_count(self) -> int | None:
        if self.test_failures is None:
            return None
        return int(np.sum(self.test_failures))


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


@dataclass
class PlayerInstance:
    """k labeled player distributions plus the learning model.

    Synthetic instances carry point-mass forms (`dists`) and the target, which
    makes exact errors available; dataset-backed instances carry resampling
    oracles only. `model` is the blackbox learner spec: a finite hypothesis
    class (ERM) or tree parameters.
    """

    oracles: tuple[SampleOracle, ...]
    model: object
    dists: tuple[PointMassDistribution, ...] | None = None
    target: Hypothesis | None = None
    domain: FiniteDomain | None = None
    instance_id: str = "instance"
    d: float | None = None
    gen_epsilon: float | None = None
    generator: str | None = None
    gen_seed: int | None = None
    permutation: np.ndarray | None = None

    def __post_init__(self):
        self.oracles = tuple(self.oracles)
        if self.dists is not None:
            self.dists = tuple(self.dists)
            if len(self.dists) != len(self.oracles):
                raise ValueError("one exact distribution per oracle required")

    @property
    def k(self) -> int:
        return len(self.oracles)

    @property
    def has_exact_errors(self) -> bool:
        return self.dists is not None

    def player_errors(self, g: Hypothesis) -> np.ndarray:
        if self.dists is None:
            raise ValueError("exact errors unavailable for dataset-backed instances")
        if self.domain is not None and isinstance(g, PluralityVote):
            g = g.as_table(self.domain.size)
        return np.array([exact_error(g, dist) for dist in self.dists])
