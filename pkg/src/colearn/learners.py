"""Blackbox single-distribution learners and their sample-size calculators.

The collaborative algorithms only see `pac_learn`: draw the profile's sample
count from an oracle and hand the sample to the instance's model, which is
either empirical risk minimization over a finite hypothesis class or a greedy
Gini decision tree for feature-vector data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    MixtureOracle,
    SampleLedger,
    SampleOracle,
    TableHypothesis,
    ThresholdStump,
    TreeHypothesis,
    _TreeNode,
    as_sample,
)
from .rng import stream

__all__ = [
    "SampleSizeProfile",
    "THEORY",
    "TUNED",
    "FiniteHypothesisClass",
    "PinnedBinaryClass",
    "TreeParams",
    "sample_size",
    "erm_learn",
    "pac_learn",
    "tree_learn",
    "fit_model",
]


@dataclass(frozen=True)
class SampleSizeProfile:
    """Sample-size regime: `theory` scales (d + ln(1/delta))/epsilon by the
    configurable constant; `tuned` divides the same numerator by 10*epsilon.
    `log_base` switches the tuned formula's logarithm (natural by default)."""

    mode: str = "theory"
    theory_constant: float = 1.0
    log_base: float = math.e

    def __post_init__(self):
        if self.mode not in ("theory", "tuned"):
            raise ValueError(f"unknown profile mode {self.mode!r}")
        if self.theory_constant <= 0 or self.log_base <= 1:
            raise ValueError("bad profile parameters")


THEORY = SampleSizeProfile("theory")
TUNED = SampleSizeProfile("tuned")


def sample_size(epsilon: float, delta: float, d: float, profile: SampleSizeProfile = THEORY) -> int:
    """Draw count the blackbox learner is entitled to at (epsilon, delta, d).

    `d` is the capacity knob (a real; the budget ladder sweeps it continuously).
    epsilon = 1 is admitted as the vacuous threshold used by budget search.
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon {epsilon!r} outside (0, 1]")
    if not 0 < delta < 1:
        raise ValueError(f"delta {delta!r} outside (0, 1)")
    if d <= 0:
        raise ValueError("capacity parameter must be positive")
    if profile.mode == "theory":
        raw = profile.theory_constant * (d + math.log(1.0 / delta)) / epsilon
    else:
        raw = (d + math.log(1.0 / delta, profile.log_base)) / (10.0 * epsilon)
    return max(1, math.ceil(raw))


# ---------------------------------------------------------------------------
# Finite hypothesis classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteHypothesisClass:
    """Explicitly enumerated class: one label table per member."""

    tables: np.ndarray  # (members, domain_size)
    vc_dimension: float
    class_id: str = "finite-class"

    def __post_init__(self):
        tables = np.asarray(self.tables, dtype=np.int64)
        if tables.ndim != 2 or tables.shape[0] == 0:
            raise ValueError("class must be a nonempty (members, domain) table")
        object.__setattr__(self, "tables", tables)

    def __len__(self) -> int:
        return self.tables.shape[0]

    @property
    def domain_size(self) -> int:
        return self.tables.shape[1]

    def member(self, index: int) -> TableHypothesis:
        return TableHypothesis(self.tables[index], class_id=self.class_id, member_index=int(index))

    def erm(self, points: np.ndarray, labels: np.ndarray) -> TableHypothesis:
        mism = self.tables[:, np.asarray(points, dtype=np.intp)] != labels[None, :]
        errors = mism.mean(axis=1)
        return self.member(int(np.argmin(errors)))  # argmin keeps the smallest index on ties


@dataclass(frozen=True)
class PinnedBinaryClass:
    """All binary functions on a finite domain, with some points pinned.

    Member index m labels the j-th free point (ascending point id) with bit j
    of m, so smaller indices prefer label 0. ERM reduces to an independent
    per-point majority vote with ties and unseen points resolved to 0, which
    is exactly the smallest-index empirical minimizer; `enumerate` materializes
    the member table for cross-checking on small domains.
    """

    domain_size: int
    pinned: tuple[tuple[int, int], ...] = ()
    class_id: str = "binary-functions"

    def __post_init__(self):
        seen = set()
        for point, label in self.pinned:
            if point in seen or not 0 <= point < self.domain_size or label not in (0, 1):
                raise ValueError("bad pinned assignment")
            seen.add(point)

    @property
    def free_points(self) -> np.ndarray:
        pinned_ids = {p for p, _ in self.pinned}
        return np.array([p for p in range(self.domain_size) if p not in pinned_ids], dtype=np.int64)

    @property
    def vc_dimension(self) -> int:
        return self.domain_size - len(self.pinned)

    @property
    def size(self) -> int:
        return 1 << self.vc_dimension  # python int; too big for __len__ on large domains

    def _base_table(self) -> np.ndarray:
        table = np.zeros(self.domain_size, dtype=np.int64)
        for point, label in self.pinned:
            table[point] = label
        return table

    def member(self, index: int) -> TableHypothesis:
        if not 0 <= index < self.size:
            raise IndexError("member index out of range")
        table = self._base_table()
        for j, point in enumerate(self.free_points):
            table[point] = (index >> j) & 1
        return TableHypothesis(table, class_id=self.class_id, member_index=int(index))

    def enumerate(self) -> FiniteHypothesisClass:
        if self.vc_dimension > 20:
            raise ValueError("class too large to enumerate")
        tables = np.stack([self.member(m).table for m in range(self.size)])
        return FiniteHypothesisClass(tables, vc_dimension=self.vc_dimension, class_id=self.class_id)

    def erm(self, points: np.ndarray, labels: np.ndarray) -> TableHypothesis:
        points = np.asarray(points, dtype=np.intp)
        ones = np.bincount(points, weights=(labels == 1), minlength=self.domain_size)
        zeros = np.bincount(points, weights=(labels == 0), minlength=self.domain_size)
        table = self._base_table()
        free = self.free_points
        table[free] = (ones[free] > zeros[free]).astype(np.int64)
        index = int(sum(1 << j for j, p in enumerate(free) if table[p]))
        h = TableHypothesis(table, class_id=self.class_id, member_index=index)
        return h


def erm_learn(sample, hypothesis_class) -> TableHypothesis:
    """Class member minimizing empirical error on the sample; ties break to the
    smallest member index."""
    xs, ys = as_sample(sample)
    if len(ys) == 0:
        raise ValueError("cannot learn from an empty sample")
    if not isinstance(hypothesis_class, (FiniteHypothesisClass, PinnedBinaryClass)):
        raise TypeError(f"not a finite hypothesis class: {hypothesis_class!r}")
    return hypothesis_class.erm(np.asarray(xs, dtype=np.intp), np.asarray(ys, dtype=np.int64))


# ---------------------------------------------------------------------------
# Decision trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 10
    min_leaf: int = 1


def _gini(counts: np.ndarray, n: int) -> float:
    if n == 0:
        return 0.0
    frac = counts / n
    return 1.0 - float(np.sum(frac * frac))


def _majority_label(y: np.ndarray) -> int:
    counts = np.bincount(y)
    return int(np.argmax(counts))  # ties -> smallest label value


def _best_split(X: np.ndarray, y: np.ndarray, n_labels: int, min_leaf: int):
    n = len(y)
    parent = _gini(np.bincount(y, minlength=n_labels), n)
    best = None  # (gain, feature, threshold)
    for f in range(X.shape[1]):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        col_sorted = col[order]
        onehot = np.zeros((n, n_labels))
        onehot[np.arange(n), y[order]] = 1.0
        left_counts = np.cumsum(onehot, axis=0)
        total = left_counts[-1]
        boundaries = np.nonzero(col_sorted[:-1] < col_sorted[1:])[0]  # split after position b
        for b in boundaries:
            n_left = b + 1
            n_right = n - n_left
            if n_left < min_leaf or n_right < min_leaf:
                continue
            gain = parent - (
                n_left / n * _gini(left_counts[b], n_left)
                + n_right / n * _gini(total - left_counts[b], n_right)
            )
            threshold = 0.5 * (col_sorted[b] + col_sorted[b + 1])
            if best is None or gain > best[0] + 1e-15:
                best = (gain, f, threshold)
    return best


def _grow(X: np.ndarray, y: np.ndarray, depth: int, params: TreeParams, n_labels: int) -> _TreeNode:
    if depth >= params.max_depth or np.all(y == y[0]):
        return _TreeNode(label=_majority_label(y))
    split = _best_split(X, y, n_labels, params.min_leaf)
    if split is None:
        return _TreeNode(label=_majority_label(y))
    _, feature, threshold = split
    mask = X[:, feature] <= threshold
    left = _grow(X[mask], y[mask], depth + 1, params, n_labels)
    right = _grow(X[~mask], y[~mask], depth + 1, params, n_labels)
    return _TreeNode(feature=feature, threshold=threshold, left=left, right=right)


def _measure(node: _TreeNode) -> tuple[int, int]:
    if node.is_leaf:
        return 0, 1
    dl, ll = _measure(node.left)
    dr, lr = _measure(node.right)
    return 1 + max(dl, dr), ll + lr


def tree_learn(sample, max_depth: int = 10, min_leaf: int = 1):
    """Greedy top-down Gini tree; impure nodes split even at zero gain so
    interactions like XOR resolve at the allowed depth."""
    xs, ys = as_sample(sample)
    X = np.asarray(xs, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if len(ys) == 0:
        raise ValueError("cannot learn from an empty sample")
    if not np.all(np.isfinite(X)):
        raise ValueError("tree features must be finite numerics")
    if max_depth < 0 or min_leaf < 1:
        raise ValueError("bad tree parameters")
    y = np.asarray(ys, dtype=np.int64)
    if np.any(y < 0):
        raise ValueError("labels must be nonnegative integers")
    root = _grow(X, y, 0, TreeParams(max_depth, min_leaf), int(y.max()) + 1)
    if not root.is_leaf and root.left.is_leaf and root.right.is_leaf:
        return ThresholdStump(root.feature, root.threshold, root.left.label, root.right.label)
    depth, n_leaves = _measure(root)
    return TreeHypothesis(root, depth=depth, n_leaves=n_leaves)


# ---------------------------------------------------------------------------
# The blackbox PAC learner
# ---------------------------------------------------------------------------


def fit_model(model, xs: np.ndarray, ys: np.ndarray):
    """Train the instance's blackbox model on a drawn sample."""
    if isinstance(model, TreeParams):
        return tree_learn((xs, ys), model.max_depth, model.min_leaf)
    return erm_learn((xs, ys), model)


def pac_learn(
    oracle: SampleOracle,
    epsilon: float,
    delta: float,
    d: float,
    model,
    profile: SampleSizeProfile = THEORY,
    *,
    seed: int = 0,
    path: tuple = ("learn",),
    ledger: SampleLedger | None = None,
    round: int = 0,
):
    """Draw sample_size(epsilon, delta, d) examples and fit the model.

    Mixture draws are charged per picked player; plain oracles charge their
    own stream id.
    """
    n = sample_size(epsilon, delta, d, profile)
    rng = stream(seed, *path)
    if isinstance(oracle, MixtureOracle):
        xs, ys, counts = oracle.draw_with_counts(n, rng)
        if ledger is not None:
            ledger.charge_counts(counts, "learn", round)
    else:
        xs, ys = oracle.draw(n, rng)
        if ledger is not None:
            ledger.charge(oracle.player, n, "learn", round)
    return fit_model(model, xs, ys)
