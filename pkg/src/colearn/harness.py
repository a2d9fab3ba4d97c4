"""Dataset ingestion, partition strategies, the budget-search protocol, and
CSV emission.

Budget search treats the learner capacity parameter d as the budget knob: for
each error threshold it walks a geometric ladder of d values, runs a fixed
number of seeded trials per rung, and reports the first rung whose empirical
success rate reaches the target, together with the realized draw counts from
the trial ledgers. Success for one run means the returned hypothesis is within
epsilon on every player: exactly for point-mass instances, via a fresh
holdout resample (not charged to the ledger) for dataset-backed ones.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    DatasetOracle,
    FiniteDomain,
    Hypothesis,
    PlayerInstance,
    PointMassDistribution,
    PointMassOracle,
    TableHypothesis,
    balance_ratio,
    empirical_error,
)
from .algorithms import RunConfig, RunResult, basic_mw, mweights, naive
from .learners import PinnedBinaryClass, SampleSizeProfile, TUNED, TreeParams, sample_size
from .rng import derive_seed, stream

__all__ = [
    "Dataset",
    "PartitionSpec",
    "BudgetSearchSpec",
    "ResultRow",
    "RESULT_COLUMNS",
    "NOT_FOUND",
    "HOLDOUT_DRAWS",
    "load_csv",
    "partition",
    "evaluate_success",
    "run_algorithm",
    "budget_search",
    "emit_results",
    "read_results",
    "write_instance",
    "read_instance",
    "emit_diagnostics",
]

HOLDOUT_DRAWS = 10_000
NOT_FOUND = "NA"

RESULT_COLUMNS = (
    "instance_id",
    "algorithm",
    "epsilon",
    "budget_found",
    "total_samples",
    "learning_samples",
    "test_samples",
    "success_rate",
    "balance_ratio",
    "seed_base",
)


# ---------------------------------------------------------------------------
# Datasets and partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """Rectangular table: real feature columns plus one discrete label column."""

    features: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...]
    columns: tuple[str, ...]
    label_column: str

    def __len__(self) -> int:
        return len(self.labels)


def load_csv(path, label_column: str) -> Dataset:
    """Parse a headed CSV; every non-label cell must be a finite real."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if label_column not in header:
            raise ValueError(f"{path}: no column named {label_column!r}")
        label_idx = header.index(label_column)
        feature_cols = [(i, name) for i, name in enumerate(header) if i != label_idx]
        rows, tokens = [], []
        for r, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{r}: expected {len(header)} cells, got {len(row)}")
            values = []
            for i, name in feature_cols:
                try:
                    values.append(float(row[i]))
                except ValueError:
                    raise ValueError(
                        f"{path}:{r}: non-numeric value {row[i]!r} in feature column {name!r}"
                    ) from None
            rows.append(values)
            tokens.append(row[label_idx])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    label_names = tuple(sorted(set(tokens)))
    code = {name: i for i, name in enumerate(label_names)}
    return Dataset(
        features=np.asarray(rows, dtype=float),
        labels=np.asarray([code[t] for t in tokens], dtype=np.int64),
        label_names=label_names,
        columns=tuple(name for _, name in feature_cols),
        label_column=label_column,
    )


@dataclass(frozen=True)
class PartitionSpec:
    """How to split a dataset into k player distributions."""

    strategy: str  # random | class-dup | feature-threshold | feature-grid
    k: int
    class_a: str | None = None
    class_b: str | None = None
    feature: int = 0
    threshold: float | None = None
    tree: TreeParams = field(default_factory=TreeParams)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.strategy not in ("random", "class-dup", "feature-threshold", "feature-grid"):
            raise ValueError(f"unknown partition strategy {self.strategy!r}")


def _grid_shape(k: int) -> tuple[int, int]:
    rows = max(r for r in range(1, int(math.isqrt(k)) + 1) if k % r == 0)
    return rows, k // rows


def _parts_for(dataset: Dataset, spec: PartitionSpec, seed: int) -> list[np.ndarray]:
    n = len(dataset)
    if spec.strategy == "random":
        assignment = stream(seed, "partition").integers(0, spec.k, size=n)
        return [np.flatnonzero(assignment == i) for i in range(spec.k)]
    if spec.strategy == "class-dup":
        if spec.class_a is None or spec.class_b is None:
            names = dataset.label_names
            if len(names) != 2:
                raise ValueError("class-dup needs class_a/class_b unless the dataset is binary")
            class_a, class_b = names
        else:
            class_a, class_b = spec.class_a, spec.class_b
        code = {name: i for i, name in enumerate(dataset.label_names)}
        for name in (class_a, class_b):
            if name not in code:
                raise ValueError(f"no class named {name!r}")
        part_a = np.flatnonzero(dataset.labels == code[class_a])
        part_b = np.flatnonzero(dataset.labels == code[class_b])
        return [part_a] + [part_b] * (spec.k - 1)
    if spec.strategy == "feature-threshold":
        col = dataset.features[:, spec.feature]
        threshold = float(np.median(col)) if spec.threshold is None else spec.threshold
        below = np.flatnonzero(col <= threshold)
        above = np.flatnonzero(col > threshold)
        return [below] + [above] * (spec.k - 1)
    rows, cols = _grid_shape(spec.k)
    f0 = dataset.features[:, spec.feature]
    f1 = dataset.features[:, spec.feature + 1]
    bins0 = np.searchsorted(np.quantile(f0, np.linspace(0, 1, rows + 1)[1:-1]), f0, side="right")
    bins1 = np.searchsorted(np.quantile(f1, np.linspace(0, 1, cols + 1)[1:-1]), f1, side="right")
    cell = bins0 * cols + bins1
    return [np.flatnonzero(cell == i) for i in range(spec.k)]


def partition(dataset: Dataset, spec: PartitionSpec, seed: int = 0) -> PlayerInstance:
    """Split the dataset by the chosen strategy; each part becomes a resampling oracle."""
    parts = _parts_for(dataset, spec, seed)
    for i, part in enumerate(parts):
        if len(part) == 0:
            raise ValueError(f"partition strategy {spec.strategy!r} produced an empty part {i}")
    oracles = tuple(
        DatasetOracle(dataset.features[part], dataset.labels[part], player=i)
        for i, part in enumerate(parts)
    )
    instance = PlayerInstance(
        oracles=oracles,
        model=spec.tree,
        instance_id=f"{dataset.label_column}-{spec.strategy}-k{spec.k}",
        generator=f"partition-{spec.strategy}",
        gen_seed=seed,
    )
    instance.parts = [np.asarray(p) for p in parts]
    return instance


# ---------------------------------------------------------------------------
# Success criterion
# ---------------------------------------------------------------------------


def evaluate_success(instance: PlayerInstance, g: Hypothesis, epsilon: float, *, seed: int = 0) -> bool:
    """True iff the per-player error of g is at most epsilon for every player."""
    if instance.has_exact_errors:
        return bool(np.max(instance.player_errors(g)) <= epsilon)
    for i, oracle in enumerate(instance.oracles):
        xs, ys = oracle.draw(HOLDOUT_DRAWS, stream(seed, "holdout", i))
        if empirical_error(g, (xs, ys)) > epsilon:
            return False
    return True


# ---------------------------------------------------------------------------
# Budget search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BudgetSearchSpec:
    """Protocol settings for the budget search.

    `delta` defaults to the tuned experiments' literal 0.9 setting;
    `delta_is_confidence` switches to reading it as a confidence level
    (effective failure probability 1 - delta).
    """

    epsilons: tuple[float, ...]
    runs: int = 100
    target_rate: float = 0.9
    ladder_start: float = 1.0
    ladder_factor: float = 1.25
    ladder_max: float = 1e6
    delta: float = 0.9
    delta_is_confidence: bool = False
    profile: SampleSizeProfile = TUNED
    test_mode: str = "sampled"
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1 or not 0 < self.target_rate <= 1:
            raise ValueError("bad runs/target rate")
        if self.ladder_start <= 0 or self.ladder_factor <= 1 or self.ladder_max < self.ladder_start:
            raise ValueError("bad budget ladder")

    @property
    def effective_delta(self) -> float:
        return 1.0 - self.delta if self.delta_is_confidence else self.delta


@dataclass(frozen=True)
class ResultRow:
    instance_id: str
    algorithm: str
    epsilon: float
    budget_found: float | None
    total_samples: float | None
    learning_samples: float | None
    test_samples: float | None
    success_rate: float
    balance_ratio: float | None
    seed_base: int

    def astuple(self) -> tuple:
        return tuple(getattr(self, name) for name in RESULT_COLUMNS)


def run_algorithm(
    instance: PlayerInstance,
    algorithm: str,
    epsilon: float,
    d: float,
    *,
    delta: float,
    profile: SampleSizeProfile,
    test_mode: str = "sampled",
    seed: int = 0,
) -> RunResult:
    """One seeded run of the named algorithm at capacity knob d."""
    if algorithm == "naive":
        return naive(instance, sample_size(epsilon, delta, d, profile), seed=seed)
    config = RunConfig(
        epsilon=epsilon, delta=delta, d=d, profile=profile, test_mode=test_mode, algorithm=algorithm
    )
    if algorithm == "basicmw":
        return basic_mw(instance, config, seed)
    if algorithm == "mweights":
        return mweights(instance, config, seed)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _rung_row(instance, algorithm, epsilon, spec, results, successes) -> ResultRow:
    totals = np.array([r.ledger.total() for r in results], dtype=float)
    learn = np.array([r.ledger.total("learn") for r in results], dtype=float)
    tests = np.array([r.ledger.total("test") for r in results], dtype=float)
    ratios = np.array([balance_ratio(r.ledger) for r in results])
    return ResultRow(
        instance_id=instance.instance_id,
        algorithm=algorithm,
        epsilon=epsilon,
        budget_found=float(totals.mean()),
        total_samples=float(totals.mean()),
        learning_samples=float(learn.mean()),
        test_samples=float(tests.mean()),
        success_rate=successes / spec.runs,
        balance_ratio=float(ratios.mean()),
        seed_base=spec.seed,
    )


def budget_search(instance: PlayerInstance, algorithm: str, spec: BudgetSearchSpec) -> list[ResultRow]:
    """Smallest realized budget meeting the target success rate, per epsilon.

    An exhausted ladder yields an explicit not-found row (success rate of the
    last rung, no budget numbers) rather than a fabricated count.
    """
    rows = []
    delta = spec.effective_delta
    for e_idx, epsilon in enumerate(spec.epsilons):
        d = spec.ladder_start
        rung = 0
        best_rate = 0.0
        found = False
        while d <= spec.ladder_max:
            results = []
            successes = 0
            for r in range(spec.runs):
                run_seed = derive_seed(spec.seed, "search", e_idx, rung, r)
                result = run_algorithm(
                    instance,
                    algorithm,
                    epsilon,
                    d,
                    delta=delta,
                    profile=spec.profile,
                    test_mode=spec.test_mode,
                    seed=run_seed,
                )
                results.append(result)
                successes += evaluate_success(
                    instance, result.hypothesis, epsilon, seed=derive_seed(run_seed, "success")
                )
            best_rate = max(best_rate, successes / spec.runs)
            if successes / spec.runs >= spec.target_rate:
                rows.append(_rung_row(instance, algorithm, epsilon, spec, results, successes))
                found = True
                break
            d *= spec.ladder_factor
            rung += 1
        if not found:
            rows.append(
                ResultRow(
                    instance_id=instance.instance_id,
                    algorithm=algorithm,
                    epsilon=epsilon,
                    budget_found=None,
                    total_samples=None,
                    learning_samples=None,
                    test_samples=None,
                    success_rate=best_rate,
                    balance_ratio=None,
                    seed_base=spec.seed,
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Result emission
# ---------------------------------------------------------------------------


def _format_cell(value) -> str:
    if value is None:
        return NOT_FOUND
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(rows: list[ResultRow], path) -> Path:
    """Write the fixed-schema result CSV (shortest round-trip float format)."""
    if not rows:
        raise ValueError("no result rows to emit")
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row.astuple()])
    return path


def read_results(path) -> list[ResultRow]:
    """Parse a result CSV back into rows (inverse of emit_results)."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != RESULT_COLUMNS:
            raise ValueError(f"unexpected result columns {header!r}")
        rows = []
        for rec in reader:
            cells = dict(zip(RESULT_COLUMNS, rec))

            def num(name, cells=cells):
                return None if cells[name] == NOT_FOUND else float(cells[name])

            rows.append(
                ResultRow(
                    instance_id=cells["instance_id"],
                    algorithm=cells["algorithm"],
                    epsilon=float(cells["epsilon"]),
                    budget_found=num("budget_found"),
                    total_samples=num("total_samples"),
                    learning_samples=num("learning_samples"),
                    test_samples=num("test_samples"),
                    success_rate=float(cells["success_rate"]),
                    balance_ratio=num("balance_ratio"),
                    seed_base=int(cells["seed_base"]),
                )
            )
    return rows


def emit_diagnostics(result: RunResult, path) -> Path:
    """Per-round diagnostics CSV: t, W, Q, chi, psi-count."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "W", "Q", "chi", "psi_count"])
        for diag in result.diagnostics:
            writer.writerow(
                [
                    diag.t,
                    repr(diag.total_weight),
                    repr(diag.growth),
                    "" if diag.learner_failed is None else diag.learner_failed,
                    "" if diag.test_failure_count is None else diag.test_failure_count,
                ]
            )
    return path


# ---------------------------------------------------------------------------
# Versioned instance files
# ---------------------------------------------------------------------------

INSTANCE_HEADER = "colearn-instance v1"
BOT_NAME = "bot"


def write_instance(instance: PlayerInstance, path) -> Path:
    """Emit a point-mass instance in the versioned plain-text format."""
    if not instance.has_exact_errors or instance.domain is None:
        raise ValueError("only point-mass instances with a domain can be written")
    path = Path(path)
    names = instance.domain.point_names
    lines = [
        INSTANCE_HEADER,
        f"k = {instance.k}",
        f"d = {instance.d if instance.d is not None else ''}",
        f"epsilon = {instance.gen_epsilon if instance.gen_epsilon is not None else ''}",
        f"generator = {instance.generator or 'custom'}",
        f"seed = {instance.gen_seed if instance.gen_seed is not None else 0}",
        "player point label mass",
    ]
    for i, dist in enumerate(instance.dists):
        for point, label, mass in zip(dist.points, dist.labels, dist.masses):
            lines.append(f"{i} {names[point]} {int(label)} {mass:.17g}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_instance(path) -> PlayerInstance:
    """Rebuild a point-mass instance written by write_instance."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != INSTANCE_HEADER:
        raise ValueError(f"{path}: not a {INSTANCE_HEADER} file")
    meta = {}
    body_at = None
    for i, line in enumerate(lines[1:], start=1):
        if line == "player point label mass":
            body_at = i + 1
            break
        key, _, value = line.partition("=")
        meta[key.strip()] = value.strip()
    if body_at is None:
        raise ValueError(f"{path}: missing support table")
    k = int(meta["k"])
    support: dict[int, list[tuple[str, int, float]]] = {i: [] for i in range(k)}
    names_in_order: list[str] = []
    labels_by_name: dict[str, int] = {}
    for line in lines[body_at:]:
        if not line.strip():
            continue
        player_s, name, label_s, mass_s = line.split()
        if name not in labels_by_name:
            names_in_order.append(name)
            labels_by_name[name] = int(label_s)
        support[int(player_s)].append((name, int(label_s), float(mass_s)))
    bot_last = sorted(names_in_order, key=lambda n: (n == BOT_NAME, names_in_order.index(n)))
    name_to_id = {name: i for i, name in enumerate(bot_last)}
    pinned = ((name_to_id[BOT_NAME], 0),) if BOT_NAME in name_to_id else ()
    domain = FiniteDomain(tuple(bot_last), n_labels=2, pinned=pinned)
    cls = PinnedBinaryClass(domain.size, pinned=pinned)
    target_table = np.zeros(domain.size, dtype=np.int64)
    for name, label in labels_by_name.items():
        target_table[name_to_id[name]] = label
    target = TableHypothesis(target_table, class_id=cls.class_id)
    dists = []
    for i in range(k):
        pts, labs, ms = zip(*[(name_to_id[n], l, m) for n, l, m in support[i]])
        dists.append(PointMassDistribution(np.asarray(pts), np.asarray(labs), np.asarray(ms)))
    d_value = float(meta["d"]) if meta.get("d") else None
    eps_value = float(meta["epsilon"]) if meta.get("epsilon") else None
    return PlayerInstance(
        oracles=tuple(PointMassOracle(dist, player=i) for i, dist in enumerate(dists)),
        model=cls,
        dists=tuple(dists),
        target=target,
        domain=domain,
        instance_id=f"{meta.get('generator', 'custom')}(k={k},d={meta.get('d')},eps={meta.get('epsilon')},seed={meta.get('seed')})",
        d=d_value,
        gen_epsilon=eps_value,
        generator=meta.get("generator"),
        gen_seed=int(meta["seed"]) if meta.get("seed") else None,
    )
