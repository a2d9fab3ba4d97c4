"""Command-line harness.

Subcommands: `run` (one algorithm, one instance, one epsilon), `budget-search`
(the full protocol over an epsilon grid), `gen-instance` (hard-instance
emission), `partition` (dataset to instance file). Options can also come from
a flat `key = value` config file; explicit flags win.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .algorithms import RunResult
from .harness import (
    BudgetSearchSpec,
    PartitionSpec,
    ResultRow,
    balance_ratio,
    budget_search,
    emit_diagnostics,
    emit_results,
    evaluate_success,
    load_csv,
    partition,
    read_instance,
    run_algorithm,
    write_instance,
)
from .hard_instances import gen_big_phi, gen_phi, gen_psi
from .learners import SampleSizeProfile


def _parse_config_file(path: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SystemExit(f"{path}:{lineno}: expected 'key = value'")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    file_values = _parse_config_file(args.config)
    defaults = {a.dest: a.default for a in parser._actions}
    for key, raw in file_values.items():
        if key not in vars(args):
            raise SystemExit(f"unknown config key {key!r}")
        if getattr(args, key) == defaults.get(key):  # flag not given explicitly
            default = defaults.get(key)
            if isinstance(default, bool):
                value = raw.lower() in ("1", "true", "yes")
            elif isinstance(default, int) and not isinstance(default, bool):
                value = int(raw)
            elif isinstance(default, float):
                value = float(raw)
            else:
                value = raw
            setattr(args, key, value)
    return args


def _profile(args) -> SampleSizeProfile:
    return SampleSizeProfile(args.profile, theory_constant=args.theory_constant)


def _load_instance(args) -> object:
    if args.instance:
        return read_instance(args.instance)
    if args.dataset:
        if not args.label_col:
            raise SystemExit("--label-col is required with --dataset")
        dataset = load_csv(args.dataset, args.label_col)
        spec = PartitionSpec(
            strategy=args.partition,
            k=args.k,
            class_a=args.label_a,
            class_b=args.label_b,
            feature=args.feature_index,
            threshold=args.threshold,
        )
        return partition(dataset, spec, seed=args.seed)
    raise SystemExit("provide --instance or --dataset")


def _print_rows(rows: list[ResultRow]) -> None:
    import csv

    from .harness import RESULT_COLUMNS, _format_cell

    writer = csv.writer(sys.stdout)
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row.astuple()])


def _cmd_run(args) -> int:
    instance = _load_instance(args)
    result: RunResult = run_algorithm(
        instance,
        args.algo,
        args.epsilon,
        args.d,
        delta=args.delta if not args.delta_as_confidence else 1.0 - args.delta,
        profile=_profile(args),
        test_mode=args.test_mode,
        seed=args.seed,
    )
    success = evaluate_success(instance, result.hypothesis, args.epsilon, seed=args.seed)
    total = result.ledger.total()
    row = ResultRow(
        instance_id=instance.instance_id,
        algorithm=args.algo,
        epsilon=args.epsilon,
        budget_found=float(total),
        total_samples=float(total),
        learning_samples=float(result.ledger.total("learn")),
        test_samples=float(result.ledger.total("test")),
        success_rate=1.0 if success else 0.0,
        balance_ratio=balance_ratio(result.ledger),
        seed_base=args.seed,
    )
    _print_rows([row])
    if args.out:
        emit_results([row], args.out)
    if args.diagnostics_out:
        emit_diagnostics(result, args.diagnostics_out)
    return 0


def _cmd_budget_search(args) -> int:
    instance = _load_instance(args)
    epsilons = tuple(float(tok) for tok in str(args.epsilon).split(","))
    spec = BudgetSearchSpec(
        epsilons=epsilons,
        runs=args.runs,
        target_rate=args.target_rate,
        ladder_start=args.ladder_start,
        ladder_factor=args.ladder_factor,
        ladder_max=args.ladder_max,
        delta=args.delta,
        delta_is_confidence=args.delta_as_confidence,
        profile=_profile(args),
        test_mode=args.test_mode,
        seed=args.seed,
    )
    rows = budget_search(instance, args.algo, spec)
    _print_rows(rows)
    if args.out:
        emit_results(rows, args.out)
    return 0


def _cmd_gen_instance(args) -> int:
    if args.generator == "phi":
        instance = gen_phi(args.d, args.epsilon, args.seed)
    elif args.generator == "bigphi":
        instance = gen_big_phi(args.k, args.d, args.epsilon, args.seed)
    elif args.generator == "psi":
        instance = gen_psi(args.k, args.d, args.epsilon, args.seed)
    else:
        raise SystemExit(f"unknown generator {args.generator!r}")
    write_instance(instance, args.out)
    print(f"wrote {instance.instance_id} to {args.out}")
    return 0


def _cmd_partition(args) -> int:
    dataset = load_csv(args.dataset, args.label_col)
    spec = PartitionSpec(
        strategy=args.partition,
        k=args.k,
        class_a=args.label_a,
        class_b=args.label_b,
        feature=args.feature_index,
        threshold=args.threshold,
    )
    instance = partition(dataset, spec, seed=args.seed)
    # Materialize each part's empirical measure so the file stands alone.
    import numpy as np

    from .core import FiniteDomain, PlayerInstance, PointMassDistribution, PointMassOracle
    from .learners import PinnedBinaryClass

    used = sorted({int(r) for part in instance.parts for r in part})
    row_id = {r: i for i, r in enumerate(used)}
    domain = FiniteDomain(tuple(f"r{r}" for r in used), n_labels=len(dataset.label_names))
    dists = []
    for part in instance.parts:
        rows, counts = np.unique(part, return_counts=True)
        dists.append(
            PointMassDistribution(
                np.asarray([row_id[int(r)] for r in rows]),
                dataset.labels[rows],
                counts / counts.sum(),
            )
        )
    flat = PlayerInstance(
        oracles=tuple(PointMassOracle(d, player=i) for i, d in enumerate(dists)),
        model=PinnedBinaryClass(domain.size),
        dists=tuple(dists),
        domain=domain,
        instance_id=instance.instance_id,
        generator=instance.generator,
        gen_seed=args.seed,
    )
    write_instance(flat, args.out)
    print(f"wrote {instance.instance_id} ({instance.k} players) to {args.out}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value option file; flags override")
    p.add_argument("--algo", default="mweights", choices=["naive", "basicmw", "mweights"])
    p.add_argument("--delta", type=float, default=0.9)
    p.add_argument(
        "--delta-as-confidence",
        action="store_true",
        help="read --delta as a confidence level (failure probability 1 - delta)",
    )
    p.add_argument("--profile", default="tuned", choices=["theory", "tuned"])
    p.add_argument("--theory-constant", type=float, default=1.0)
    p.add_argument("--test-mode", default="sampled", choices=["sampled", "exact"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="result CSV path")
    p.add_argument("--instance", help="instance file produced by gen-instance/partition")
    p.add_argument("--dataset", help="CSV dataset path")
    p.add_argument("--label-col", help="label column name")
    p.add_argument(
        "--partition",
        default="random",
        choices=["random", "class-dup", "feature-threshold", "feature-grid"],
    )
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--label-a")
    p.add_argument("--label-b")
    p.add_argument("--feature-index", type=int, default=0)
    p.add_argument("--threshold", type=float)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="colearn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single seeded run, prints one result row")
    _add_common(p_run)
    p_run.add_argument("--epsilon", type=float, required=True)
    p_run.add_argument("--diagnostics-out", help="per-round diagnostics CSV path")
    p_run.set_defaults(func=_cmd_run)

    p_search = sub.add_parser("budget-search", help="full budget-search protocol")
    _add_common(p_search)
    p_search.add_argument("--epsilon", required=True, help="comma-separated epsilon grid")
    p_search.add_argument("--runs", type=int, default=100)
    p_search.add_argument("--target-rate", type=float, default=0.9)
    p_search.add_argument("--ladder-start", type=float, default=1.0)
    p_search.add_argument("--ladder-factor", type=float, default=1.25)
    p_search.add_argument("--ladder-max", type=float, default=1e6)
    p_search.set_defaults(func=_cmd_budget_search)

    p_gen = sub.add_parser("gen-instance", help="emit a hard instance file")
    p_gen.add_argument("--generator", required=True, choices=["phi", "bigphi", "psi"])
    p_gen.add_argument("--k", type=int, default=1)
    p_gen.add_argument("--d", type=int, required=True)
    p_gen.add_argument("--epsilon", type=float, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen_instance)

    p_part = sub.add_parser("partition", help="partition a dataset into an instance file")
    _add_common(p_part)
    p_part.set_defaults(func=_cmd_partition)

    args = parser.parse_args(argv)
    sub_parser = {
        "run": p_run,
        "budget-search": p_search,
        "gen-instance": p_gen,
        "partition": p_part,
    }[args.command]
    args = _apply_config(args, sub_parser)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
