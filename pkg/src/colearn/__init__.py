"""Collaborative PAC learning with multiplicative weights."""

from .core import (
    FiniteDomain,
    Hypothesis,
    LabeledExample,
    MixtureOracle,
    PlayerInstance,
    PluralityVote,
    PointMassDistribution,
    PointMassOracle,
    DatasetOracle,
    RoundDiagnostics,
    SampleLedger,
    TableHypothesis,
    ThresholdStump,
    TreeHypothesis,
    WeightState,
    balance_ratio,
    empirical_error,
    exact_error,
    mixture_sampler,
    normalize_weights,
)
from .learners import (
    FiniteHypothesisClass,
    PinnedBinaryClass,
    SampleSizeProfile,
    THEORY,
    TUNED,
    TreeParams,
    erm_learn,
    pac_learn,
    sample_size,
    tree_learn,
)
from .algorithms import (
    RunConfig,
    RunResult,
    basic_mw,
    basic_round_count,
    mw_round_count,
    mweights,
    naive,
    plurality,
    test,
    test_sample_count,
    tuned_round_count,
    tuned_test_count,
    weak_test,
    weak_test_sample_count,
)
from .hard_instances import gen_big_phi, gen_phi, gen_psi
from .harness import (
    BudgetSearchSpec,
    Dataset,
    PartitionSpec,
    ResultRow,
    budget_search,
    emit_results,
    evaluate_success,
    load_csv,
    partition,
    read_instance,
    read_results,
    run_algorithm,
    write_instance,
)
from .rng import derive_seed, stream

__version__ = "0.1.0"
