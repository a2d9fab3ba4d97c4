"""Collaborative learners on top of the blackbox PAC learner.

Both multiplicative-weights variants run the same round loop: normalize the
per-player weights into a mixing distribution, learn a round hypothesis from
the weighted mixture, test every player's accuracy on it, and double the
weight of each failing player so later rounds sample it more. The returned
hypothesis is the plurality vote of all round hypotheses. The two variants
differ only in their round count, learner confidence, and per-player test:

* the basic variant runs ceil(10 ln k) rounds, gives the learner confidence
  delta/(4(t+1)^2), and sizes tests so every call succeeds simultaneously;
* the robust variant runs ceil(2000 ln(k/delta)) rounds but fixes the learner
  confidence at 1/100 and uses a cheap constant-confidence weak test, so
  individual rounds are allowed to fail.

Under the tuned sample-size profile both variants switch to the empirically
tuned settings: ceil(10 log10 k) rounds and a 30/epsilon-draw test accepting
at epsilon/2.

The `exact` test mode replaces sampled tests with exact distribution errors
(threshold unchanged, zero draws). It makes the per-round weight guarantees
deterministic and assertable: whenever the round's learner met its
epsilon/120 target, the mixing mass of players with error above epsilon/12
is at most 0.1 by Markov's inequality, so the total weight grows by at most
a factor of 1.1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Hypothesis,
    MixtureOracle,
    PlayerInstance,
    PluralityVote,
    RoundDiagnostics,
    SampleLedger,
    WeightState,
    empirical_error,
)
from .learners import SampleSizeProfile, THEORY, fit_model, pac_learn
from .rng import stream

__all__ = [
    "RunConfig",
    "RunResult",
    "plurality",
    "basic_round_count",
    "mw_round_count",
    "tuned_round_count",
    "test_sample_count",
    "weak_test_sample_count",
    "tuned_test_count",
    "test",
    "weak_test",
    "basic_mw",
    "mweights",
    "naive",
]

LEARNER_EPS_DIVISOR = 120.0
MW_LEARNER_DELTA = 1.0 / 100.0
TEST_THRESHOLD_DIVISOR = 6.0
TUNED_TEST_THRESHOLD_DIVISOR = 2.0


@dataclass(frozen=True)
class RunConfig:
    """Knobs for one collaborative run; `d` is the capacity/budget parameter."""

    epsilon: float
    delta: float
    d: float
    profile: SampleSizeProfile = THEORY
    test_mode: str = "sampled"
    rounds_override: int | None = None
    algorithm: str = "mweights"

    def __post_init__(self):
        if not 0 < self.epsilon <= 1 or not 0 < self.delta < 1:
            raise ValueError("epsilon must be in (0, 1] and delta in (0, 1)")
        if self.test_mode not in ("sampled", "exact"):
            raise ValueError(f"unknown test mode {self.test_mode!r}")
        if self.rounds_override is not None and self.rounds_override < 1:
            raise ValueError("rounds override must be positive")


@dataclass
class RunResult:
    hypothesis: Hypothesis
    ledger: SampleLedger
    diagnostics: list[RoundDiagnostics]
    final_errors: np.ndarray | None = None


def plurality(hypotheses) -> PluralityVote:
    """Pointwise most-frequent vote; ties to the smallest label value."""
    return PluralityVote(hypotheses)


# ---------------------------------------------------------------------------
# Round and draw counts
# ---------------------------------------------------------------------------


def basic_round_count(k: int) -> int:
    """ceil(10 ln k) rounds; a single player degenerates to one round."""
    if k < 1:
        raise ValueError("need at least one player")
    if k == 1:
        return 1
    return math.ceil(10.0 * math.log(k))


def mw_round_count(k: int, delta: float) -> int:
    """ceil(2000 ln(k/delta)) rounds for the robust variant."""
    if k < 1 or not 0 < delta < 1:
        raise ValueError("bad round-count arguments")
    return math.ceil(2000.0 * math.log(k / delta))


def tuned_round_count(k: int) -> int:
    """ceil(10 log10 k) rounds under the tuned profile."""
    if k < 1:
        raise ValueError("need at least one player")
    return max(1, math.ceil(10.0 * math.log10(k)))


def test_sample_count(epsilon: float, k: int, t: int, delta: float) -> int:
    """Per-player draws for the round-t accuracy test."""
    if not 0 < epsilon <= 1 or not 0 < delta < 1 or k < 1 or t < 0:
        raise ValueError("bad test-size arguments")
    return math.ceil(432.0 / epsilon * math.log(4.0 * k * (t + 1) ** 2 / delta))


def weak_test_sample_count(epsilon: float) -> int:
    """Per-player draws for the constant-confidence weak test."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon outside (0, 1]")
    return math.ceil(432.0 / epsilon * math.log(100.0))


def tuned_test_count(epsilon: float) -> int:
    """Per-player draws for the tuned test (threshold epsilon/2)."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon outside (0, 1]")
    return math.ceil(30.0 / epsilon)


# ---------------------------------------------------------------------------
# Accuracy tests
# ---------------------------------------------------------------------------


def _run_test(
    g: Hypothesis,
    instance: PlayerInstance,
    n_per_player: int,
    threshold: float,
    mode: str,
    *,
    seed: int,
    t: int,
    ledger: SampleLedger | None,
) -> np.ndarray:
    """Boolean pass mask over players, assembled in player-index order."""
    if mode == "exact":
        if not instance.has_exact_errors:
            raise ValueError("exact test mode needs point-mass distributions")
        return instance.player_errors(g) <= threshold
    passed = np.zeros(instance.k, dtype=bool)
    for i, oracle in enumerate(instance.oracles):
        xs, ys = oracle.draw(n_per_player, stream(seed, "test", t, i))
        if ledger is not None:
            ledger.charge(i, n_per_player, "test", t)
        passed[i] = empirical_error(g, (xs, ys)) <= threshold
    return passed


def test(
    g: Hypothesis,
    instance: PlayerInstance,
    t: int,
    epsilon: float,
    delta: float,
    mode: str = "sampled",
    *,
    seed: int = 0,
    ledger: SampleLedger | None = None,
) -> np.ndarray:
    """Players whose error on g looks at most epsilon/6 at round t confidence."""
    n = test_sample_count(epsilon, instance.k, t, delta)
    mask = _run_test(
        g, instance, n, epsilon / TEST_THRESHOLD_DIVISOR, mode, seed=seed, t=t, ledger=ledger
    )
    return np.flatnonzero(mask)


def weak_test(
    g: Hypothesis,
    instance: PlayerInstance,
    epsilon: float,
    mode: str = "sampled",
    *,
    seed: int = 0,
    ledger: SampleLedger | None = None,
) -> np.ndarray:
    """Constant-confidence variant of `test` (per-player failure at most 1/100)."""
    n = weak_test_sample_count(epsilon)
    mask = _run_test(
        g, instance, n, epsilon / TEST_THRESHOLD_DIVISOR, mode, seed=seed, t=0, ledger=ledger
    )
    return np.flatnonzero(mask)


# ---------------------------------------------------------------------------
# The round loop
# ---------------------------------------------------------------------------


def _test_plan(variant: str, profile: SampleSizeProfile, epsilon: float, delta: float, k: int, t: int):
    if profile.mode == "tuned":
        return tuned_test_count(epsilon), epsilon / TUNED_TEST_THRESHOLD_DIVISOR
    if variant == "basic":
        return test_sample_count(epsilon, k, t, delta), epsilon / TEST_THRESHOLD_DIVISOR
    return weak_test_sample_count(epsilon), epsilon / TEST_THRESHOLD_DIVISOR


def _round_total(variant: str, config: RunConfig, k: int) -> int:
    if config.rounds_override is not None:
        return config.rounds_override
    if k == 1:
        return 1
    if config.profile.mode == "tuned":
        return tuned_round_count(k)
    if variant == "basic":
        return basic_round_count(k)
    return mw_round_count(k, config.delta)


def _collaborate(instance: PlayerInstance, config: RunConfig, seed: int, variant: str) -> RunResult:
    k = instance.k
    rounds = _round_total(variant, config, k)
    weights = WeightState.initial(k)
    ledger = SampleLedger(k)
    children: list[Hypothesis] = []
    diagnostics: list[RoundDiagnostics] = []
    learner_target = config.epsilon / LEARNER_EPS_DIVISOR

    for t in range(rounds):
        p = weights.probabilities()
        mixture = MixtureOracle(p, instance.oracles)
        if variant == "basic":
            learner_delta = config.delta / (4.0 * (t + 1) ** 2)
        else:
            learner_delta = MW_LEARNER_DELTA
        g = pac_learn(
            mixture,
            learner_target,
            learner_delta,
            config.d,
            instance.model,
            config.profile,
            seed=seed,
            path=("learn", t),
            ledger=ledger,
            round=t,
        )
        children.append(g)

        if k == 1:
            passed = np.ones(1, dtype=bool)
        else:
            n_test, threshold = _test_plan(variant, config.profile, config.epsilon, config.delta, k, t)
            passed = _run_test(
                g, instance, n_test, threshold, config.test_mode, seed=seed, t=t, ledger=ledger
            )

        errors = mass_high = chi = psi = None
        if instance.has_exact_errors:
            errors = instance.player_errors(g)
            mixture_error = float(p @ errors)
            chi = int(mixture_error > learner_target)
            mass_high = float(p[errors > config.epsilon / 12.0].sum())
            must_pass = errors <= config.epsilon / 12.0
            must_fail = errors > config.epsilon / 4.0
            psi = ((must_pass & ~passed) | (must_fail & passed)).astype(np.int64)

        log_w = weights.log_total()
        total_w = weights.total()
        weights = weights.doubled(~passed)
        diagnostics.append(
            RoundDiagnostics(
                t=t,
                total_weight=total_w,
                log_total_weight=log_w,
                growth=weights.log_total() - log_w,
                learner_failed=chi,
                test_failures=psi,
                probabilities=p,
                player_errors=errors,
                high_error_mass=mass_high,
                passed=passed,
            )
        )

    combined = plurality(children)
    final = instance.player_errors(combined) if instance.has_exact_errors else None
    return RunResult(combined, ledger, diagnostics, final)


def basic_mw(instance: PlayerInstance, config: RunConfig, seed: int = 0) -> RunResult:
    """Basic multiplicative-weights learner (round-indexed confidences)."""
    return _collaborate(instance, config, seed, "basic")


def mweights(instance: PlayerInstance, config: RunConfig, seed: int = 0) -> RunResult:
    """Robust multiplicative-weights learner (constant learner/test confidence)."""
    return _collaborate(instance, config, seed, "mweights")


def naive(instance: PlayerInstance, budget: int, *, seed: int = 0) -> RunResult:
    """Treat all players equally: draw `budget` examples from the uniform
    mixture and train the blackbox model once."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    k = instance.k
    ledger = SampleLedger(k)
    mixture = MixtureOracle(np.full(k, 1.0 / k), instance.oracles)
    xs, ys, counts = mixture.draw_with_counts(budget, stream(seed, "learn", 0))
    ledger.charge_counts(counts, "learn", 0)
    g = fit_model(instance.model, xs, ys)
    final = instance.player_errors(g) if instance.has_exact_errors else None
    return RunResult(g, ledger, [], final)
