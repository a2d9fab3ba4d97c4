import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from colearn.core import (
    LabeledExample,
    PluralityVote,
    PointMassDistribution,
    PointMassOracle,
    RoundDiagnostics,
    SampleLedger,
    TableHypothesis,
    WeightState,
    balance_ratio,
    empirical_error,
    exact_error,
    mixture_sampler,
    normalize_weights,
)
from colearn.rng import stream


def table(*labels):
    return TableHypothesis(np.array(labels))


# point ids: a = 0, b = 1
DIST_AB = PointMassDistribution.from_pairs([(0, 1, 0.3), (1, 0, 0.7)])


class TestExactError:
    def test_target_has_zero_error(self):
        assert exact_error(table(1, 0), DIST_AB) == 0.0

    def test_complement_has_full_error(self):
        assert exact_error(table(0, 1), DIST_AB) == 1.0

    def test_partial_mismatch_sums_masses(self):
        # g(a)=1, g(b)=1 disagrees only on b, which carries mass 0.7
        assert exact_error(table(1, 1), DIST_AB) == pytest.approx(0.7, abs=1e-15)

    def test_plurality_of_one_matches_child(self):
        g = table(1, 1)
        assert exact_error(PluralityVote([g]), DIST_AB) == exact_error(g, DIST_AB)


class TestEmpiricalError:
    def test_single_correct(self):
        assert empirical_error(table(1, 0), (np.array([0]), np.array([1]))) == 0.0

    def test_counts_with_multiplicity(self):
        xs = np.array([0, 0, 1, 1])
        ys = np.array([1, 1, 0, 0])
        assert empirical_error(table(0, 0), (xs, ys)) == 0.5

    def test_all_flipped(self):
        xs = np.array([0, 1, 1])
        ys = np.array([0, 1, 1])
        assert empirical_error(table(1, 0), (xs, ys)) == 1.0

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            empirical_error(table(0, 0), (np.array([]), np.array([])))

    def test_accepts_labeled_examples(self):
        examples = [LabeledExample(0, 1), LabeledExample(1, 0)]
        assert empirical_error(table(1, 0), examples) == 0.0


class TestNormalizeWeights:
    def test_uniform(self):
        assert np.allclose(normalize_weights([1, 1, 1, 1]), 0.25, atol=1e-15)

    def test_unequal(self):
        assert np.allclose(normalize_weights([2, 1, 1]), [0.5, 0.25, 0.25], atol=1e-15)

    def test_single_player(self):
        assert normalize_weights([8.0]) == pytest.approx([1.0])

    @pytest.mark.parametrize("bad", [[0.0, 1.0], [-1.0, 2.0], [np.inf, 1.0]])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(ValueError):
            normalize_weights(bad)

    @given(
        st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=1, max_size=32),
        st.floats(min_value=1e-6, max_value=1e6),
    )
    def test_sums_to_one_and_scale_invariant(self, ws, c):
        w = np.array(ws)
        p = normalize_weights(w)
        assert abs(p.sum() - 1.0) <= 1e-12
        assert np.allclose(p, normalize_weights(c * w), atol=1e-12)


class TestWeightState:
    def test_initial_is_all_ones(self):
        ws = WeightState.initial(4)
        assert np.array_equal(ws.weights(), np.ones(4))

    @given(st.lists(st.integers(min_value=0, max_value=2**4 - 1), min_size=1, max_size=30))
    def test_weights_are_exact_powers_of_two(self, rounds):
        ws = WeightState.initial(4)
        counts = np.zeros(4, dtype=np.int64)
        for pattern in rounds:
            excluded = np.array([(pattern >> i) & 1 for i in range(4)], dtype=bool)
            ws = ws.doubled(excluded)
            counts += excluded
        assert np.array_equal(ws.exponents, counts)
        assert np.array_equal(ws.weights(), np.exp2(counts.astype(float)))

    def test_probabilities_stable_for_huge_exponents(self):
        ws = WeightState(np.array([5000, 5001]), round=0)
        assert np.allclose(ws.probabilities(), [1 / 3, 2 / 3], atol=1e-15)
        assert np.isfinite(ws.log_total())


class TestMixture:
    def test_degenerate_mixture_draws_from_single_oracle(self):
        oracle = PointMassOracle(DIST_AB)
        mix = mixture_sampler([1.0], [oracle])
        xs, ys, counts = mix.draw_with_counts(500, stream(0, "m"))
        assert counts.tolist() == [500]
        assert set(np.unique(xs)) <= {0, 1}
        direct = oracle.draw(500, stream(0, "direct"))[0]
        assert abs(np.mean(xs == 0) - np.mean(direct == 0)) < 0.1

    def test_two_point_symmetry(self):
        d1 = PointMassDistribution.from_pairs([(0, 1, 1.0)])
        d2 = PointMassDistribution.from_pairs([(1, 0, 1.0)])
        mix = mixture_sampler([0.5, 0.5], [PointMassOracle(d1), PointMassOracle(d2)])
        xs, ys = mix.draw(2000, stream(1, "m"))
        frac = np.mean(xs == 0)
        assert 0.45 < frac < 0.55
        assert np.array_equal(ys, (xs == 0).astype(int))

    def test_pick_frequency_matches_weights(self):
        # binomial std at p=0.9, n=1e5 is ~0.00095; +-0.01 is beyond 10 sigma
        d1 = PointMassDistribution.from_pairs([(0, 0, 1.0)])
        d2 = PointMassDistribution.from_pairs([(1, 0, 1.0)])
        mix = mixture_sampler([0.9, 0.1], [PointMassOracle(d1), PointMassOracle(d2)])
        _, _, counts = mix.draw_with_counts(100_000, stream(2, "m"))
        assert abs(counts[0] / 100_000 - 0.9) < 0.01

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            mixture_sampler([1.0], [PointMassOracle(DIST_AB), PointMassOracle(DIST_AB)])

    def test_weight_state_accepted_directly(self):
        mix = mixture_sampler(WeightState.initial(2), [PointMassOracle(DIST_AB)] * 2)
        assert np.allclose(mix.p, 0.5)


class TestPointMassValidation:
    def test_rejects_negative_mass(self):
        with pytest.raises(ValueError):
            PointMassDistribution(np.array([0, 1]), np.array([0, 1]), np.array([1.5, -0.5]))

    def test_rejects_bad_total(self):
        with pytest.raises(ValueError):
            PointMassDistribution(np.array([0, 1]), np.array([0, 1]), np.array([0.5, 0.4]))

    def test_rejects_duplicate_support(self):
        with pytest.raises(ValueError):
            PointMassDistribution(np.array([0, 0]), np.array([0, 1]), np.array([0.5, 0.5]))

    def test_accepts_sum_within_tolerance(self):
        PointMassDistribution(np.array([0, 1]), np.array([0, 1]), np.array([0.3, 0.7 + 1e-13]))


class TestLedger:
    def test_balance_examples(self):
        ledger = SampleLedger(3)
        for i, n in enumerate((10, 10, 10)):
            ledger.charge(i, n)
        assert balance_ratio(ledger) == 1.0
        skew = SampleLedger(3)
        skew.charge(0, 30)
        assert balance_ratio(skew) == 3.0

    def test_single_player_is_balanced(self):
        ledger = SampleLedger(1)
        ledger.charge(0, 17, "test", 4)
        assert balance_ratio(ledger) == 1.0

    def test_empty_ledger_rejected(self):
        with pytest.raises(ValueError):
            balance_ratio(SampleLedger(2))

    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 50), st.integers(0, 5)), max_size=40))
    def test_conservation(self, charges):
        ledger = SampleLedger(4)
        for player, n, rnd in charges:
            ledger.charge(player, n, "learn" if rnd % 2 else "test", rnd)
        scheduled = sum(n for _, n, _ in charges)
        assert ledger.total() == scheduled
        assert ledger.per_player().sum() == scheduled
        by_rounds = sum(ledger.round_counts(r, p).sum() for r in ledger.rounds() for p in ("learn", "test"))
        assert by_rounds == scheduled


class TestPlurality:
    def test_vote_counting(self):
        # children over domain {a=0, b=1}
        g1, g2, g3 = table(1, 0), table(1, 1), table(0, 0)
        votes = PluralityVote([g1, g2, g3]).evaluate(np.array([0, 1]))
        assert votes.tolist() == [1, 0]

    def test_tie_breaks_to_smallest_label(self):
        g1, g2 = table(2, 0), table(1, 0)
        assert PluralityVote([g1, g2]).evaluate(np.array([0])).tolist() == [1]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            PluralityVote([])

    @given(st.lists(st.integers(0, 3), min_size=3, max_size=3))
    def test_singleton_identity(self, labels):
        g = table(*labels)
        ids = np.arange(3)
        assert np.array_equal(PluralityVote([g]).evaluate(ids), g.evaluate(ids))

    def test_as_table_matches_direct_evaluation(self):
        children = [table(1, 0, 2), table(1, 2, 2), table(0, 0, 1)]
        vote = PluralityVote(children)
        ids = np.arange(3)
        assert np.array_equal(vote.as_table(3).evaluate(ids), vote.evaluate(ids))


class TestDiagnostics:
    def test_growth_capped_at_doubling(self):
        with pytest.raises(ValueError):
            RoundDiagnostics(0, 1.0, 0.0, np.log(2.0) + 1e-6, None, None)

    def test_weight_must_be_positive(self):
        with pytest.raises(ValueError):
            RoundDiagnostics(0, 0.0, -np.inf, 0.0, None, None)


class TestDeterminism:
    def test_same_seed_same_draw_sequence(self):
        oracle = PointMassOracle(DIST_AB)
        a = oracle.draw(100, stream(42, "x", 1))
        b = oracle.draw(100, stream(42, "x", 1))
        c = oracle.draw(100, stream(42, "x", 2))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        assert not np.array_equal(a[0], c[0])
