import numpy as np
import pytest

from colearn.core import exact_error
from colearn.hard_instances import gen_big_phi, gen_phi, gen_psi


def masses_by_name(instance, player):
    names = instance.domain.point_names
    dist = instance.dists[player]
    return {names[p]: m for p, m in zip(dist.points, dist.masses)}


class TestGenPhi:
    def test_mass_layout_d2(self):
        inst = gen_phi(2, 0.01, seed=0)
        by_name = masses_by_name(inst, 0)
        assert by_name["bot"] == pytest.approx(0.92, abs=1e-15)
        assert by_name["0"] == pytest.approx(0.04, abs=1e-15)
        assert by_name["1"] == pytest.approx(0.04, abs=1e-15)

    def test_mass_layout_d1(self):
        by_name = masses_by_name(gen_phi(1, 0.1, seed=1), 0)
        assert by_name["bot"] == pytest.approx(0.2, abs=1e-15)
        assert by_name["0"] == pytest.approx(0.8, abs=1e-15)

    def test_target_maps_sink_to_zero(self):
        for seed in range(10):
            inst = gen_phi(3, 0.05, seed=seed)
            assert inst.target(inst.domain.size - 1) == 0

    def test_rejects_large_epsilon(self):
        with pytest.raises(ValueError):
            gen_phi(2, 0.125, seed=0)

    def test_target_has_zero_error(self):
        inst = gen_phi(4, 0.02, seed=3)
        assert exact_error(inst.target, inst.dists[0]) == 0.0


class TestGenBigPhi:
    def test_block_supports(self):
        inst = gen_big_phi(2, 4, 0.01, seed=0)
        names = inst.domain.point_names
        supports = [sorted(names[p] for p in d.points) for d in inst.dists]
        assert supports[0] == ["0", "1", "bot"]
        assert supports[1] == ["2", "3", "bot"]

    def test_non_sink_supports_are_disjoint_and_cover(self):
        inst = gen_big_phi(4, 12, 0.01, seed=2)
        bot = inst.domain.size - 1
        blocks = [set(d.points.tolist()) - {bot} for d in inst.dists]
        assert all(a.isdisjoint(b) for i, a in enumerate(blocks) for b in blocks[i + 1:])
        assert set().union(*blocks) == set(range(12))

    def test_each_player_matches_phi_of_block_size(self):
        k, d, eps = 2, 4, 0.01
        inst = gen_big_phi(k, d, eps, seed=5)
        reference = gen_phi(d // k, eps, seed=5)
        ref_masses = sorted(reference.dists[0].masses.tolist())
        for player in range(k):
            assert sorted(inst.dists[player].masses.tolist()) == pytest.approx(ref_masses)

    def test_divisibility_and_size_preconditions(self):
        with pytest.raises(ValueError):
            gen_big_phi(3, 8, 0.01, seed=0)  # k does not divide d
        with pytest.raises(ValueError):
            gen_big_phi(4, 4, 0.01, seed=0)  # needs d > k


class TestGenPsi:
    def test_single_player_cases_both_occur(self):
        sizes = {gen_psi(1, 1, 0.1, seed=s).dists[0].support_size for s in range(30)}
        assert sizes == {1, 2}

    def test_active_player_mass_layout(self):
        for seed in range(30):
            inst = gen_psi(1, 1, 0.1, seed=seed)
            dist = inst.dists[0]
            if dist.support_size == 2:
                by_name = masses_by_name(inst, 0)
                assert by_name["bot"] == pytest.approx(0.8, abs=1e-15)
                assert by_name["1"] == pytest.approx(0.2, abs=1e-15)
                break
        else:
            pytest.fail("no active draw in 30 seeds")

    def test_blocks_identical_before_permutation(self):
        inst = gen_psi(8, 2, 0.1, seed=7)
        # invert the stored shuffle: pre-permutation position j held base player j % d
        ordered = [None] * 8
        for final_pos in range(8):
            ordered[inst.permutation[final_pos]] = inst.dists[final_pos]
        for j in range(8):
            a, b = ordered[j], ordered[j % 2]
            assert np.array_equal(a.points, b.points)
            assert np.array_equal(a.masses, b.masses)

    def test_divisibility_precondition(self):
        with pytest.raises(ValueError):
            gen_psi(7, 2, 0.1, seed=0)

    def test_seeded_determinism(self):
        a = gen_psi(4, 2, 0.1, seed=9)
        b = gen_psi(4, 2, 0.1, seed=9)
        assert np.array_equal(a.permutation, b.permutation)
        assert np.array_equal(a.target.table, b.target.table)
        for da, db in zip(a.dists, b.dists):
            assert np.array_equal(da.points, db.points)
            assert np.array_equal(da.masses, db.masses)
            assert np.array_equal(da.labels, db.labels)

    def test_sink_pinned_to_zero(self):
        inst = gen_psi(4, 4, 0.2, seed=11)
        assert inst.target(inst.domain.size - 1) == 0
