"""Submodularity / validity checkers: they are the oracles, so they get
their own planted-violation cases."""

import itertools

import pytest

import anarchy_lab as al
from anarchy_lab import Compromise, Utility


def tabulated_game(table, num_resources, action_sets, labels=None):
    n = len(action_sets)
    return al.GameInstance(
        welfare=al.TabulatedWelfare.from_mapping(table, num_resources),
        action_sets=tuple(tuple(frozenset(a) for a in acts) for acts in action_sets),
        utilities=(Utility.MARGINAL_CONTRIBUTION,) * n,
        compromise=tuple(labels) if labels else (Compromise.NORMAL,) * n,
    )


def full_table(num_resources, value_fn):
    table = {}
    for size in range(num_resources + 1):
        for combo in itertools.combinations(range(num_resources), size):
            table[frozenset(combo)] = value_fn(frozenset(combo))
    return table


class TestCheckSubmodular:
    def test_separable_valid_curves_pass(self):
        for seed in range(8):
            game = al.gen_random_separable(n=3, max_resources=3, max_actions=3, seed=seed)
            assert al.check_submodular(game).ok

    def test_planted_supermodular_table_flagged(self):
        # complementarities: the pair is worth more than its parts combined
        table = {
            frozenset(): 0.0,
            frozenset({0}): 1.0,
            frozenset({1}): 1.0,
            frozenset({0, 1}): 3.0,
        }
        game = tabulated_game(table, 2, [[{0}], [{1}]])
        report = al.check_submodular(game)
        assert not report.ok
        assert report.failure.kind == "submodularity"
        assert report.failure.witness is not None

    def test_non_monotone_table_flagged(self):
        table = {
            frozenset(): 0.0,
            frozenset({0}): 2.0,
            frozenset({1}): 1.0,
            frozenset({0, 1}): 1.5,
        }
        game = tabulated_game(table, 2, [[{0}], [{1}]])
        report = al.check_submodular(game)
        assert not report.ok
        assert report.failure.kind == "monotonicity"

    def test_unnormalized_table_rejected_at_construction(self):
        with pytest.raises(al.ValidationError, match="normalized"):
            tabulated_game({frozenset(): 0.5, frozenset({0}): 1.0}, 1, [[{0}]])

    def test_shared_resource_family_passes(self):
        assert al.check_submodular(al.gen_mc_blind(6, 3, 0.01)).ok

    def test_coverage_style_table_passes(self):
        # coverage functions are submodular
        weights = {0: 2.0, 1: 1.0, 2: 0.5}
        table = full_table(3, lambda s: sum(weights[r] for r in s))
        game = tabulated_game(table, 3, [[{0}, {0, 1}], [{1}, {2}], [{0, 2}]])
        assert al.check_submodular(game).ok

    def test_size_cap_refusal(self):
        game = al.gen_k_blind(8, 3, 0.01, 0.01)
        with pytest.raises(al.SizeCapError):
            al.check_submodular(game, cap=10)

    def test_incomplete_table_reported(self):
        table = {frozenset(): 0.0, frozenset({0}): 1.0, frozenset({1}): 1.0}
        game = tabulated_game(table, 2, [[{0}], [{1}]])
        report = al.check_submodular(game)
        assert not report.ok
        assert report.failure.kind == "table-missing"


class TestCheckVug:
    def test_marginal_contribution_games_pass(self):
        for seed in range(6):
            game = al.gen_random_separable(
                n=3,
                max_resources=3,
                max_actions=3,
                seed=seed,
                utility_choices=(Utility.MARGINAL_CONTRIBUTION,),
            )
            report = al.check_vug(game)
            assert report.ok
            assert report.utility_dominates_marginal
            assert report.utility_sum_bounded

    def test_equal_share_games_pass_with_tight_sum(self):
        for seed in range(6):
            game = al.gen_random_separable(
                n=3,
                max_resources=3,
                max_actions=3,
                seed=seed,
                utility_choices=(Utility.EQUAL_SHARE,),
            )
            report = al.check_vug(game)
            assert report.ok
            assert report.utility_sum_tight

    def test_planted_sum_violation_flagged(self):
        game = al.gen_k_blind(3, 0, 0.01, 0.01)
        doubled = lambda g, i, a: 2.0 * al.welfare_eval(g, a)
        report = al.check_vug(game, utility_fn=doubled)
        assert not report.utility_sum_bounded
        assert report.failure.kind == "utility-sum-exceeds-welfare"

    def test_planted_marginal_violation_flagged(self):
        game = al.gen_k_blind(3, 0, 0.01, 0.01)
        stingy = lambda g, i, a: 0.0
        report = al.check_vug(game, utility_fn=stingy)
        assert not report.utility_dominates_marginal
        assert report.failure.kind == "utility-below-marginal"

    def test_generator_outputs_pass(self):
        games = [
            al.gen_k_blind(5, 2, 0.01, 0.01),
            al.gen_k_blind(4, 3, 0.05, 0.02, labels=[Compromise.ISOLATED] * 3),
            al.gen_mc_blind(5, 2, 0.01),
            al.gen_mc_noblind(5, 2, 0.01),
            al.gen_sim_game(5, 4, 0.05),
            al.gen_fig1([1.0, 0.7, 0.3, 0.4, 2.0, 0.8]),
        ]
        for game in games:
            vug = al.check_vug(game)
            assert vug.ok, (game, vug.failure)

    def test_random_outputs_pass(self):
        for seed in range(20):
            game = al.gen_random_separable(
                n=3 + seed % 3,
                max_resources=4,
                max_actions=4,
                k=seed % 3,
                labels=[Compromise.BLIND, Compromise.ISOLATED][: seed % 3],
                seed=seed,
            )
            assert al.check_vug(game).ok
