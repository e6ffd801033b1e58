"""Log-linear learning: sampling distribution, trajectories, sweeps."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import anarchy_lab as al
from anarchy_lab import Compromise, Utility
from anarchy_lab.learning import LearningState, _sample_index, _softmax


def two_action_game(v0, v1):
    return al.GameInstance(
        welfare=al.SeparableWelfare(curves=((0.0, float(v0)), (0.0, float(v1)))),
        action_sets=((frozenset({0}), frozenset({1})),),
        utilities=(Utility.MARGINAL_CONTRIBUTION,),
        compromise=(Compromise.NORMAL,),
    )


class TestActionDistribution:
    def test_equal_utilities_split_evenly(self):
        g = two_action_game(0.4, 0.4)
        for T in (0.001, 1.0, 100.0):
            probs = al.action_distribution(g, 0, al.empty_profile(g), T)
            # actions are (empty, {0}, {1}); the two resources tie
            assert probs[1] == pytest.approx(probs[2], abs=1e-15)

    def test_high_temperature_is_uniform(self):
        g = two_action_game(0.1, 0.9)
        probs = al.action_distribution(g, 0, al.empty_profile(g), 1e9)
        for p in probs:
            assert p == pytest.approx(1.0 / 3.0, abs=1e-6)

    def test_low_temperature_concentrates_on_argmax(self):
        g = two_action_game(0.1, 0.9)
        probs = al.action_distribution(g, 0, al.empty_profile(g), 1e-3)
        assert probs[2] == pytest.approx(1.0, abs=1e-9)

    def test_gap_to_temperature_ratio_controls_concentration(self):
        # utility gap 10 at temperature 1e-4: no overflow, argmax certain
        g = two_action_game(0.0, 10.0)
        probs = al.action_distribution(g, 0, al.empty_profile(g), 1e-4)
        assert all(math.isfinite(p) for p in probs)
        assert probs[2] >= 1.0 - 1e-6

    @given(
        utilities=st.lists(
            st.floats(min_value=0.0, max_value=10.0), min_size=2, max_size=6
        ),
        temperature=st.floats(min_value=1e-4, max_value=1e3),
    )
    @settings(max_examples=200, deadline=None)
    def test_softmax_is_a_distribution(self, utilities, temperature):
        probs = _softmax(utilities, temperature)
        assert abs(sum(probs) - 1.0) <= 1e-12
        assert all(p >= 0.0 for p in probs)
        # actions at least 30 temperatures below the best get negligible mass
        top = max(utilities)
        losing_mass = sum(
            p for u, p in zip(utilities, probs) if top - u >= 30 * temperature
        )
        assert losing_mass <= 1e-6

    @given(r=st.floats(min_value=0.0, max_value=1.0, exclude_max=True))
    @settings(max_examples=100, deadline=None)
    def test_sampling_always_picks_a_valid_index(self, r):
        probs = [0.2, 0.3, 0.5]
        assert 0 <= _sample_index(probs, r) < 3


class TestStep:
    def test_step_matches_runner_exactly(self):
        g = al.gen_sim_game(
            6, 5, 0.05, labels=[Compromise.ISOLATED, Compromise.BLIND] * 2 + [Compromise.BLIND]
        )
        steps = 1500
        result = al.lll_run(g, T=0.02, steps=steps, seed=99, keep_trace=True)
        state = LearningState(current=al.empty_profile(g), step=0, rng=random.Random(99))
        for k in range(steps):
            state = al.lll_step(g, state, 0.02)
            assert abs(al.welfare_eval(g, state.current) - result.trace[k]) <= 1e-9
        assert state.current == result.final
        assert state.step == steps

    def test_disabled_agents_never_update(self):
        g = al.GameInstance(
            welfare=al.SeparableWelfare(curves=((0.0, 1.0, 1.0), (0.0, 1.0, 1.0))),
            action_sets=((frozenset({0}),), (frozenset({1}),)),
            utilities=(Utility.MARGINAL_CONTRIBUTION,) * 2,
            compromise=(Compromise.DISABLED, Compromise.NORMAL),
        )
        state = LearningState(current=al.empty_profile(g), step=0, rng=random.Random(0))
        for _ in range(200):
            state = al.lll_step(g, state, 0.5)
            assert state.current[0] == frozenset()

    def test_rejects_nonpositive_temperature(self):
        g = two_action_game(0.1, 0.9)
        state = LearningState(current=al.empty_profile(g), step=0, rng=random.Random(0))
        with pytest.raises(ValueError):
            al.lll_step(g, state, 0.0)


class TestRun:
    def test_reproducible(self):
        g = al.gen_sim_game(5, 4, 0.05)
        a = al.lll_run(g, T=0.01, steps=5000, seed=12, keep_trace=True)
        b = al.lll_run(g, T=0.01, steps=5000, seed=12, keep_trace=True)
        assert a == b

    def test_mean_within_welfare_range(self):
        g = al.gen_sim_game(5, 4, 0.05)
        opt, _ = al.optimal_welfare(g)
        for T in (0.005, 0.5, 5.0):
            res = al.lll_run(g, T=T, steps=4000, seed=3)
            assert 0.0 <= res.mean_welfare <= opt + al.TOLERANCE
            assert res.min_welfare <= res.mean_welfare <= res.max_welfare

    def test_burn_in_drops_the_transient(self):
        g = al.gen_sim_game(5, 4, 0.05)
        full = al.lll_run(g, T=0.001, steps=4000, seed=5)
        trimmed = al.lll_run(g, T=0.001, steps=4000, seed=5, burn_in=1000)
        assert trimmed.mean_welfare >= full.mean_welfare

    def test_custom_start_profile(self):
        g = al.gen_sim_game(5, 4, 0.05)
        eqs = al.enumerate_pne(g)
        w, a0 = eqs.worst()
        res = al.lll_run(g, T=0.0005, steps=2000, seed=8, a0=a0)
        assert res.mean_welfare == pytest.approx(w, abs=0.01)

    def test_works_on_tabulated_games(self):
        parent = al.gen_mc_blind(4, 2, 0.05)
        sub = al.subgame(parent, {0: frozenset({0}), 1: frozenset({2})})
        res = al.lll_run(sub, T=0.01, steps=500, seed=1)
        assert res.mean_welfare >= 0.0


class TestSweep:
    def test_identical_seeds_identical_csv(self):
        g = al.gen_sim_game(5, 4, 0.05)
        a = al.temperature_sweep(g, [0.001, 0.1, 1.0], steps=800, trials=3, seed=21)
        b = al.temperature_sweep(g, [0.001, 0.1, 1.0], steps=800, trials=3, seed=21)
        assert a.to_csv() == b.to_csv()

    def test_worker_count_does_not_change_results(self):
        g = al.gen_sim_game(5, 4, 0.05)
        seq = al.temperature_sweep(g, [0.01, 1.0], steps=600, trials=4, seed=2, workers=1)
        par = al.temperature_sweep(g, [0.01, 1.0], steps=600, trials=4, seed=2, workers=4)
        assert seq.to_csv() == par.to_csv()

    def test_csv_shape(self):
        g = al.gen_sim_game(5, 4, 0.05)
        res = al.temperature_sweep(g, [0.01, 1.0], steps=300, trials=2, seed=0)
        lines = res.to_csv().strip().split("\n")
        assert lines[0] == "temperature,trial,mean_welfare,std_welfare,min_welfare,max_welfare,steps,seed"
        assert len(lines) == 1 + 2 * 2

    def test_blind_beats_isolated_at_low_temperature(self):
        blind = al.gen_sim_game(6, 5, 0.05)
        isolated = al.gen_sim_game(6, 5, 0.05, labels=[Compromise.ISOLATED] * 5)
        sb = al.temperature_sweep(blind, [0.001], steps=20_000, trials=2, seed=4)
        si = al.temperature_sweep(isolated, [0.001], steps=20_000, trials=2, seed=4)
        assert sb.pooled_mean(0.001) > si.pooled_mean(0.001) + 0.03

    def test_sub_seed_scheme_is_documented_and_stable(self):
        assert al.sub_seed(0, 0, 0) == al.sub_seed(0, 0, 0)
        seen = {al.sub_seed(5, ti, tr) for ti in range(4) for tr in range(4)}
        assert len(seen) == 16


class TestBaseline:
    def test_single_agent_uniform_play(self):
        g = al.GameInstance(
            welfare=al.SeparableWelfare(curves=((0.0, 1.0),)),
            action_sets=((frozenset({0}),),),  # plus the implicit opt-out
            utilities=(Utility.MARGINAL_CONTRIBUTION,),
            compromise=(Compromise.NORMAL,),
        )
        mean = al.random_play_baseline(g, steps=40_000, seed=1)
        assert mean == pytest.approx(0.5, abs=0.02)

    def test_baseline_beats_the_worst_equilibrium_here(self):
        g = al.gen_sim_game(10, 9, 0.05)
        mean = al.random_play_baseline(g, steps=30_000, seed=9)
        assert mean > 1.0

    def test_matches_high_temperature_play(self):
        g = al.gen_sim_game(6, 5, 0.05)
        base = al.random_play_baseline(g, steps=30_000, seed=17)
        hot = al.lll_run(g, T=50.0, steps=30_000, seed=18)
        assert hot.mean_welfare == pytest.approx(base, rel=0.05)


def test_two_tied_actions_split_half_and_half():
    # a worthless resource ties with opting out: exactly two actions, equal
    # utilities, so each is drawn with probability 1/2 at any temperature
    g = al.GameInstance(
        welfare=al.SeparableWelfare(curves=((0.0, 0.0),)),
        action_sets=((frozenset({0}),),),
        utilities=(Utility.MARGINAL_CONTRIBUTION,),
        compromise=(Compromise.NORMAL,),
    )
    for T in (0.001, 1.0, 1e6):
        probs = al.action_distribution(g, 0, al.empty_profile(g), T)
        assert probs == [0.5, 0.5]


def test_baseline_keeps_disabled_agents_opted_out():
    g = al.GameInstance(
        welfare=al.SeparableWelfare(curves=((0.0, 7.0, 7.0), (0.0, 1.0, 1.0))),
        action_sets=((frozenset({0}),), (frozenset({1}),)),
        utilities=(Utility.MARGINAL_CONTRIBUTION,) * 2,
        compromise=(Compromise.DISABLED, Compromise.NORMAL),
    )
    mean = al.random_play_baseline(g, steps=20_000, seed=5)
    # only the normal agent's unit resource can ever contribute
    assert mean <= 1.0
    assert mean == pytest.approx(0.5, abs=0.02)
