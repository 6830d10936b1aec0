import numpy as np
import pytest

from conftest import make_network
from persuasion_net.components import components, decompose
from persuasion_net.diffusion import (SeedPolicy, Signal, SenderStrategy,
                                      actions_on_signals, equilibrium,
                                      select_seeds, sharer_mask, simulate_payoff,
                                      spread)
from persuasion_net.model import FiniteDist, ModelParams
from persuasion_net.netgen import sample_network
from persuasion_net.rng import RngSpec


def island(lam, **kw):
    f = FiniteDist.point(lam)
    defaults = dict(gamma_h=0.5, mu_h1=0.6, mu_l1=0.4, mu_s1=0.5, q=1.0)
    defaults.update(kw)
    return ModelParams(f_h=f, f_l=f, **defaults)


PARAMS = island(1.0)
CL = PARAMS.mu_l1 / PARAMS.mu_l0  # sceptic-frontier likelihood ratio


def strategy(signals, seeding=None, **kw):
    seeding = seeding or tuple(SeedPolicy("on_l1") for _ in signals)
    return SenderStrategy(signals=tuple(signals), seeding=tuple(seeding), **kw)


class TestStrategyValidation:
    def test_state_sums_cap(self):
        with pytest.raises(ValueError):
            strategy([Signal("a", 0.6, 0.1), Signal("b", 0.5, 0.1)])

    def test_seeding_arity(self):
        with pytest.raises(ValueError):
            SenderStrategy(signals=(Signal("a", 0.1, 0.1),), seeding=())

    def test_seed_budget(self):
        s = strategy([Signal("a", 0.1, 0.1)])
        assert s.seed_budget(16) == 4  # floor(16 ** 0.5)


class TestActionsOnSignals:
    def test_good_int_bad(self):
        s = strategy([Signal("good", 0.5, 0.5 * CL), Signal("int", 0.4, 0.4)])
        assert actions_on_signals(s, PARAMS) == [(1, 1), (1, 0)]

    def test_state0_only_signal_is_bad(self):
        s = strategy([Signal("bad", 0.0, 0.3)])
        assert actions_on_signals(s, PARAMS) == [(0, 0)]


class TestSharerRules:
    def test_persuaded_rule(self):
        net = make_network([0, 1], [])
        good = sharer_mask(net, PARAMS, Signal("g", 1.0, CL))
        assert good.tolist() == [1, 1]
        intm = sharer_mask(net, PARAMS, Signal("i", 0.5, 0.5))
        assert intm.tolist() == [1, 0]

    def test_agree_content_flips_state0_int(self):
        net = make_network([0, 1], [])
        # int signal more likely under state 0: only sceptics' action matches
        share = sharer_mask(net, PARAMS, Signal("i", 0.5, 0.6), "agree_content")
        assert share.tolist() == [0, 1]
        # int signal more likely under state 1: believers share, as baseline
        share = sharer_mask(net, PARAMS, Signal("i", 0.6, 0.5), "agree_content")
        assert share.tolist() == [1, 0]

    def test_agree_prose_rule(self):
        net = make_network([0, 1], [])
        assert sharer_mask(net, PARAMS, Signal("g", 1.0, CL),
                           "agree_prose").tolist() == [1, 1]
        assert sharer_mask(net, PARAMS, Signal("i", 0.5, 0.5),
                           "agree_prose").tolist() == [0, 1]
        assert sharer_mask(net, PARAMS, Signal("b", 0.1, 0.9),
                           "agree_prose").tolist() == [1, 1]

    def test_prose_rule_routes_int_signal_through_sceptics(self):
        # l-l-h-h path, believer-only signal seeded at the first sceptic:
        # sceptics relay it, the first believer observes but stops it
        net = make_network([1, 1, 0, 0], [(0, 1), (1, 2), (2, 3)])
        share = sharer_mask(net, PARAMS, Signal("i", 0.5, 0.5), "agree_prose")
        obs = spread(net, np.array([0]), share)
        assert obs.tolist() == [True, True, True, False]
        # baseline rule: the seed sceptic does not relay at all
        share = sharer_mask(net, PARAMS, Signal("i", 0.5, 0.5), "persuaded")
        obs = spread(net, np.array([0]), share)
        assert obs.tolist() == [True, False, False, False]


class TestSelectSeeds:
    def test_on_l1_deterministic(self):
        net = make_network([0] * 4, [(0, 1), (1, 2), (2, 3)])
        dec = decompose(net)
        gen = np.random.default_rng(0)
        seeds = select_seeds(net, dec, SeedPolicy("on_l1"), budget=2, gen=gen)
        assert len(seeds) == 1 and dec.full.labels[seeds[0]] == 0
        again = select_seeds(net, dec, SeedPolicy("on_l1"), budget=2,
                             gen=np.random.default_rng(0))
        assert np.array_equal(seeds, again)

    def test_on_lhat1_no_believers_falls_back_empty(self, caplog):
        net = make_network([1, 1], [(0, 1)])
        dec = decompose(net)
        seeds = select_seeds(net, dec, SeedPolicy("on_lhat1"), budget=1,
                             gen=np.random.default_rng(0))
        assert len(seeds) == 0

    def test_uniform_capped_by_budget(self):
        net = make_network([0] * 16, [])
        dec = decompose(net)
        seeds = select_seeds(net, dec, SeedPolicy("uniform", k=5), budget=4,
                             gen=np.random.default_rng(1))
        assert len(seeds) == 4 and len(set(seeds.tolist())) == 4


class TestSpread:
    def test_h_h_l_path_int_signal(self):
        net = make_network([0, 0, 1], [(0, 1), (1, 2)])
        share = sharer_mask(net, PARAMS, Signal("i", 0.5, 0.5))
        obs = spread(net, np.array([0]), share)
        assert obs.tolist() == [True, True, True]

    def test_h_l_h_path_int_signal(self):
        net = make_network([0, 1, 0], [(0, 1), (1, 2)])
        share = sharer_mask(net, PARAMS, Signal("i", 0.5, 0.5))
        obs = spread(net, np.array([0]), share)
        assert obs.tolist() == [True, True, False]

    def test_good_signal_reaches_seed_components(self):
        net = make_network([0, 1, 0, 1], [(0, 1), (2, 3)])
        share = sharer_mask(net, PARAMS, Signal("g", 1.0, CL))
        obs = spread(net, np.array([0]), share)
        assert obs.tolist() == [True, True, False, False]

    def test_monotone_in_seeds(self):
        net = sample_network(island(1.3), 400, RngSpec(3))
        share = net.node_type == 0
        small = spread(net, np.array([0, 1]), share)
        large = spread(net, np.array([0, 1, 2, 3]), share)
        assert np.all(large[small])

    def test_idempotent_from_observed(self):
        net = sample_network(island(1.3), 400, RngSpec(4))
        share = net.node_type == 0
        obs = spread(net, np.array([0, 5, 9]), share)
        again = spread(net, np.flatnonzero(obs), share)
        assert np.array_equal(obs, again)

    def test_callable_sharers_accepted(self):
        net = make_network([0, 0, 0], [(0, 1), (1, 2)])
        obs = spread(net, np.array([0]), lambda i: i < 1)
        assert obs.tolist() == [True, True, False]

    def test_relabeling_invariance(self):
        # the outcome is a property of the graph, not of node iteration
        # order: permuting node ids permutes the observed set accordingly
        net = sample_network(island(1.3, q=0.8), 500, RngSpec(12))
        gen = np.random.default_rng(0)
        perm = gen.permutation(net.n)
        inv = np.empty(net.n, dtype=np.int64)
        inv[perm] = np.arange(net.n)
        from conftest import make_network

        rows = np.repeat(np.arange(net.n), net.degree)
        fwd = rows < net.indices
        edges = list(zip(perm[rows[fwd]].tolist(), perm[net.indices[fwd]].tolist()))
        types = np.empty(net.n, dtype=np.uint8)
        types[perm] = net.node_type
        relabeled = make_network(types.tolist(), edges)
        share = net.node_type == 0
        share_re = relabeled.node_type == 0
        seeds = np.array([3, 77, 200], dtype=np.int64)
        obs = spread(net, seeds, share)
        obs_re = spread(relabeled, perm[seeds], share_re)
        assert np.array_equal(obs_re[perm], obs)

    @pytest.mark.parametrize("seed", range(10))
    def test_good_spread_equals_component_union(self, seed):
        params = island(1.2, q=0.7)
        net = sample_network(params, 300, RngSpec(800).child(seed))
        dec = components(net)
        share = sharer_mask(net, params, Signal("g", 1.0, CL))
        gen = np.random.default_rng(seed)
        seeds = gen.choice(net.n, size=3, replace=False).astype(np.int64)
        obs = spread(net, seeds, share)
        expect = np.isin(dec.labels, dec.labels[seeds])
        assert np.array_equal(obs, expect)


class TestEquilibrium:
    def test_no_signals_prior_actions(self):
        s = strategy([Signal("a", 0.0, 0.0)], (SeedPolicy("none"),))
        obs = np.zeros((1, 2, 9))
        eq = equilibrium(s, PARAMS, obs)
        assert np.all(eq.empty_actions[0] == 1)  # believers act on prior
        assert np.all(eq.empty_actions[1] == 0)

    def test_voting_strategy_threshold_matches_d_vote(self, island_sqrt3):
        from persuasion_net.limits import compute_d_vote, compute_limits
        from persuasion_net.diffusion import theoretical_observation_probs

        limits = compute_limits(island_sqrt3)
        d_vote = compute_d_vote(island_sqrt3, limits)
        s = strategy(
            [Signal("int", island_sqrt3.mu_h0 / island_sqrt3.mu_h1, 1.0)],
            (SeedPolicy("on_lhat1"),))
        obs = theoretical_observation_probs(island_sqrt3, s, limits, limits.d_max)
        eq = equilibrium(s, island_sqrt3, obs)
        acts = eq.empty_actions[1]
        assert np.all(acts[d_vote:] == 1) and np.all(acts[:d_vote] == 0)

    def test_inconsistent_probs_rejected(self):
        # malformed observation table (entries above 1) must fail the
        # per-state consistency precondition
        s = strategy([Signal("a", 0.5, 0.1), Signal("b", 0.5, 0.1)])
        obs = np.full((2, 2, 4), 1.5)
        with pytest.raises(ValueError, match="inconsistent"):
            equilibrium(s, PARAMS, obs)

    def test_signal_order_irrelevant(self):
        sigs = [Signal("g", 0.6, CL * 0.6), Signal("i", 0.3, 0.3)]
        pols = [SeedPolicy("on_l1"), SeedPolicy("on_lhat1")]
        obs = np.random.default_rng(0).uniform(0.0, 0.5, size=(2, 2, 6))
        eq_a = equilibrium(strategy(sigs, pols), PARAMS, obs)
        eq_b = equilibrium(strategy(sigs[::-1], pols[::-1]), PARAMS, obs[::-1])
        assert np.array_equal(eq_a.empty_actions, eq_b.empty_actions)

    def test_zero_denominator_logged_as_action_one(self):
        s = strategy([Signal("a", 0.5, 1.0)])
        obs = np.ones((1, 2, 3))  # always observed: empty impossible in state 0
        eq = equilibrium(s, PARAMS, obs)
        assert len(eq.zero_denominator) > 0
        assert np.all(eq.empty_actions == 1)


class TestSimulatePayoff:
    def test_empty_only_strategy_pays_believer_fraction(self):
        s = strategy([Signal("a", 0.0, 0.0)], (SeedPolicy("none"),))
        rep = simulate_payoff(PARAMS, s, n=2000, reps=3, rng=RngSpec(5),
                              pilot_reps=2, d_max=16)
        for row in rep.rows:
            assert row.signal == "empty"
            assert row.payoff == pytest.approx(row.fraction_action1)
            assert abs(row.payoff - 0.5) < 0.05

    def test_thread_count_does_not_change_results(self):
        s = strategy([Signal("g", 1.0, CL)], (SeedPolicy("on_l1"),))
        kw = dict(n=1500, reps=6, rng=RngSpec(6), pilot_reps=3, d_max=16)
        a = simulate_payoff(PARAMS, s, threads=1, **kw)
        b = simulate_payoff(PARAMS, s, threads=4, **kw)
        assert [r.payoff for r in a.rows] == [r.payoff for r in b.rows]
        assert a.mean_expected_payoff == b.mean_expected_payoff
        assert np.array_equal(a.obs_counts, b.obs_counts)

    def test_observation_limits_mode_requires_limits(self):
        s = strategy([Signal("g", 1.0, CL)], (SeedPolicy("on_l1"),))
        with pytest.raises(ValueError):
            simulate_payoff(PARAMS, s, n=100, reps=1, rng=RngSpec(1),
                            observation="limits")

    def test_seeding_off_giant_reaches_nobody(self, island_sqrt2):
        # uniform seeding restricted to nodes outside L1: observed fraction
        # stays negligible in nearly every replicate
        ok = 0
        reps = 20
        for rep in range(reps):
            net = sample_network(island_sqrt2, 100000, RngSpec(900).child(rep))
            dec = components(net)
            off = np.flatnonzero(dec.labels != 0)
            gen = np.random.default_rng(rep)
            seed = off[gen.integers(0, len(off))]
            share = sharer_mask(net, island_sqrt2, Signal("g", 1.0, CL))
            obs = spread(net, np.array([seed]), share)
            if obs.mean() < 0.01:
                ok += 1
        assert ok >= int(0.95 * reps)

    def test_observers_confined_to_giant_structure(self, island_sqrt3):
        net = sample_network(island_sqrt3, 100000, RngSpec(901))
        dec = decompose(net)
        gen = np.random.default_rng(0)
        # good signal seeded on L1: observers outside L1 are at most the seed
        share = sharer_mask(net, island_sqrt3, Signal("g", 1.0, CL))
        seeds = select_seeds(net, dec, SeedPolicy("on_l1"), 10, gen)
        obs = spread(net, seeds, share)
        assert (obs & (dec.full.labels != 0)).mean() < 0.01
        # believer-only signal seeded on L-hat-1: observers without a
        # neighbour on L-hat-1 are a vanishing fraction
        share = sharer_mask(net, island_sqrt3, Signal("i", 0.5, 0.5))
        seeds = select_seeds(net, dec, SeedPolicy("on_lhat1"), 10, gen)
        obs = spread(net, seeds, share)
        assert (obs & ~dec.believer.neighbor_mask).mean() < 0.01
