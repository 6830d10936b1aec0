import math

import pytest

from persuasion_net.model import FiniteDist, ModelParams, PayoffFn
from persuasion_net.rng import RngSpec
from persuasion_net.scenarios import (HypothesisError, island_params,
                                      scenario_baseline, scenario_crra,
                                      scenario_homophily, scenario_sceptics,
                                      scenario_voting, sceptics_params)


class TestBaseline:
    def test_island_linear_passes(self):
        res = scenario_baseline(island_params(math.sqrt(2.0)), grid_n=101)
        assert res.verdict and res.v_net <= res.v_pub + 1e-6

    def test_island_convex_passes(self):
        res = scenario_baseline(
            island_params(math.sqrt(2.0), payoff=PayoffFn.power(2)), grid_n=101)
        assert res.verdict

    def test_degenerate_zero_connectedness(self):
        # network signals reach nobody, so the network side collapses to
        # the do-nothing value; public broadcasts are unaffected by the
        # empty network and still persuade optimally
        res = scenario_baseline(island_params(0.0), grid_n=41)
        assert res.verdict
        assert res.v_net == pytest.approx(0.5, abs=1e-9)
        assert res.v_pub == pytest.approx(0.5 + 0.5 * (0.4 / 0.6), abs=1e-9)

    def test_hypothesis_checked(self):
        with pytest.raises(HypothesisError):
            scenario_baseline(island_params(1.0, q=0.5))
        with pytest.raises(HypothesisError):
            scenario_baseline(island_params(1.0, payoff=PayoffFn.crra(0.5)))


class TestHomophily:
    def test_island_strong_homophily(self):
        res = scenario_homophily(island_params(math.sqrt(3.0), q=0.5), grid_n=101)
        assert res.verdict
        assert res.details["min_zeta_hat_gap"] > 0

    def test_mild_homophily(self):
        res = scenario_homophily(island_params(math.sqrt(3.0), q=0.9), grid_n=101)
        assert res.verdict

    def test_q_one_reduces_to_baseline(self):
        res = scenario_homophily(island_params(math.sqrt(2.0), q=1.0), grid_n=101)
        assert res.verdict

    def test_hypothesis_checked(self):
        # sceptics more connected violates the believer-dominance hypothesis
        p = ModelParams(gamma_h=0.3, mu_h1=0.6, mu_l1=0.4, mu_s1=0.5, q=0.5,
                        f_h=FiniteDist.point(1.0), f_l=FiniteDist.point(1.0))
        with pytest.raises(HypothesisError):
            scenario_homophily(p)


class TestSceptics:
    def test_limit_side_wins(self):
        res = scenario_sceptics(sceptics_params(), rng=RngSpec(1), run_mc=False,
                                grid_n=101)
        assert res.verdict and res.details["margin"] > 0

    def test_isolated_believers_extreme(self):
        # believers fully isolated: only sceptics move with the network
        p = sceptics_params(lambda_h=0.0)
        res = scenario_sceptics(p, rng=RngSpec(1), run_mc=False, grid_n=101)
        assert res.verdict and res.v_net > res.v_pub

    def test_hypothesis_bounds(self):
        p = sceptics_params(lambda_l=1.0, lambda_h=1.0)
        with pytest.raises(HypothesisError):
            scenario_sceptics(p, rng=RngSpec(1), run_mc=False)

    def test_monte_carlo_cross_check_small(self):
        # reduced scale keeps the test quick; the acceptance suite runs the
        # full n = 2e5 version
        res = scenario_sceptics(sceptics_params(lambda_l=8.0, lambda_h=0.05),
                                rng=RngSpec(2), n=20000, reps=4, pilot_reps=4,
                                grid_n=101)
        assert res.mc_mean is not None
        assert res.details["mc_within_3se"]


class TestCrra:
    def test_requires_believer_giant(self):
        with pytest.raises(HypothesisError):
            scenario_crra(island_params(1.0), grid_n=41)

    def test_kappa_value(self):
        from persuasion_net.scenarios import crra_proof_strategy

        p = island_params(math.sqrt(3.0), mu_h1=0.75, mu_l1=0.25)
        s = crra_proof_strategy(p, r=1.0)
        # kappa = (3 - 1)/(3 - 1/3) = 0.75, so pi(s'|1) = 1 - kappa = 0.25
        assert s.pi_sp1 == pytest.approx(0.25, abs=1e-12)
        assert s.pi_sp0 == pytest.approx(0.75, abs=1e-12)

    def test_infeasible_r_rejected(self):
        p = island_params(math.sqrt(3.0), mu_h1=0.75, mu_l1=0.25)
        with pytest.raises(HypothesisError):
            scenario_crra(p, r=5.0, grid_n=41)

    def test_sweep_reports_reversal_at_b_one(self):
        p = island_params(math.sqrt(3.0), mu_h1=0.75, mu_l1=0.25)
        res = scenario_crra(p, b_grid=(1.0, 0.05), grid_n=101)
        assert res.details["reversed_at_b1"]
        # the r = 1.01 construction never clears a correct public optimizer:
        # the public side persuades sceptics through the empty observation
        # at the same believer-frontier intensity without the r-premium
        assert res.details["b_star"] is None
        assert res.verdict is False


class TestVoting:
    def test_sufficient_condition_attains_one(self):
        p = island_params(math.sqrt(3.0), payoff=PayoffFn.step(0.52))
        res = scenario_voting(p, grid_n=101)
        assert res.verdict
        assert res.details["case"] == "sufficient_network_attains_one"
        assert res.v_net == pytest.approx(1.0, abs=1e-12)
        assert res.details["v_pub_closed"] == pytest.approx(5.0 / 6.0, abs=1e-12)

    def test_necessary_violated_public_preferred(self):
        p = island_params(math.sqrt(3.0), payoff=PayoffFn.step(0.95))
        res = scenario_voting(p, grid_n=101)
        assert res.verdict
        assert res.details["case"] == "necessary_fails_public_weakly_preferred"

    def test_no_believer_giant_public_preferred(self):
        p = island_params(1.2, payoff=PayoffFn.step(0.52))
        res = scenario_voting(p, grid_n=101)
        assert res.verdict
        assert res.details["case"] == "no_believer_giant_public_preferred"

    def test_sufficient_strategy_pays_one_at_finite_n(self):
        # the threshold margin is ~0.05, far above finite-n noise, so every
        # replicate of the believer-frontier strategy clears the threshold
        from persuasion_net.diffusion import (SeedPolicy, Signal,
                                              SenderStrategy, simulate_payoff)
        from persuasion_net.limits import compute_limits

        p = island_params(math.sqrt(3.0), payoff=PayoffFn.step(0.52))
        limits = compute_limits(p)
        strat = SenderStrategy(
            signals=(Signal("int", p.mu_h0 / p.mu_h1, 1.0),),
            seeding=(SeedPolicy("on_lhat1"),))
        sim = simulate_payoff(p, strat, n=60000, reps=4, rng=RngSpec(77),
                              pilot_reps=4, d_max=limits.d_max, limits=limits)
        assert all(r.payoff == 1.0 for r in sim.rows)
        assert sim.mean_expected_payoff == pytest.approx(1.0, abs=1e-12)

    def test_trivial_threshold_rejected(self):
        p = island_params(math.sqrt(3.0), payoff=PayoffFn.step(0.4))
        with pytest.raises(HypothesisError, match="trivial"):
            scenario_voting(p)

    def test_payoff_kind_enforced(self):
        with pytest.raises(HypothesisError):
            scenario_voting(island_params(math.sqrt(3.0)))
