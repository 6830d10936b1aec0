"""Persuasion with network vs. public signals on large inhomogeneous
random graphs: limiting statistics, finite-n simulation, and sender
optimization."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .components import believer_components, components, decompose
from .diffusion import (EquilibriumActions, SeedPolicy, Signal, SenderStrategy,
                        equilibrium, select_seeds, simulate_payoff, spread)
from .limits import (BranchingSizeDist, Connectedness, DegreeDist, LimitStats,
                     SolverError, branching_size_dist, check_condition_a1,
                     compute_d_vote, compute_degree_dists, compute_limits,
                     compute_zeta, forward_dist, giant_fraction,
                     is_more_connected, solve_rho, solve_zeta_hat)
from .model import (H, L, FiniteDist, ModelParams, PayoffFn, SignalClass,
                    action, classify_signal, payoff_eval, posterior_nonempty)
from .netgen import (EdgeBudgetError, NetworkInstance, dump_network,
                     empirical_stats, load_network, sample_network)
from .optimizer import (CompareReport, InfeasibleStrategyError, PayoffReport,
                        ReducedStrategy, compare, limit_payoff_network,
                        limit_payoff_public, optimize_network, optimize_public)
from .rng import RngSpec
from .scenarios import (SCENARIOS, HypothesisError, ScenarioResult,
                        island_params, sceptics_params)

__version__ = "0.1.0"
