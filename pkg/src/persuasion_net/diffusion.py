"""Seeding, signal spreading, subgame equilibrium and Monte Carlo payoffs.

A realised non-empty signal starts at seed nodes and travels across an
edge whenever the sending endpoint shares it; under the baseline rule a
receiver shares exactly when the signal persuades her (action 1).  All
remaining receivers observe nothing and act on the equilibrium
empty-observation posterior, which depends on their type and degree.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .components import Decomposition, decompose
from .limits import LimitStats
from .model import TYPES, TYPE_INDEX, TIE_EPS, ModelParams, SignalClass, classify_signal
from .netgen import NetworkInstance, sample_network
from .rng import RngSpec

log = logging.getLogger(__name__)

SHARING_RULES = ("persuaded", "agree_content", "agree_prose")


@dataclass(frozen=True)
class Signal:
    label: str
    pi1: float
    pi0: float

    def __post_init__(self):
        if not 0.0 <= self.pi1 <= 1.0 or not 0.0 <= self.pi0 <= 1.0:
            raise ValueError("signal probabilities must lie in [0, 1]")

    @property
    def unused(self) -> bool:
        return self.pi1 == 0.0 and self.pi0 == 0.0


@dataclass(frozen=True)
class SeedPolicy:
    kind: str  # on_l1 | on_lhat1 | uniform | none
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("on_l1", "on_lhat1", "uniform", "none"):
            raise ValueError(f"unknown seed policy {self.kind!r}")
        if self.kind == "uniform" and self.k < 1:
            raise ValueError("uniform seeding needs k >= 1")


@dataclass(frozen=True)
class SenderStrategy:
    """Signal structure over non-empty signals (remainder is the empty
    signal) plus one seeding policy per signal."""

    signals: tuple[Signal, ...]
    seeding: tuple[SeedPolicy, ...]
    seed_exponent: float = 0.5
    sharing_rule: str = "persuaded"

    def __post_init__(self):
        if len(self.signals) != len(self.seeding):
            raise ValueError("one seeding policy per signal required")
        for state_sum in (sum(s.pi1 for s in self.signals),
                          sum(s.pi0 for s in self.signals)):
            if state_sum > 1.0 + 1e-12:
                raise ValueError("per-state signal probabilities exceed 1")
        if not 0.0 < self.seed_exponent < 1.0:
            raise ValueError("seed budget exponent must lie in (0, 1)")
        if self.sharing_rule not in SHARING_RULES:
            raise ValueError(f"unknown sharing rule {self.sharing_rule!r}")

    def pi(self, state: int) -> np.ndarray:
        return np.array([s.pi1 if state == 1 else s.pi0 for s in self.signals])

    def empty_prob(self, state: int) -> float:
        return max(0.0, 1.0 - float(self.pi(state).sum()))

    def seed_budget(self, n: int) -> int:
        return max(1, int(math.floor(n**self.seed_exponent)))


def signal_classes(strategy: SenderStrategy, params: ModelParams) -> list[SignalClass | None]:
    """Class of each signal; None for signals never sent in either state."""
    return [None if s.unused else classify_signal(params, s.pi1, s.pi0)
            for s in strategy.signals]


def actions_on_signals(strategy: SenderStrategy, params: ModelParams) -> list[tuple[int, int]]:
    """(a_h, a_l) per signal: GOOD -> (1,1), INT -> (1,0), BAD -> (0,0)."""
    out = []
    for cls in signal_classes(strategy, params):
        if cls is SignalClass.GOOD:
            out.append((1, 1))
        elif cls is SignalClass.INT:
            out.append((1, 0))
        else:
            out.append((0, 0))
    return out


def sharer_mask(net: NetworkInstance, params: ModelParams, signal: Signal,
                rule: str = "persuaded") -> np.ndarray:
    """Which nodes relay the signal once they observe it."""
    cls = classify_signal(params, signal.pi1, signal.pi0)
    is_h = net.node_type == 0
    if rule == "persuaded":
        share_h = cls in (SignalClass.GOOD, SignalClass.INT)
        share_l = cls is SignalClass.GOOD
    elif rule == "agree_content":
        # content = the state the signal is (weakly) more likely under;
        # ties count as state-1 content
        content = 1 if signal.pi1 >= signal.pi0 else 0
        a_h = 1 if cls in (SignalClass.GOOD, SignalClass.INT) else 0
        a_l = 1 if cls is SignalClass.GOOD else 0
        share_h, share_l = a_h == content, a_l == content
    else:  # agree_prose: everyone relays GOOD and BAD, only sceptics relay INT
        share_h = cls is not SignalClass.INT
        share_l = True
    out = np.zeros(net.n, dtype=np.uint8)
    if share_h:
        out[is_h] = 1
    if share_l:
        out[~is_h] = 1
    return out


def select_seeds(net: NetworkInstance, decomp: Decomposition, policy: SeedPolicy,
                 budget: int, gen: np.random.Generator) -> np.ndarray:
    """Seed set under a policy, capped at the budget; degenerate targets
    fall back to the empty set (logged)."""
    if budget < 1:
        raise ValueError("seed budget must be at least 1")
    if policy.kind == "none" or net.n == 0:
        return np.empty(0, dtype=np.int64)
    if policy.kind == "uniform":
        k = min(policy.k, budget, net.n)
        return np.sort(gen.choice(net.n, size=k, replace=False)).astype(np.int64)
    comp = decomp.full if policy.kind == "on_l1" else decomp.believer
    if comp.count == 0:
        log.warning("seed policy %s found no target component; seeding nothing",
                    policy.kind)
        return np.empty(0, dtype=np.int64)
    members = np.flatnonzero(comp.labels == 0)
    return np.array([members[gen.integers(0, len(members))]], dtype=np.int64)


def spread(net: NetworkInstance, seeds: np.ndarray, sharers) -> np.ndarray:
    """Boolean mask of observers: seeds plus nodes reached through sharers."""
    if callable(sharers):
        mask = np.fromiter((bool(sharers(i)) for i in range(net.n)),
                           count=net.n, dtype=bool)
    else:
        mask = np.asarray(sharers).astype(bool)
    seeds = np.asarray(seeds, dtype=np.int64)
    observed = _kernels.spread_observed(net.indptr, net.indices, seeds,
                                        mask.astype(np.uint8))
    return observed.astype(bool)


@dataclass(frozen=True)
class EquilibriumActions:
    """Unique subgame outcome: signal actions by type, empty actions by
    type and degree."""

    signal_actions: tuple[tuple[int, int], ...]
    empty_actions: np.ndarray          # int8, shape (2, d_max+1)
    zero_denominator: tuple[tuple[str, int], ...] = ()

    @property
    def d_max(self) -> int:
        return self.empty_actions.shape[1] - 1

    def empty_action(self, t: str, d: int) -> int:
        return int(self.empty_actions[TYPE_INDEX[t], min(d, self.d_max)])


def equilibrium(strategy: SenderStrategy, params: ModelParams,
                observation_probs: np.ndarray) -> EquilibriumActions:
    """Receiver actions pinned down by the strategy.

    ``observation_probs[s, t, d]`` is the probability of observing signal s
    conditional on s being realised, for a type-t degree-d receiver.  Non-
    empty-signal actions are type-determined, which fixes the observation
    probabilities, which fix the empty-observation posterior: no iteration.
    """
    obs = np.asarray(observation_probs, dtype=float)
    n_sig = len(strategy.signals)
    if obs.shape[0] != n_sig or obs.shape[1] != 2:
        raise ValueError("observation_probs must have shape (n_signals, 2, d_max+1)")
    for state in (0, 1):
        pi = strategy.pi(state)
        total = np.tensordot(pi, obs, axes=(0, 0))
        if np.any(total > 1.0 + 1e-9):
            raise ValueError("inconsistent observation probabilities: "
                             f"sum over signals exceeds 1 in state {state}")
    pi1 = strategy.pi(1)
    pi0 = strategy.pi(0)
    num = np.array([[params.mu_h1], [params.mu_l1]]) * np.clip(
        1.0 - np.tensordot(pi1, obs, axes=(0, 0)), 0.0, None)
    den = np.array([[params.mu_h0], [params.mu_l0]]) * np.clip(
        1.0 - np.tensordot(pi0, obs, axes=(0, 0)), 0.0, None)
    total = num + den
    zero_den = []
    with np.errstate(invalid="ignore", divide="ignore"):
        posterior = np.where(total > 0.0, num / np.where(total > 0, total, 1.0), 1.0)
    acts = (posterior >= 0.5 - TIE_EPS).astype(np.int8)
    for ti, t in enumerate(TYPES):
        for d in np.flatnonzero(den[ti] <= 0.0):
            zero_den.append((t, int(d)))
    if zero_den:
        log.info("empty signal impossible in state 0 for %d (type, degree) classes; "
                 "treating posterior as 1", len(zero_den))
    return EquilibriumActions(
        signal_actions=tuple(actions_on_signals(strategy, params)),
        empty_actions=acts,
        zero_denominator=tuple(zero_den),
    )


@dataclass(frozen=True)
class ReplicateRow:
    rep: int
    state: int
    signal: str            # label or "empty"
    n_observed: int
    fraction_action1: float
    payoff: float
    payoff_expected: float  # signal-marginalised payoff of this network


@dataclass(frozen=True)
class SimulationReport:
    n: int
    reps: int
    pilot_reps: int
    mean_payoff: float
    se_payoff: float
    mean_expected_payoff: float
    se_expected_payoff: float
    rows: tuple[ReplicateRow, ...]
    obs_counts: np.ndarray      # (n_signals, 2, d_max+1) observers
    obs_totals: np.ndarray      # (2, d_max+1) class sizes
    obs_fractions: np.ndarray   # counts / totals (nan where empty)
    predictions: np.ndarray | None
    equilibrium: EquilibriumActions


def _observation_run(net: NetworkInstance, decomp: Decomposition,
                     params: ModelParams, strategy: SenderStrategy,
                     gen: np.random.Generator, d_max: int):
    """Observer masks per signal on one network (class-appropriate seeding)."""
    budget = strategy.seed_budget(net.n)
    classes = signal_classes(strategy, params)
    masks = []
    for sig, pol, cls in zip(strategy.signals, strategy.seeding, classes):
        if cls is None:
            masks.append(np.zeros(net.n, dtype=bool))
            continue
        seeds = select_seeds(net, decomp, pol, budget, gen)
        share = sharer_mask(net, params, sig, strategy.sharing_rule)
        masks.append(spread(net, seeds, share))
    return masks


def _tally_observations(net, masks, d_max, counts, totals):
    dclip = np.minimum(net.degree, d_max)
    for ti in (0, 1):
        sel = net.node_type == ti
        totals[ti] += np.bincount(dclip[sel], minlength=d_max + 1)
    for si, mask in enumerate(masks):
        for ti in (0, 1):
            sel = (net.node_type == ti) & mask
            counts[si, ti] += np.bincount(dclip[sel], minlength=d_max + 1)


def estimate_observation_probs(params: ModelParams, strategy: SenderStrategy,
                               n: int, pilot_reps: int, rng: RngSpec,
                               d_max: int, edge_budget: float = 1e8) -> np.ndarray:
    """Ensemble observation probabilities from a pilot Monte Carlo."""
    counts = np.zeros((len(strategy.signals), 2, d_max + 1))
    totals = np.zeros((2, d_max + 1))
    for r in range(pilot_reps):
        spec = rng.child("pilot", r)
        net = sample_network(params, n, spec, edge_budget=edge_budget)
        decomp = decompose(net)
        masks = _observation_run(net, decomp, params, strategy,
                                 spec.stream("pilot-seeds"), d_max)
        _tally_observations(net, masks, d_max, counts, totals)
    with np.errstate(invalid="ignore"):
        probs = counts / totals
    return np.nan_to_num(probs, nan=0.0)


def theoretical_observation_probs(params: ModelParams, strategy: SenderStrategy,
                                  limits: LimitStats, d_max: int) -> np.ndarray:
    """Limiting observation probabilities by signal class: the giant-
    membership table for signals persuading both types, the believer-giant
    neighbour table for believer-only signals, zero otherwise."""
    classes = signal_classes(strategy, params)
    d = np.arange(d_max + 1)
    zeta = 1.0 - np.power.outer(limits.beta, d)
    zeta_hat = 1.0 - np.power.outer(limits.phi, d)
    out = np.zeros((len(classes), 2, d_max + 1))
    for si, cls in enumerate(classes):
        if cls is SignalClass.GOOD:
            out[si] = zeta
        elif cls is SignalClass.INT:
            out[si] = zeta_hat
    return out


def simulate_payoff(params: ModelParams, strategy: SenderStrategy, n: int,
                    reps: int, rng: RngSpec, pilot_reps: int = 200,
                    d_max: int = 64, limits: LimitStats | None = None,
                    observation: str = "pilot", edge_budget: float = 1e8,
                    threads: int = 1) -> SimulationReport:
    """Monte Carlo sender payoff at finite n.

    Receivers' empty-observation beliefs come from ensemble observation
    probabilities (they know the process, not the realisation): either a
    pilot ensemble on disjoint random streams (default) or the limiting
    tables.  Per replicate, a fresh network is drawn, the state and signal
    realised, seeds placed, the signal spread, and v(fraction acting 1)
    recorded, together with the signal-marginalised payoff of the network.
    """
    if n < 2 or reps < 1:
        raise ValueError("need n >= 2 and reps >= 1")
    if observation == "pilot":
        if pilot_reps < 1:
            raise ValueError("pilot observation estimation needs pilot_reps >= 1")
        obs = estimate_observation_probs(params, strategy, n, pilot_reps, rng,
                                         d_max, edge_budget)
    elif observation == "limits":
        if limits is None:
            raise ValueError("observation='limits' requires limit statistics")
        obs = theoretical_observation_probs(params, strategy, limits, d_max)
    else:
        raise ValueError("observation must be 'pilot' or 'limits'")
    eq = equilibrium(strategy, params, obs)
    v = params.payoff
    classes = signal_classes(strategy, params)
    sig_actions = eq.signal_actions

    def run_rep(rep: int):
        spec = rng.child("eval", rep)
        net = sample_network(params, n, spec, edge_budget=edge_budget)
        decomp = decompose(net)
        gen = spec.stream("realization")
        dclip = np.minimum(net.degree, d_max)
        empty_acts = eq.empty_actions[net.node_type, dclip]

        masks = _observation_run(net, decomp, params, strategy, gen, d_max)
        fractions = []
        for si, mask in enumerate(masks):
            a_h, a_l = sig_actions[si]
            acts = np.where(mask, np.where(net.node_type == 0, a_h, a_l), empty_acts)
            fractions.append(float(np.mean(acts)))
        frac_empty = float(np.mean(empty_acts))

        expected = 0.0
        for state, mu in ((1, params.mu_s1), (0, params.mu_s0)):
            pi = strategy.pi(state)
            expected += mu * float(np.dot(pi, [v(f) for f in fractions]))
            expected += mu * strategy.empty_prob(state) * v(frac_empty)

        state = 1 if gen.random() < params.mu_s1 else 0
        pi = strategy.pi(state)
        u = gen.random()
        cum = np.cumsum(pi)
        drawn = int(np.searchsorted(cum, u, side="right"))
        if drawn >= len(strategy.signals):  # empty signal realised
            row = ReplicateRow(rep, state, "empty", 0, frac_empty,
                               float(v(frac_empty)), expected)
        else:
            mask = masks[drawn]
            frac = fractions[drawn]
            row = ReplicateRow(rep, state, strategy.signals[drawn].label,
                               int(mask.sum()), frac, float(v(frac)), expected)
        counts_r = np.zeros((len(strategy.signals), 2, d_max + 1))
        totals_r = np.zeros((2, d_max + 1))
        _tally_observations(net, masks, d_max, counts_r, totals_r)
        return row, counts_r, totals_r

    results = [None] * reps
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for rep, res in enumerate(pool.map(run_rep, range(reps))):
                results[rep] = res
    else:
        for rep in range(reps):
            results[rep] = run_rep(rep)

    counts = np.zeros((len(strategy.signals), 2, d_max + 1))
    totals = np.zeros((2, d_max + 1))
    rows = []
    for rep in range(reps):
        row, counts_r, totals_r = results[rep]
        rows.append(row)
        counts += counts_r
        totals += totals_r

    with np.errstate(invalid="ignore"):
        fractions_tbl = counts / totals
    predictions = None
    if limits is not None:
        predictions = theoretical_observation_probs(params, strategy, limits, d_max)

    payoffs = np.array([r.payoff for r in rows])
    expecteds = np.array([r.payoff_expected for r in rows])

    def se(x):
        return float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0

    return SimulationReport(
        n=n, reps=reps,
        pilot_reps=pilot_reps if observation == "pilot" else 0,
        mean_payoff=float(math.fsum(payoffs) / reps), se_payoff=se(payoffs),
        mean_expected_payoff=float(math.fsum(expecteds) / reps),
        se_expected_payoff=se(expecteds),
        rows=tuple(rows),
        obs_counts=counts, obs_totals=totals, obs_fractions=fractions_tbl,
        predictions=predictions, equilibrium=eq,
    )
