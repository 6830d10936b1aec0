"""Limiting network statistics of the two-type inhomogeneous random graph.

Nodes carry a type t in {h, l} and a connectedness lambda; a pair is linked
with probability min(lambda_i*lambda_j/n, 1), damped by the homophily
factor q for cross-type pairs.  As n grows the degree of a (t, lambda)
node converges to Poisson with intensity

    D(t, lambda) = lambda * (gamma_t*E_t + q*gamma_t'*E_t'),

and local neighbourhoods converge to a two-type branching process.  This
module computes, in closed form or by fixed-point iteration:

* per-type degree laws p_d^t and their forward (size-biased) versions,
* the same-type neighbour probabilities q_h, q_l,
* survival probabilities rho(t, lambda) of the branching process, i.e.
  the probability that a (t, lambda) node lies on the giant component,
* zeta(t, d)      -- probability a type-t degree-d node is on the giant
  component L1; equals 1 - beta_t^d for a child-extinction ratio beta_t,
* zeta_hat(t, d)  -- probability such a node has a neighbour on the giant
  component of the believer subnetwork (sceptics' connectedness zeroed),
* the giant fractions c = lim |L1|/n and c_hat = lim |L_hat_1|/n,
* the knife-edge check (condition A1) and the voting degree threshold.

The exponential fixed-point form for rho is validated against direct
Poisson summation of the d-indexed system in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import poisson

from .model import H, L, TYPES, TYPE_INDEX, FiniteDist, ModelParams
from .rng import RngSpec


class SolverError(RuntimeError):
    """Fixed-point iteration failed to reach tolerance; carries the last iterate."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class Connectedness(Enum):
    H_MORE = "HMore"
    L_MORE = "LMore"
    EQUAL = "Equal"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class DegreeDist:
    """Probabilities for degrees 0..d_max plus the residual tail mass."""

    probs: np.ndarray
    tail_mass: float

    def __post_init__(self):
        if np.any(self.probs < -1e-15):
            raise ValueError("negative degree probability")
        total = float(self.probs.sum()) + self.tail_mass
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"degree probabilities sum to {total}, not 1")

    @property
    def d_max(self) -> int:
        return len(self.probs) - 1

    def mean(self) -> float:
        d = np.arange(len(self.probs))
        return float(np.dot(d, self.probs))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)


def poisson_intensities(params: ModelParams) -> dict[tuple[str, float], float]:
    """Expected degree D(t, lambda) for every atom of the connectedness laws."""
    e = {H: params.f_h.mean(), L: params.f_l.mean()}
    out = {}
    for t in TYPES:
        t2 = L if t == H else H
        rate = params.gamma(t) * e[t] + params.q * params.gamma(t2) * e[t2]
        for lam in params.f(t).lam:
            out[(t, lam)] = lam * rate
    return out


def same_type_neighbor_probs(params: ModelParams) -> tuple[float, float]:
    """(q_h, q_l): limiting probability that a neighbour shares the node's type."""
    eh, el = params.f_h.mean(), params.f_l.mean()
    den_h = eh * params.gamma_h + el * params.gamma_l * params.q
    den_l = el * params.gamma_l + eh * params.gamma_h * params.q
    q_h = eh * params.gamma_h / den_h if den_h > 0 else float("nan")
    q_l = el * params.gamma_l / den_l if den_l > 0 else float("nan")
    return q_h, q_l


def _mixture_pmf(dist: FiniteDist, intensities, d: np.ndarray) -> np.ndarray:
    out = np.zeros(len(d))
    for lam, p in dist.pairs():
        out += p * poisson.pmf(d, intensities[lam])
    return out


def _mixture_tail(dist: FiniteDist, intensities, d_max: int) -> float:
    return float(sum(p * poisson.sf(d_max, intensities[lam]) for lam, p in dist.pairs()))


@dataclass(frozen=True)
class DegreeLaws:
    p_h: DegreeDist
    p_l: DegreeDist
    q_h: float
    q_l: float
    D: dict[tuple[str, float], float]
    degenerate: bool


def compute_degree_dists(params: ModelParams, tail_cutoff: float = 1e-9,
                         d_max_floor: int = 64) -> DegreeLaws:
    """Per-type limiting degree laws, truncated at the smallest d_max (>= floor)
    whose tail mass is below the cutoff for both types."""
    if not 0.0 < tail_cutoff <= 1e-3:
        raise ValueError("tail_cutoff must lie in (0, 1e-3]")
    intens = poisson_intensities(params)
    q_h, q_l = same_type_neighbor_probs(params)
    degenerate = all(v == 0.0 for v in intens.values())
    if degenerate:
        probs = np.zeros(d_max_floor + 1)
        probs[0] = 1.0
        dist = DegreeDist(probs, 0.0)
        return DegreeLaws(dist, dist, q_h, q_l, intens, True)

    by_type = {t: {lam: intens[(t, lam)] for lam in params.f(t).lam} for t in TYPES}

    def tails_ok(d):
        return all(_mixture_tail(params.f(t), by_type[t], d) < tail_cutoff for t in TYPES)

    lo, hi = d_max_floor, d_max_floor
    while not tails_ok(hi):
        lo, hi = hi + 1, hi * 2
    while lo < hi:  # smallest qualifying d_max
        mid = (lo + hi) // 2
        if tails_ok(mid):
            hi = mid
        else:
            lo = mid + 1
    d_max = hi

    d = np.arange(d_max + 1)
    dists = {}
    for t in TYPES:
        probs = _mixture_pmf(params.f(t), by_type[t], d)
        dists[t] = DegreeDist(probs, _mixture_tail(params.f(t), by_type[t], d_max))
    return DegreeLaws(dists[H], dists[L], q_h, q_l, intens, False)


def forward_dist(p: DegreeDist) -> DegreeDist:
    """Degree law of a uniformly chosen neighbour: p~_d = p_{d+1}(d+1)/mean."""
    mean = p.mean()
    if mean <= 0.0:
        raise ValueError("forward distribution undefined: zero mean degree")
    d = np.arange(1, len(p.probs))
    probs = p.probs[1:] * d / mean
    tail = max(0.0, 1.0 - float(probs.sum()))
    return DegreeDist(probs, tail)


def _fosd(cdf_a: np.ndarray, cdf_b: np.ndarray, tol: float) -> bool:
    """True if the law with cdf_a first-order stochastically dominates cdf_b."""
    n = min(len(cdf_a), len(cdf_b))
    return bool(np.all(cdf_a[:n] <= cdf_b[:n] + tol))


def is_more_connected(params: ModelParams, tail_cutoff: float = 1e-9,
                      tol: float = 1e-10) -> Connectedness:
    """Order the two types by degree (and, when needed, forward-degree) dominance."""
    laws = compute_degree_dists(params, tail_cutoff)
    if laws.degenerate:
        return Connectedness.EQUAL
    ph, pl = laws.p_h, laws.p_l
    if np.max(np.abs(ph.probs - pl.probs)) < tol:
        return Connectedness.EQUAL
    ch, cl = ph.cdf(), pl.cdf()
    need_forward = abs(laws.q_h - (1.0 - laws.q_l)) > 1e-12
    h_dom = _fosd(ch, cl, tol)
    l_dom = _fosd(cl, ch, tol)
    if need_forward and (h_dom or l_dom):
        try:
            fh, fl = forward_dist(ph).cdf(), forward_dist(pl).cdf()
        except ValueError:
            return Connectedness.INCOMPARABLE
        h_dom = h_dom and _fosd(fh, fl, tol)
        l_dom = l_dom and _fosd(fl, fh, tol)
    if h_dom and not l_dom:
        return Connectedness.H_MORE
    if l_dom and not h_dom:
        return Connectedness.L_MORE
    return Connectedness.INCOMPARABLE


# ---------------------------------------------------------------------------
# Branching-process fixed points


def _offspring_matrix(params: ModelParams) -> np.ndarray:
    """Mean offspring counts M[t, t'] of the forward (size-biased) process."""
    m = np.zeros((2, 2))
    stats = {t: (params.f(t).mean(), params.f(t).moment2(), params.gamma(t)) for t in TYPES}
    for t in TYPES:
        e_t, m2_t, _ = stats[t]
        if e_t <= 0.0:
            continue
        ratio = m2_t / e_t  # mean connectedness of a type-t child
        for t2 in TYPES:
            e_2, _, g_2 = stats[t2]
            cross = 1.0 if t == t2 else params.q
            m[TYPE_INDEX[t], TYPE_INDEX[t2]] = ratio * g_2 * e_2 * cross
    return m


def _spectral_radius_2x2(m: np.ndarray) -> float:
    tr = m[0, 0] + m[1, 1]
    disc = (m[0, 0] - m[1, 1]) ** 2 + 4.0 * m[0, 1] * m[1, 0]
    return (tr + math.sqrt(max(disc, 0.0))) / 2.0


def solve_rho(params: ModelParams, tol: float = 1e-12,
              max_iter: int = 200000) -> dict[tuple[str, float], float]:
    """Survival probabilities rho(t, lambda): the maximal solution of

        rho(t,lam) = 1 - exp(-lam * [gamma_t * sum_l' f_t(l') l' rho(t,l')
                                     + q * gamma_t' * sum_l' f_t'(l') l' rho(t',l')])

    Iteration starts from all ones (so it converges to the maximal fixed
    point, monotonically from above).  Sub/critical kernels -- offspring
    matrix with spectral radius <= 1 -- die out almost surely and return
    zeros without iterating.
    """
    # values within 1e-12 of the critical point count as critical: their
    # survival probability would sit below the solver's resolution anyway,
    # and the plain iteration slows to a crawl there
    if _spectral_radius_2x2(_offspring_matrix(params)) <= 1.0 + 1e-12:
        return {(t, lam): 0.0 for t in TYPES for lam in params.f(t).lam}

    lam_arr = {t: np.array(params.f(t).lam) for t in TYPES}
    p_arr = {t: np.array(params.f(t).prob) for t in TYPES}
    g = {t: params.gamma(t) for t in TYPES}
    x = {t: np.ones(len(lam_arr[t])) for t in TYPES}

    for _ in range(max_iter):
        s = {t: float(np.dot(p_arr[t] * lam_arr[t], x[t])) for t in TYPES}
        new = {}
        delta = 0.0
        for t in TYPES:
            t2 = L if t == H else H
            drive = g[t] * s[t] + params.q * g[t2] * s[t2]
            nx = 1.0 - np.exp(-lam_arr[t] * drive)
            delta = max(delta, float(np.max(np.abs(nx - x[t]))) if len(nx) else 0.0)
            new[t] = nx
        x = new
        if delta < tol:
            return {(t, lam): float(v) for t in TYPES
                    for lam, v in zip(lam_arr[t], x[t])}
    raise SolverError(
        f"rho fixed point did not converge within {max_iter} iterations",
        last_iterate={(t, lam): float(v) for t in TYPES for lam, v in zip(lam_arr[t], x[t])},
        residual=delta,
    )


def _child_extinction(params: ModelParams, rho: dict) -> np.ndarray:
    """beta_t: probability the branch through a random neighbour of a type-t
    node dies out.  zeta(t, d) = 1 - beta_t^d."""
    beta = np.ones(2)
    e = {t: params.f(t).mean() for t in TYPES}
    for t in TYPES:
        t2 = L if t == H else H
        den = params.gamma(t) * e[t] + params.q * params.gamma(t2) * e[t2]
        if den <= 0.0:
            continue  # no expected edges: beta stays 1, zeta identically 0
        num = sum((1.0 - rho[(t, lam)]) * params.gamma(t) * p * lam
                  for lam, p in params.f(t).pairs())
        num += sum((1.0 - rho[(t2, lam)]) * params.q * params.gamma(t2) * p * lam
                   for lam, p in params.f(t2).pairs())
        beta[TYPE_INDEX[t]] = num / den
    return beta


def compute_zeta(params: ModelParams, rho: dict, d_max: int) -> np.ndarray:
    """zeta[t, d] for d = 0..d_max: probability of lying on the giant component."""
    beta = _child_extinction(params, rho)
    d = np.arange(d_max + 1)
    return 1.0 - np.power.outer(beta, d)


@dataclass(frozen=True)
class BelieverGiant:
    """Giant structure of the believer subnetwork (sceptics' lambda zeroed)."""

    rho_hat_h: dict[float, float]   # survival by believer connectedness
    beta_hat: float                 # believer-to-believer child extinction
    phi: np.ndarray                 # per type: 1 - p_t*(1-beta_hat)
    zeta_hat: np.ndarray            # zeta_hat[t, d] = 1 - phi_t^d
    c_hat: float


def solve_zeta_hat(params: ModelParams, tol: float = 1e-12, d_max: int = 64,
                   max_iter: int = 200000) -> BelieverGiant:
    """Neighbour-of-believer-giant probabilities.

    The believer subnetwork is the network with sceptics' connectedness set
    to zero, so its survival fixed point only involves f_h and gamma_h.
    With beta_hat the believer-kernel child extinction ratio and p_t the
    probability that a neighbour of a type-t node is a believer (q_h for
    believers, 1 - q_l for sceptics), the binomial mixture over believer
    neighbours collapses to zeta_hat(t, d) = 1 - (1 - p_t*(1-beta_hat))^d.
    """
    lam = np.array(params.f_h.lam)
    pr = np.array(params.f_h.prob)
    e_h = params.f_h.mean()
    d = np.arange(d_max + 1)

    def all_zero():
        rho_hat = {float(x): 0.0 for x in lam}
        phi = np.ones(2)
        return BelieverGiant(rho_hat, 1.0, phi, np.zeros((2, d_max + 1)), 0.0)

    # same 1e-12 criticality margin as in solve_rho
    if e_h <= 0.0 or params.gamma_h * params.f_h.moment2() <= 1.0 + 1e-12:
        return all_zero()

    x = np.ones(len(lam))
    delta = math.inf
    for _ in range(max_iter):
        drive = params.gamma_h * float(np.dot(pr * lam, x))
        nx = 1.0 - np.exp(-lam * drive)
        delta = float(np.max(np.abs(nx - x)))
        x = nx
        if delta < tol:
            break
    else:
        raise SolverError(
            f"believer-subnetwork fixed point did not converge within {max_iter} iterations",
            last_iterate=dict(zip(map(float, lam), map(float, x))),
            residual=delta,
        )

    beta_hat = float(np.dot(pr * lam, 1.0 - x)) / e_h
    q_h, q_l = same_type_neighbor_probs(params)
    p_t = np.array([q_h, 1.0 - q_l])
    phi = 1.0 - p_t * (1.0 - beta_hat)
    zeta_hat = 1.0 - np.power.outer(phi, d)
    c_hat = params.gamma_h * float(np.dot(pr, x))
    return BelieverGiant(dict(zip(map(float, lam), map(float, x))), beta_hat,
                         phi, zeta_hat, c_hat)


def giant_fraction(params: ModelParams, rho: dict) -> float:
    """c = lim |L1|/n = sum_t gamma_t sum_lam f_t(lam) rho(t, lam)."""
    return float(sum(params.gamma(t) * p * rho[(t, lam)]
                     for t in TYPES for lam, p in params.f(t).pairs()))


@dataclass(frozen=True)
class LimitStats:
    """All limiting statistics needed by the evaluators and scenarios."""

    p_h: DegreeDist
    p_l: DegreeDist
    fwd_h: DegreeDist | None
    fwd_l: DegreeDist | None
    q_h: float
    q_l: float
    D: dict[tuple[str, float], float]
    rho: dict[tuple[str, float], float]
    rho_hat_h: dict[float, float]
    beta: np.ndarray        # child extinction per type; zeta = 1 - beta^d
    beta_hat: float
    phi: np.ndarray         # believer-neighbour miss ratio; zeta_hat = 1 - phi^d
    zeta: np.ndarray        # (2, d_max+1)
    zeta_hat: np.ndarray    # (2, d_max+1)
    c: float
    c_hat: float
    d_max: int
    degenerate: bool

    def p(self, t: str) -> DegreeDist:
        return self.p_h if t == H else self.p_l

    def zeta_of(self, t: str, d: int) -> float:
        b = self.beta[TYPE_INDEX[t]]
        return float(1.0 - b**d)

    def zeta_hat_of(self, t: str, d: int) -> float:
        f = self.phi[TYPE_INDEX[t]]
        return float(1.0 - f**d)

    def zeta_sup(self) -> np.ndarray:
        """d -> infinity limit of zeta per type."""
        return np.where(self.beta < 1.0, 1.0, 0.0)

    def zeta_hat_sup(self) -> np.ndarray:
        return np.where(self.phi < 1.0, 1.0, 0.0)


def compute_limits(params: ModelParams, tail_cutoff: float = 1e-9,
                   tol: float = 1e-12, max_iter: int = 200000,
                   d_max_floor: int = 64) -> LimitStats:
    """Run the full limiting pipeline for one parameterisation."""
    laws = compute_degree_dists(params, tail_cutoff, d_max_floor)
    d_max = laws.p_h.d_max
    try:
        fwd_h = forward_dist(laws.p_h)
    except ValueError:
        fwd_h = None
    try:
        fwd_l = forward_dist(laws.p_l)
    except ValueError:
        fwd_l = None
    rho = solve_rho(params, tol=tol, max_iter=max_iter)
    beta = _child_extinction(params, rho)
    zeta = compute_zeta(params, rho, d_max)
    bg = solve_zeta_hat(params, tol=tol, d_max=d_max, max_iter=max_iter)
    return LimitStats(
        p_h=laws.p_h, p_l=laws.p_l, fwd_h=fwd_h, fwd_l=fwd_l,
        q_h=laws.q_h, q_l=laws.q_l, D=laws.D, rho=rho,
        rho_hat_h=bg.rho_hat_h, beta=beta, beta_hat=bg.beta_hat, phi=bg.phi,
        zeta=zeta, zeta_hat=bg.zeta_hat,
        c=giant_fraction(params, rho), c_hat=bg.c_hat,
        d_max=d_max, degenerate=laws.degenerate,
    )


# ---------------------------------------------------------------------------
# Knife-edge condition and the voting threshold


def _empty_ratio(params: ModelParams, zh) -> np.ndarray:
    """Likelihood ratio for the empty observation of a sceptic whose chance
    of seeing a maximal believer-only signal is zh."""
    zh = np.asarray(zh, dtype=float)
    odds_l = params.mu_l1 / params.mu_l0
    k = params.mu_h0 / params.mu_h1
    with np.errstate(divide="ignore", invalid="ignore"):
        out = odds_l * (1.0 - k * zh) / (1.0 - zh)
    return np.where(zh >= 1.0, np.inf, out)


@dataclass(frozen=True)
class A1Report:
    holds: bool
    offending: list[int]
    excluded: list[int]


def check_condition_a1(params: ModelParams, limits: LimitStats,
                       d_max: int | None = None, tol: float = 1e-9) -> A1Report:
    """No degree may sit exactly on the sceptic empty-observation knife edge.

    The condition is a measure-zero equality; degrees within ``tol`` of the
    knife edge are reported rather than failed, and degrees with
    zeta_hat(l, d) = 1 (undefined ratio) are listed as excluded.
    """
    d_max = limits.d_max if d_max is None else d_max
    zh = 1.0 - limits.phi[TYPE_INDEX[L]] ** np.arange(d_max + 1)
    offending, excluded = [], []
    for d in range(d_max + 1):
        if zh[d] >= 1.0:
            excluded.append(d)
            continue
        ratio = float(_empty_ratio(params, zh[d]))
        if abs(ratio - 1.0) < tol:
            offending.append(d)
    return A1Report(holds=not offending, offending=offending, excluded=excluded)


def compute_d_vote(params: ModelParams, limits: LimitStats):
    """Smallest degree at which a sceptic observing nothing still acts 1,
    against a maximal believer-only signal; infinity if no degree qualifies."""
    odds_l = params.mu_l1 / params.mu_l0
    k = params.mu_h0 / params.mu_h1
    phi_l = limits.phi[TYPE_INDEX[L]]
    for d in range(limits.d_max + 1):
        zh = 1.0 - phi_l**d
        if _empty_ratio(params, zh) >= 1.0:
            return d
    # table exhausted: decide via the monotone limit sup_d zeta_hat(l, d)
    if phi_l >= 1.0:  # zeta_hat identically 0
        return math.inf
    # the ratio is increasing in zeta_hat; threshold where it crosses 1:
    z_star = (1.0 - odds_l) / (1.0 - odds_l * k)
    if z_star >= 1.0:
        return math.inf
    d = max(limits.d_max + 1, int(math.ceil(math.log1p(-z_star) / math.log(phi_l))) - 2)
    while _empty_ratio(params, 1.0 - phi_l**d) < 1.0:
        d += 1
    while d > 0 and _empty_ratio(params, 1.0 - phi_l ** (d - 1)) >= 1.0:
        d -= 1
    return d


# ---------------------------------------------------------------------------
# Branching-process Monte Carlo (local component-size law)


@dataclass(frozen=True)
class BranchingSizeDist:
    """Estimated component-size law of the local branching approximation."""

    probs: np.ndarray       # probs[m] for total size m, m = 1..m_max (index 0 unused)
    se: np.ndarray
    overflow: float         # mass of sizes exceeding m_max (incl. survival)
    samples: int


def branching_size_dist(params: ModelParams, t: str, d: int, lam: float,
                        m_max: int, samples: int, rng: RngSpec,
                        chunk: int = 8192) -> BranchingSizeDist:
    """Monte Carlo of the local branching process rooted at a type-t node
    with connectedness lam, conditioned on d first-generation offspring.

    Given the root's offspring count, offspring classes follow the forward
    multinomial, so the law depends on (t, d) only; lam is part of the
    conditioning event and kept for the caller's bookkeeping.  Sizes above
    m_max are censored into the overflow bucket; chunked streams keep the
    result independent of scheduling.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    intens = poisson_intensities(params)
    classes = [(t2, lam2) for t2 in TYPES for lam2 in params.f(t2).lam]
    rates = np.array([intens[c] for c in classes])
    # forward class probabilities, conditional on the parent's type
    child_probs = {}
    for tp in TYPES:
        w = np.array([
            params.gamma(t2) * dict(params.f(t2).pairs())[lam2] * lam2
            * (1.0 if t2 == tp else params.q)
            for (t2, lam2) in classes
        ])
        total = w.sum()
        child_probs[tp] = w / total if total > 0 else w
    parent_type = [c[0] for c in classes]

    counts = np.zeros(m_max + 2, dtype=np.int64)  # index m, last = overflow
    done = 0
    chunk_idx = 0
    while done < samples:
        k = min(chunk, samples - done)
        gen = rng.stream("branching", chunk_idx)
        chunk_idx += 1
        done += k

        active = gen.multinomial(d, child_probs[t], size=k) if d > 0 else np.zeros(
            (k, len(classes)), dtype=np.int64)
        size = np.full(k, 1 + d, dtype=np.int64)
        alive = active.sum(axis=1) > 0
        alive &= size <= m_max
        counts[m_max + 1] += int(np.count_nonzero(size > m_max))

        while np.any(alive):
            idx = np.flatnonzero(alive)
            new = np.zeros((len(idx), len(classes)), dtype=np.int64)
            born = np.zeros(len(idx), dtype=np.int64)
            for j in range(len(classes)):
                nj = active[idx, j]
                if not nj.any():
                    continue
                m = gen.poisson(nj * rates[j])
                born += m
                if m.any():
                    new += gen.multinomial(m, child_probs[parent_type[j]])
            size[idx] += born
            active[idx] = new
            over = size[idx] > m_max
            counts[m_max + 1] += int(np.count_nonzero(over))
            still = (new.sum(axis=1) > 0) & ~over
            alive[:] = False
            alive[idx[still]] = True

        finished = (size <= m_max)
        np.add.at(counts, size[finished], 1)

    probs = counts[: m_max + 1] / samples
    probs[0] = 0.0
    se = np.sqrt(np.maximum(probs * (1.0 - probs), 0.0) / samples)
    return BranchingSizeDist(probs=probs, se=se,
                             overflow=float(counts[m_max + 1] / samples),
                             samples=samples)
