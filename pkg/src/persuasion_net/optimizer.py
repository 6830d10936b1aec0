"""Limiting sender payoffs and strategy optimization.

The sender's limiting problem reduces to two non-empty signals: one at the
sceptic-indifference frontier (persuades everybody, travels the whole
giant component) and one at the believer-indifference frontier (persuades
only believers, travels the believer subnetwork).  Receivers who observe
nothing best-respond to the limiting observation probabilities; their
action flips where the empty-observation likelihood ratio crosses 1, so
the payoff is piecewise linear in the signal probabilities with kinks on
closed-form indifference loci.  The optimizer evaluates a grid plus every
locus (and both sides of it), then refines locally; a coarse full
four-parameter search over arbitrary two-signal structures serves as the
verification oracle.

The public-signal game is the same evaluator with all observation
probabilities equal to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .limits import A1Report, LimitStats, check_condition_a1, compute_limits
from .model import H, L, TYPE_INDEX, ModelParams, PayoffFn

_REL_TIE = 1e-12  # relative tie band matching the posterior tie-break


class InfeasibleStrategyError(ValueError):
    pass


@dataclass(frozen=True)
class ReducedStrategy:
    """Two-signal structure: a persuade-everybody signal (pi_s*) and a
    persuade-believers-only signal (pi_sp*)."""

    pi_s1: float
    pi_s0: float
    pi_sp1: float
    pi_sp0: float

    def as_tuple(self):
        return (self.pi_s1, self.pi_s0, self.pi_sp1, self.pi_sp0)

    @classmethod
    def checked(cls, params: ModelParams, pi_s1, pi_s0, pi_sp1, pi_sp0) -> "ReducedStrategy":
        s = cls(float(pi_s1), float(pi_s0), float(pi_sp1), float(pi_sp0))
        if any(not 0.0 <= x <= 1.0 for x in s.as_tuple()):
            raise InfeasibleStrategyError("signal probabilities must lie in [0, 1]")
        if s.pi_s1 + s.pi_sp1 > 1.0 + 1e-12 or s.pi_s0 + s.pi_sp0 > 1.0 + 1e-12:
            raise InfeasibleStrategyError("per-state signal probabilities exceed 1")
        if s.pi_s1 + s.pi_s0 > 0 and not _weak_geq(s.pi_s1 * params.mu_l1, s.pi_s0 * params.mu_l0):
            raise InfeasibleStrategyError("first signal must persuade sceptics")
        if s.pi_sp1 + s.pi_sp0 > 0:
            if not _weak_geq(s.pi_sp1 * params.mu_h1, s.pi_sp0 * params.mu_h0):
                raise InfeasibleStrategyError("second signal must persuade believers")
            if _weak_geq(s.pi_sp1 * params.mu_l1, s.pi_sp0 * params.mu_l0):
                raise InfeasibleStrategyError("second signal must not persuade sceptics")
        return s


def _weak_geq(a, b):
    return a >= b * (1.0 - _REL_TIE) - 1e-300


@dataclass(frozen=True)
class EvalTables:
    """Degree-weighted observation tables; the last column is the degree
    tail, carrying the d -> infinity limits and the residual mass."""

    w: np.ndarray         # (2, D+2) population weights gamma_t * p_d^t
    zeta: np.ndarray      # (2, D+2)
    zeta_hat: np.ndarray  # (2, D+2)
    d_max: int
    tail_mass: float


def build_tables(params: ModelParams, limits: LimitStats) -> EvalTables:
    d_max = limits.d_max
    w = np.zeros((2, d_max + 2))
    w[0, :-1] = params.gamma_h * limits.p_h.probs
    w[1, :-1] = params.gamma_l * limits.p_l.probs
    w[0, -1] = params.gamma_h * limits.p_h.tail_mass
    w[1, -1] = params.gamma_l * limits.p_l.tail_mass
    zeta = np.concatenate([limits.zeta, limits.zeta_sup()[:, None]], axis=1)
    zeta_hat = np.concatenate([limits.zeta_hat, limits.zeta_hat_sup()[:, None]], axis=1)
    tail = limits.p_h.tail_mass * params.gamma_h + limits.p_l.tail_mass * params.gamma_l
    return EvalTables(w=w, zeta=zeta, zeta_hat=zeta_hat, d_max=d_max, tail_mass=tail)


def public_tables(params: ModelParams, limits: LimitStats) -> EvalTables:
    """Everyone observes the realised signal: all observation probs are 1."""
    t = build_tables(params, limits)
    ones = np.ones_like(t.zeta)
    return EvalTables(w=t.w, zeta=ones, zeta_hat=ones, d_max=t.d_max,
                      tail_mass=t.tail_mass)


def _batch_values(params: ModelParams, tables: EvalTables, v: PayoffFn,
                  pi_s1, pi_s0, pi_sp1, pi_sp0, detail: bool = False):
    """Limiting payoff for a batch of strategies (arrays of equal length).

    Signals are classified point by point, so cap-branch corners where the
    second signal crosses into persuading sceptics are still evaluated
    correctly (it then spreads like a persuade-everybody signal).
    """
    pi_s1, pi_s0 = np.asarray(pi_s1, float), np.asarray(pi_s0, float)
    pi_sp1, pi_sp0 = np.asarray(pi_sp1, float), np.asarray(pi_sp0, float)
    out = np.empty(len(pi_s1))
    details = None
    # keep each (chunk, 2, d_max+2) temporary around 16 MB
    chunk = max(256, int(1e6 / (2 * tables.w.shape[1])) + 1)
    for lo in range(0, len(pi_s1), chunk):
        hi = min(lo + chunk, len(pi_s1))
        sl = slice(lo, hi)
        res = _chunk_values(params, tables, v, pi_s1[sl], pi_s0[sl],
                            pi_sp1[sl], pi_sp0[sl], detail)
        if detail:
            out[sl], details = res
        else:
            out[sl] = res
    return (out, details) if detail else out


def _classify_arrays(params, p1, p0):
    used = (p1 + p0) > 0.0
    good = used & _weak_geq(p1 * params.mu_l1, p0 * params.mu_l0)
    intm = used & ~good & _weak_geq(p1 * params.mu_h1, p0 * params.mu_h0)
    return good, intm


def _chunk_values(params, tables, v, pi_s1, pi_s0, pi_sp1, pi_sp0, detail):
    g = len(pi_s1)
    obs = []
    aobs = []
    for p1, p0 in ((pi_s1, pi_s0), (pi_sp1, pi_sp0)):
        good, intm = _classify_arrays(params, p1, p0)
        tbl = np.where(good[:, None, None], tables.zeta[None],
                       np.where(intm[:, None, None], tables.zeta_hat[None], 0.0))
        act = np.zeros((g, 2))
        act[:, 0] = good | intm   # believers persuaded by good and int signals
        act[:, 1] = good          # sceptics only by good ones
        obs.append(tbl)
        aobs.append(act)

    num = params_mu1(params)[None, :, None] * np.clip(
        1.0 - pi_s1[:, None, None] * obs[0] - pi_sp1[:, None, None] * obs[1], 0.0, None)
    den = params_mu0(params)[None, :, None] * np.clip(
        1.0 - pi_s0[:, None, None] * obs[0] - pi_sp0[:, None, None] * obs[1], 0.0, None)
    a_empty = (num >= den * (1.0 - 4.0 * _REL_TIE) - 1e-300).astype(float)

    x_empty = np.einsum("td,gtd->g", tables.w, a_empty)
    xs = []
    for k in (0, 1):
        inner = obs[k] * aobs[k][:, :, None] + (1.0 - obs[k]) * a_empty
        xs.append(np.einsum("td,gtd->g", tables.w, inner))

    pe1 = np.clip(1.0 - pi_s1 - pi_sp1, 0.0, None)
    pe0 = np.clip(1.0 - pi_s0 - pi_sp0, 0.0, None)
    vs, vsp, ve = v(xs[0]), v(xs[1]), v(x_empty)
    val = (params.mu_s1 * (pi_s1 * vs + pi_sp1 * vsp + pe1 * ve)
           + params.mu_s0 * (pi_s0 * vs + pi_sp0 * vsp + pe0 * ve))
    if detail:
        return val, {"x_good": xs[0], "x_int": xs[1], "x_empty": x_empty,
                     "a_empty": a_empty}
    return val


def params_mu1(params):
    return np.array([params.mu_h1, params.mu_l1])


def params_mu0(params):
    return np.array([params.mu_h0, params.mu_l0])


def limit_payoff_network(params: ModelParams, limits: LimitStats,
                         strategy: ReducedStrategy) -> float:
    """Limiting payoff of one feasible reduced strategy under network signals."""
    s = ReducedStrategy.checked(params, *strategy.as_tuple())
    tables = build_tables(params, limits)
    return float(_batch_values(params, tables, params.payoff,
                               *[np.array([x]) for x in s.as_tuple()])[0])


def limit_payoff_public(params: ModelParams, pi_good, pi_int,
                        limits: LimitStats | None = None) -> float:
    """Public-signal payoff: the network evaluator with observation
    probabilities identically one."""
    s = ReducedStrategy.checked(params, pi_good[0], pi_good[1], pi_int[0], pi_int[1])
    if limits is None:
        limits = compute_limits(params)
    tables = public_tables(params, limits)
    return float(_batch_values(params, tables, params.payoff,
                               *[np.array([x]) for x in s.as_tuple()])[0])


@dataclass(frozen=True)
class PayoffReport:
    value: float
    strategy: ReducedStrategy
    regime: str
    value_restricted: float
    value_full: float
    gap: float
    empty_actions: np.ndarray        # (2, d_max+2) at the argmax, tail column last
    tail_error_bound: float
    condition_a1: A1Report | None = None
    flags: tuple[str, ...] = ()
    closed_form: float | None = None
    mc_mean: float | None = None     # optional finite-n cross-check
    mc_se: float | None = None


def _loci_axis1(params, tables):
    """pi_s1 values where believers are indifferent upon observing nothing,
    on the restricted manifold (the pi_sp1 coefficient vanishes there)."""
    c_l = params.mu_l1 / params.mu_l0
    denom_base = params.mu_h1 - params.mu_h0 * c_l
    z = tables.zeta[TYPE_INDEX[H]]
    vals = []
    for zd in np.unique(z):
        if zd > 0:
            x = (params.mu_h1 - params.mu_h0) / (zd * denom_base)
            if 0.0 < x <= 1.0:
                vals.append(x)
    return vals


def _loci_axis2(params, tables):
    """pi_sp1 values where sceptics are indifferent upon observing nothing."""
    c_h = params.mu_h1 / params.mu_h0
    denom_base = params.mu_l0 * c_h - params.mu_l1
    zh = tables.zeta_hat[TYPE_INDEX[L]]
    vals = []
    for zd in np.unique(zh):
        if zd > 0:
            x = (params.mu_l0 - params.mu_l1) / (zd * denom_base)
            if 0.0 < x <= 1.0:
                vals.append(x)
    return vals


def _with_sides(vals):
    out = []
    for x in vals:
        out.extend((x, x - 1e-9, x + 1e-9))
    return out


def _axis(base, extra):
    ax = np.unique(np.clip(np.concatenate([base, np.asarray(extra, float)]), 0.0, 1.0))
    return ax


def _restricted_search(params, tables, v, grid_n, refine_iters):
    c_l = params.mu_l1 / params.mu_l0
    c_h = params.mu_h1 / params.mu_h0

    def evaluate(ax1, ax2):
        a1, a2 = np.meshgrid(ax1, ax2, indexing="ij")
        a1, a2 = a1.ravel(), a2.ravel()
        feas = a1 + a2 <= 1.0 + 1e-15
        a1, a2 = a1[feas], a2[feas]
        s0 = c_l * a1
        sp0 = np.minimum(c_h * a2, 1.0 - s0)
        vals = _batch_values(params, tables, v, a1, s0, a2, sp0)
        k = int(np.argmax(vals))
        return float(vals[k]), float(a1[k]), float(a2[k])

    base = np.linspace(0.0, 1.0, grid_n)
    ax1 = _axis(base, _with_sides(_loci_axis1(params, tables)) + [1.0])
    ax2 = _axis(base, _with_sides(_loci_axis2(params, tables)) + [1.0 / c_h, 1.0])
    # feasibility diagonal vertices
    ax2 = _axis(ax2, [1.0 - x for x in ax1 if 0.0 <= 1.0 - x <= 1.0][: 4 * grid_n])
    best, b1, b2 = evaluate(ax1, ax2)
    span = 1.0 / (grid_n - 1)
    for _ in range(refine_iters):
        lo1, hi1 = max(0.0, b1 - span), min(1.0, b1 + span)
        lo2, hi2 = max(0.0, b2 - span), min(1.0, b2 + span)
        cand = evaluate(np.linspace(lo1, hi1, 41), np.linspace(lo2, hi2, 41))
        if cand[0] > best:
            best, b1, b2 = cand
        span /= 10.0
    s0 = c_l * b1
    sp0 = min(c_h * b2, 1.0 - s0)
    return best, (b1, s0, b2, sp0)


def _full_search(params, tables, v, grid_n, refine_iters, seed_point):
    m = max(9, int(round(math.sqrt(grid_n))))

    def evaluate(axes, extra_points=()):
        grids = np.meshgrid(*axes, indexing="ij")
        cols = [g.ravel() for g in grids]
        pts = np.stack(cols, axis=1)
        if len(extra_points):
            pts = np.concatenate([pts, np.asarray(extra_points, float)], axis=0)
        feas = (pts[:, 0] + pts[:, 2] <= 1.0 + 1e-15) & (pts[:, 1] + pts[:, 3] <= 1.0 + 1e-15)
        pts = pts[feas]
        vals = _batch_values(params, tables, v, pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])
        k = int(np.argmax(vals))
        return float(vals[k]), pts[k]

    axes = [np.linspace(0.0, 1.0, m)] * 4
    best, bp = evaluate(axes, extra_points=[list(seed_point)])
    span = 1.0 / (m - 1)
    for _ in range(refine_iters):
        axes = [np.linspace(max(0.0, c - span), min(1.0, c + span), 9) for c in bp]
        cand = evaluate(axes, extra_points=[list(bp)])
        if cand[0] > best:
            best, bp = cand
        span /= 5.0
    return best, tuple(float(x) for x in bp)


def _optimize(params, tables, v, grid_n, refine_iters):
    r_val, r_pt = _restricted_search(params, tables, v, grid_n, refine_iters)
    f_val, f_pt = _full_search(params, tables, v, grid_n, refine_iters, r_pt)
    assert f_val >= r_val - 1e-9, "full-region oracle lost the restricted optimum"
    if f_val > r_val + 1e-12:
        value, pt, regime = f_val, f_pt, "full"
    else:
        value, pt, regime = r_val, r_pt, "restricted"
    _, detail = _batch_values(params, tables, v, *[np.array([x]) for x in pt],
                              detail=True)
    return value, pt, regime, r_val, f_val, detail["a_empty"][0]


def optimize_network(params: ModelParams, limits: LimitStats | None = None,
                     grid_n: int = 201, refine_iters: int = 3,
                     check_a1: bool = True) -> PayoffReport:
    """Maximise the limiting network-signal payoff over two-signal structures."""
    if limits is None:
        limits = compute_limits(params)
    tables = build_tables(params, limits)
    flags = []
    a1 = None
    if check_a1:
        a1 = check_condition_a1(params, limits)
        if not a1.holds:
            flags.append("condition_a1_violated: limiting optimum may be unattainable "
                         "without seeding outside the giant component")
    value, pt, regime, r_val, f_val, a_empty = _optimize(
        params, tables, params.payoff, grid_n, refine_iters)
    v = params.payoff
    bound = tables.tail_mass * abs(v(1.0) - v(0.0))
    return PayoffReport(
        value=value, strategy=ReducedStrategy(*pt), regime=regime,
        value_restricted=r_val, value_full=f_val, gap=f_val - r_val,
        empty_actions=a_empty, tail_error_bound=float(bound),
        condition_a1=a1, flags=tuple(flags),
    )


def optimize_public(params: ModelParams, limits: LimitStats | None = None,
                    grid_n: int = 201, refine_iters: int = 3) -> PayoffReport:
    """Maximise the public-signal payoff; for the voting payoff the known
    closed form is returned and the numeric search is checked against it."""
    if limits is None:
        limits = compute_limits(params)
    tables = public_tables(params, limits)
    value, pt, regime, r_val, f_val, a_empty = _optimize(
        params, tables, params.payoff, grid_n, refine_iters)
    closed = None
    flags = []
    v = params.payoff
    if v.kind == "step" and v.x_bar > params.gamma_h:
        closed = params.mu_s1 + params.mu_s0 * params.mu_l1 / params.mu_l0
        if abs(value - closed) > 1e-9:
            raise RuntimeError(
                f"public optimizer value {value!r} disagrees with the voting "
                f"closed form {closed!r}")
        value = closed
    bound = tables.tail_mass * abs(v(1.0) - v(0.0))
    return PayoffReport(
        value=value, strategy=ReducedStrategy(*pt), regime=regime,
        value_restricted=r_val, value_full=f_val, gap=f_val - r_val,
        empty_actions=a_empty, tail_error_bound=float(bound),
        closed_form=closed, flags=tuple(flags),
    )


@dataclass(frozen=True)
class CompareReport:
    v_net: PayoffReport
    v_pub: PayoffReport
    gap: float                      # network minus public
    hypotheses: dict
    verdicts: dict
    flags: tuple[str, ...] = ()


def compare(params: ModelParams, limits: LimitStats | None = None,
            grid_n: int = 201, refine_iters: int = 3) -> CompareReport:
    """Run both optimizers and check which comparative predictions apply."""
    from .limits import Connectedness, compute_d_vote, is_more_connected

    if limits is None:
        limits = compute_limits(params)
    net = optimize_network(params, limits, grid_n, refine_iters)
    pub = optimize_public(params, limits, grid_n, refine_iters)
    gap = net.value - pub.value

    verdict = is_more_connected(params)
    baseline = params.f_h == params.f_l and params.q == 1.0
    homophily_cond = (
        not math.isnan(limits.q_h)
        and limits.q_h >= 1.0 - limits.q_l - 1e-12
        and verdict in (Connectedness.H_MORE, Connectedness.EQUAL)
    )
    hypotheses = {
        "baseline": baseline,
        "h_weakly_more_connected": verdict.value,
        "q_h_ge_1_minus_q_l": (not math.isnan(limits.q_h)
                               and limits.q_h >= 1.0 - limits.q_l - 1e-12),
        "homophily_prop_applicable": homophily_cond and params.payoff.convex,
        "baseline_prop_applicable": baseline and params.payoff.convex,
        "c_hat_positive": limits.c_hat > 0.0,
    }
    verdicts = {}
    if hypotheses["baseline_prop_applicable"] or hypotheses["homophily_prop_applicable"]:
        verdicts["public_weakly_preferred"] = bool(gap <= 1e-6)
    if params.payoff.kind == "step":
        x_bar = params.payoff.x_bar
        d_vote = compute_d_vote(params, limits)
        tail_needed = x_bar - params.gamma_h
        pl = limits.p_l.probs
        if math.isinf(d_vote):
            necessary = 0.0 >= tail_needed
            sufficient = False
        else:
            zs = 1.0 - limits.phi[TYPE_INDEX[L]] ** np.arange(len(pl))
            necessary = params.gamma_l * float(pl[d_vote:].sum()) >= tail_needed
            sufficient = params.gamma_l * float(
                (pl[d_vote + 1:] * (1.0 - zs[d_vote + 1:])).sum()) > tail_needed
        hypotheses["d_vote"] = d_vote
        hypotheses["voting_necessary"] = bool(necessary)
        hypotheses["voting_sufficient"] = bool(sufficient)
        if limits.c_hat == 0.0:
            verdicts["voting_public_preferred_when_no_believer_giant"] = bool(gap <= 1e-6)
        if gap > 1e-9:
            verdicts["voting_necessary_holds_given_network_win"] = bool(necessary)
    return CompareReport(v_net=net, v_pub=pub, gap=gap,
                         hypotheses=hypotheses, verdicts=verdicts)
