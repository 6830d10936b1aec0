"""Built-in invariant suite behind `persuasion-net selftest`.

Quick cross-checks of the load-bearing identities; one PASS/FAIL line per
check, exit status 2 on any failure.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import binom

from . import _kernels
from ._kernels import _fallback
from .diffusion import Signal, sharer_mask, spread
from .limits import compute_limits
from .model import FiniteDist, ModelParams, PayoffFn
from .netgen import sample_network
from .rng import RngSpec
from .scenarios import island_params
from .optimizer import optimize_public


def _bisect(f, lo, hi, it=200):
    for _ in range(it):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _check_kernel_parity():
    params = island_params(1.3, q=0.7)
    net = sample_network(params, 400, RngSpec(7))
    carrier = np.ones(net.n, dtype=np.uint8)
    la, ca = _kernels.components_labels(net.indptr, net.indices, carrier)
    lb, cb = _fallback.components_labels(net.indptr, net.indices, carrier)
    if ca != cb:
        return False
    # same partition (labels may differ): compare via canonical pair keys
    for lab in (la, lb):
        if np.any(lab < 0):
            return False
    pairs_a = {tuple(sorted(np.flatnonzero(la == k))) for k in range(ca)}
    pairs_b = {tuple(sorted(np.flatnonzero(lb == k))) for k in range(cb)}
    if pairs_a != pairs_b:
        return False
    seeds = np.array([0, 5], dtype=np.int64)
    share = (net.node_type == 0).astype(np.uint8)
    oa = _kernels.spread_observed(net.indptr, net.indices, seeds, share)
    ob = _fallback.spread_observed(net.indptr, net.indices, seeds, share)
    return bool(np.array_equal(oa, ob))


def _check_giant_fixed_point():
    params = island_params(math.sqrt(2.0))
    limits = compute_limits(params)
    oracle = _bisect(lambda x: x - (1.0 - math.exp(-2.0 * x)), 1e-9, 1.0)
    return abs(limits.c - oracle) < 1e-10


def _check_zeta_hat_binomial():
    params = island_params(math.sqrt(3.0), q=0.6)
    limits = compute_limits(params)
    for ti, p_t in ((0, limits.q_h), (1, 1.0 - limits.q_l)):
        for d in (0, 1, 3, 9):
            direct = sum(binom.pmf(k, d, p_t) * (1.0 - limits.beta_hat**k)
                         for k in range(d + 1))
            if abs(direct - limits.zeta_hat[ti, d]) > 1e-12:
                return False
    return True


def _check_spread_hand_cases():
    # path h-h-l, believer-only signal, seed at one end: all three observe
    import numpy as np

    from .netgen import NetworkInstance

    def path(types):
        n = len(types)
        src = np.arange(n - 1, dtype=np.int64)
        dst = src + 1
        rows = np.concatenate([src, dst])
        cols = np.concatenate([dst, src])
        order = np.lexsort((cols, rows))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return NetworkInstance(n=n, node_type=np.array(types, dtype=np.uint8),
                               node_lambda=np.ones(n), indptr=indptr,
                               indices=cols[order].astype(np.int32))

    params = island_params(1.0)
    sig = Signal("int", 0.5, 0.5)  # uninformative: persuades believers only
    net1 = path([0, 0, 1])
    obs1 = spread(net1, np.array([0]), sharer_mask(net1, params, sig))
    net2 = path([0, 1, 0])
    obs2 = spread(net2, np.array([0]), sharer_mask(net2, params, sig))
    return obs1.tolist() == [True, True, True] and obs2.tolist() == [True, True, False]


def _check_voting_closed_form():
    params = island_params(math.sqrt(3.0), payoff=PayoffFn.step(0.52))
    rep = optimize_public(params)
    return rep.closed_form is not None and abs(rep.value - rep.closed_form) <= 1e-9


def _check_determinism():
    params = ModelParams(gamma_h=0.4, mu_h1=0.7, mu_l1=0.3, mu_s1=0.5, q=0.8,
                         f_h=FiniteDist.from_pairs([(0.5, 0.5), (2.0, 0.5)]),
                         f_l=FiniteDist.point(1.0))
    a = sample_network(params, 500, RngSpec(123))
    b = sample_network(params, 500, RngSpec(123))
    return (np.array_equal(a.indices, b.indices)
            and np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.node_type, b.node_type))


CHECKS = [
    ("kernel_backend_parity", _check_kernel_parity),
    ("giant_fixed_point_vs_bisection", _check_giant_fixed_point),
    ("zeta_hat_binomial_identity", _check_zeta_hat_binomial),
    ("spread_hand_cases", _check_spread_hand_cases),
    ("voting_public_closed_form", _check_voting_closed_form),
    ("sampling_determinism", _check_determinism),
]


def run() -> int:
    failures = 0
    print(f"kernel backend: {_kernels.BACKEND}")
    for name, fn in CHECKS:
        try:
            ok = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            print(f"FAIL {name} ({type(exc).__name__}: {exc})")
            failures += 1
            continue
        print(("PASS" if ok else "FAIL") + f" {name}")
        failures += 0 if ok else 1
    return 0 if failures == 0 else 2
