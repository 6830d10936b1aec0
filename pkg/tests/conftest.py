import math

import numpy as np
import pytest

from persuasion_net.model import FiniteDist, ModelParams, PayoffFn
from persuasion_net.netgen import NetworkInstance


def bisect_root(f, lo, hi, it=200):
    """Sign-change bisection; the independent oracle for fixed points."""
    for _ in range(it):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def make_network(types, edges, lam=1.0):
    """Hand-built network from a type list and an undirected edge list."""
    n = len(types)
    if edges:
        src = np.array([u for u, _ in edges], dtype=np.int64)
        dst = np.array([v for _, v in edges], dtype=np.int64)
    else:
        src = dst = np.empty(0, dtype=np.int64)
    rows = np.concatenate([src, dst])
    cols = np.concatenate([dst, src])
    order = np.argsort(rows * np.int64(max(n, 1)) + cols, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return NetworkInstance(
        n=n,
        node_type=np.array(types, dtype=np.uint8),
        node_lambda=np.full(n, float(lam)),
        indptr=indptr,
        indices=cols[order].astype(np.int32),
    )


@pytest.fixture
def island():
    def build(lam, gamma_h=0.5, q=1.0, mu_h1=0.6, mu_l1=0.4, mu_s1=0.5,
              payoff=None):
        f = FiniteDist.point(lam)
        return ModelParams(gamma_h=gamma_h, mu_h1=mu_h1, mu_l1=mu_l1,
                           mu_s1=mu_s1, q=q, f_h=f, f_l=f,
                           payoff=payoff or PayoffFn.linear())

    return build


@pytest.fixture
def island_sqrt2(island):
    # type-symmetric island calibrated to mean degree 2
    return island(math.sqrt(2.0))


@pytest.fixture
def island_sqrt3(island):
    # mean degree 3; believer-subnetwork branching intensity 1.5
    return island(math.sqrt(3.0))
