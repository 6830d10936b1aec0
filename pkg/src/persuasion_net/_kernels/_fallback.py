"""Pure NumPy/SciPy versions of the graph kernels.

Same contracts as the compiled module; components come from
scipy.sparse.csgraph (labels in arbitrary order -- callers canonicalise),
spreading is a vectorised frontier BFS.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _scipy_components


def _gather_neighbors(indptr, indices, nodes):
    """Concatenated neighbour lists of ``nodes`` without a Python loop."""
    counts = indptr[nodes + 1] - indptr[nodes]
    total = int(counts.sum())
    if total == 0:
        return indices[:0]
    starts = np.repeat(indptr[nodes], counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return indices[starts + offsets]


def components_labels(indptr, indices, carrier):
    n = len(indptr) - 1
    labels = np.full(n, -1, dtype=np.int64)
    keep = carrier.view(bool) if carrier.dtype == np.uint8 else carrier.astype(bool)
    sub_nodes = np.flatnonzero(keep)
    if len(sub_nodes) == 0:
        return labels, 0
    # induced subgraph in CSR form
    remap = np.full(n, -1, dtype=np.int64)
    remap[sub_nodes] = np.arange(len(sub_nodes))
    counts = indptr[1:] - indptr[:-1]
    src = np.repeat(np.arange(n), counts)
    edge_keep = keep[src] & keep[indices]
    sub_src = remap[src[edge_keep]]
    sub_dst = remap[indices[edge_keep]]
    m = csr_matrix(
        (np.ones(len(sub_src), dtype=np.int8), (sub_src, sub_dst)),
        shape=(len(sub_nodes), len(sub_nodes)),
    )
    count, sub_labels = _scipy_components(m, directed=False)
    labels[sub_nodes] = sub_labels
    return labels, int(count)


def spread_observed(indptr, indices, seeds, sharer):
    n = len(indptr) - 1
    observed = np.zeros(n, dtype=np.uint8)
    share = sharer.view(bool) if sharer.dtype == np.uint8 else sharer.astype(bool)
    seeds = np.asarray(seeds, dtype=np.int64)
    if len(seeds) == 0:
        return observed
    observed[seeds] = 1
    frontier = seeds[share[seeds]]
    while len(frontier):
        nbr = _gather_neighbors(indptr, indices, frontier)
        fresh = nbr[observed[nbr] == 0]
        if len(fresh) == 0:
            break
        fresh = np.unique(fresh)
        observed[fresh] = 1
        frontier = fresh[share[fresh]]
    return observed
