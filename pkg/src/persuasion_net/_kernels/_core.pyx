# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels: connected components over a (masked) CSR
adjacency and seeded spreading through sharer nodes.

Both return the same results as the pure-Python fallback; component labels
are in first-touch order (lowest node id per component first), which the
caller canonicalises anyway.
"""

import numpy as np


def components_labels(long long[::1] indptr, int[::1] indices,
                      unsigned char[::1] carrier):
    """Label connected components of the subgraph induced by carrier nodes.

    Returns (labels, count); labels is int64 with -1 outside the carrier.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    labels_arr = np.full(n, -1, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] labels = labels_arr
    cdef long long[::1] queue = queue_arr
    cdef Py_ssize_t i, u, v, k, head, tail
    cdef long long cur = 0
    for i in range(n):
        if carrier[i] != 0 and labels[i] < 0:
            labels[i] = cur
            head = 0
            tail = 0
            queue[tail] = i
            tail += 1
            while head < tail:
                u = queue[head]
                head += 1
                for k in range(indptr[u], indptr[u + 1]):
                    v = indices[k]
                    if carrier[v] != 0 and labels[v] < 0:
                        labels[v] = cur
                        queue[tail] = v
                        tail += 1
            cur += 1
    return labels_arr, int(cur)


def spread_observed(long long[::1] indptr, int[::1] indices,
                    long long[::1] seeds, unsigned char[::1] sharer):
    """Nodes observing a signal: seeds plus everything reachable from them
    along paths whose interior vertices are all sharers.

    Returns a uint8 mask.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    observed_arr = np.zeros(n, dtype=np.uint8)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef unsigned char[::1] observed = observed_arr
    cdef long long[::1] queue = queue_arr
    cdef Py_ssize_t i, u, v, k, head, tail
    head = 0
    tail = 0
    for i in range(seeds.shape[0]):
        u = seeds[i]
        if observed[u] == 0:
            observed[u] = 1
            if sharer[u] != 0:
                queue[tail] = u
                tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if observed[v] == 0:
                observed[v] = 1
                if sharer[v] != 0:
                    queue[tail] = v
                    tail += 1
    return observed_arr
