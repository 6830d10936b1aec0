"""Connected components of a sampled network and of its believer subnetwork.

Labels are canonical: components are ordered by size descending, ties by
smallest member id, and relabelled so that label 0 is *the* largest
component.  The believer decomposition also carries the set of nodes
(either type) adjacent to the believer giant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .netgen import NetworkInstance


@dataclass(frozen=True)
class ComponentDecomposition:
    """Canonically labelled components over a carrier set of nodes."""

    labels: np.ndarray   # int64; -1 outside the carrier; 0 is the largest component
    sizes: np.ndarray    # descending (ties broken by smallest member id)

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def l1_mask(self) -> np.ndarray:
        return self.labels == 0

    def l1_size(self) -> int:
        return int(self.sizes[0]) if len(self.sizes) else 0

    def l2_size(self) -> int:
        return int(self.sizes[1]) if len(self.sizes) > 1 else 0


@dataclass(frozen=True)
class BelieverDecomposition(ComponentDecomposition):
    """Components of the believer-induced subgraph plus the L-hat-1 frontier."""

    neighbor_mask: np.ndarray  # nodes (any type) with >= 1 neighbour on L-hat-1


def _canonicalize(raw_labels: np.ndarray, count: int):
    if count == 0:
        return raw_labels, np.empty(0, dtype=np.int64)
    carrier = raw_labels >= 0
    sizes = np.bincount(raw_labels[carrier], minlength=count)
    first = np.full(count, np.iinfo(np.int64).max, dtype=np.int64)
    ids = np.flatnonzero(carrier)
    np.minimum.at(first, raw_labels[ids], ids)
    order = np.lexsort((first, -sizes))
    rank = np.empty(count, dtype=np.int64)
    rank[order] = np.arange(count)
    labels = raw_labels.copy()
    labels[carrier] = rank[raw_labels[carrier]]
    return labels, sizes[order]


def components(net: NetworkInstance) -> ComponentDecomposition:
    """Exact component decomposition of the whole network."""
    carrier = np.ones(net.n, dtype=np.uint8)
    raw, count = _kernels.components_labels(net.indptr, net.indices, carrier)
    labels, sizes = _canonicalize(raw, count)
    return ComponentDecomposition(labels=labels, sizes=sizes)


def believer_components(net: NetworkInstance) -> BelieverDecomposition:
    """Components of the subgraph induced on believers, and the mask of all
    nodes with at least one neighbour on its largest component."""
    carrier = (net.node_type == 0).astype(np.uint8)
    raw, count = _kernels.components_labels(net.indptr, net.indices, carrier)
    labels, sizes = _canonicalize(raw, count)
    neighbor = np.zeros(net.n, dtype=bool)
    if count:
        on_l1 = labels == 0
        flags = on_l1[net.indices].astype(np.int64)
        deg = net.indptr[1:] - net.indptr[:-1]
        nz = deg > 0
        hits = np.zeros(net.n, dtype=np.int64)
        if flags.size:
            hits[nz] = np.add.reduceat(flags, net.indptr[:-1][nz])
        neighbor = hits > 0
    return BelieverDecomposition(labels=labels, sizes=sizes, neighbor_mask=neighbor)


@dataclass(frozen=True)
class Decomposition:
    full: ComponentDecomposition
    believer: BelieverDecomposition


def decompose(net: NetworkInstance) -> Decomposition:
    return Decomposition(full=components(net), believer=believer_components(net))
