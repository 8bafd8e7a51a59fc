"""Deterministic density-based clustering shared by all pipeline stages.

Definitions: a core point has at least ``min_pts`` neighbors within
``eps`` (inclusive distance, Euclidean, the point itself counts).
Clusters are connected components of core points; a non-core point
within eps of a core joins the cluster of its lowest-index core
neighbor; the rest are NOISE. Clusters are numbered by ascending
smallest core index, so the partition is independent of input order
up to renumbering.
"""

from __future__ import annotations

from typing import List

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

NOISE = -1


def dbscan(vectors: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Cluster d-dimensional vectors; returns per-point ids, NOISE = -1."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be at least 1")
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        vectors = vectors.reshape(len(vectors), -1)
    n = len(vectors)
    labels = np.full(n, NOISE, dtype=np.int64)
    if n == 0:
        return labels

    tree = cKDTree(vectors)
    pairs = tree.query_pairs(r=eps, output_type="ndarray")
    degree = np.bincount(pairs.reshape(-1), minlength=n)
    core = (degree + 1) >= min_pts

    core_idx = np.flatnonzero(core)
    if len(core_idx) == 0:
        return labels

    # Connected components over core-core edges.
    both_core = core[pairs[:, 0]] & core[pairs[:, 1]]
    cc_pairs = pairs[both_core]
    rank = np.full(n, -1, dtype=np.int64)
    rank[core_idx] = np.arange(len(core_idx))
    graph = sparse.coo_matrix(
        (np.ones(len(cc_pairs)), (rank[cc_pairs[:, 0]], rank[cc_pairs[:, 1]])),
        shape=(len(core_idx), len(core_idx)),
    )
    _, component = sparse.csgraph.connected_components(graph, directed=False)

    # Renumber components by their smallest core index.
    order = np.full(component.max() + 1, n, dtype=np.int64)
    np.minimum.at(order, component, core_idx)
    cluster_of_component = np.empty_like(order)
    cluster_of_component[np.argsort(order)] = np.arange(len(order))
    labels[core_idx] = cluster_of_component[component]

    # Border points take the cluster of their lowest-index core neighbor.
    a, b = pairs[:, 0], pairs[:, 1]
    border_edges = []
    m = ~core[a] & core[b]
    border_edges.append(np.stack([a[m], b[m]], axis=1))
    m = core[a] & ~core[b]
    border_edges.append(np.stack([b[m], a[m]], axis=1))
    edges = np.concatenate(border_edges)
    if len(edges):
        lowest = np.full(n, n, dtype=np.int64)
        np.minimum.at(lowest, edges[:, 0], edges[:, 1])
        border = np.flatnonzero(lowest < n)
        labels[border] = labels[lowest[border]]
    return labels


def cluster_members(labels: np.ndarray) -> List[np.ndarray]:
    """Member index arrays per cluster id, position = id."""
    labels = np.asarray(labels)
    n_clusters = int(labels.max()) + 1 if len(labels) and labels.max() >= 0 else 0
    return [np.flatnonzero(labels == k) for k in range(n_clusters)]
