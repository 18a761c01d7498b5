"""K-means on spectral embeddings, and the Partition summary used downstream."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import GraphError
from .graph import Graph

MAX_ITER = 300


class DegenerateClusteringWarning(UserWarning):
    """Fewer distinct points than clusters; ties are broken by point index."""


@dataclass(frozen=True, eq=False)
class KMeansResult:
    labels: np.ndarray
    inertia: float
    n_iter: int
    restart: int  # index of the winning restart
    history: list = field(default_factory=list)  # objective per Lloyd iteration


def relabel_by_first_appearance(labels) -> np.ndarray:
    """Renumber labels so cluster ids follow the order of their first node."""
    labels = np.asarray(labels, dtype=np.int64)
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    mapping = np.empty(labels.max() + 1 if labels.size else 0, dtype=np.int64)
    mapping[np.unique(labels)[order]] = np.arange(order.size)
    return mapping[labels]


def _kmeans_pp(X, K, rng):
    n = X.shape[0]
    chosen = np.empty(K, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    taken = np.zeros(n, dtype=bool)
    taken[chosen[0]] = True
    for c in range(1, K):
        total = d2.sum()
        if total > 0:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            idx = min(idx, n - 1)
            if d2[idx] == 0:  # guard against cumsum round-off landing on a zero
                idx = int(np.flatnonzero(d2 > 0)[0])
        else:
            idx = int(np.flatnonzero(~taken)[0])
        chosen[c] = idx
        taken[idx] = True
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return X[chosen].copy()


def _repair_empty(X, labels, d2, centers, K):
    counts = np.bincount(labels, minlength=K)
    for k in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        cand = np.where(movable, d2, -1.0)
        p = int(np.argmax(cand))
        counts[labels[p]] -= 1
        labels[p] = k
        counts[k] = 1
        d2[p] = 0.0
        centers[k] = X[p]
    return labels, d2


def _lloyd(X, K, rng, max_iter):
    centers = _kmeans_pp(X, K, rng)
    prev = None
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        labels, d2 = _kernels.assign_labels(X, centers)
        labels, d2 = _repair_empty(X, labels, d2, centers, K)
        history.append(float(d2.sum()))
        if prev is not None and np.array_equal(labels, prev):
            break
        sums, counts = _kernels.centroid_sums(X, labels, K)
        centers = sums / counts[:, None]
        prev = labels
    return labels, history[-1], it, history


def kmeans(points, K: int, restarts: int = 20, seed: int = 0,
           max_iter: int = MAX_ITER) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding, best of ``restarts`` runs.

    Restart ``r`` draws from ``SeedSequence([seed, r])`` so results do not
    depend on how restarts are scheduled. Returned labels are renumbered
    by first appearance.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if K < 1 or K > n:
        raise ValueError(f"K must be in [1, {n}], got {K}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if K > 1 and np.unique(X, axis=0).shape[0] < K:
        warnings.warn(
            f"only {np.unique(X, axis=0).shape[0]} distinct points for K={K}; "
            "ties broken by point index",
            DegenerateClusteringWarning,
            stacklevel=2,
        )
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        labels, inertia, n_iter, history = _lloyd(X, K, rng, max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels, inertia, n_iter, r, history)
    return KMeansResult(relabel_by_first_appearance(best.labels), best.inertia,
                        best.n_iter, best.restart, best.history)


@dataclass(frozen=True, eq=False)
class Partition:
    """Cluster assignment of a graph's nodes with per-cluster edge tallies.

    ``edge_counts[i, j]`` (i != j) is the number of edges between clusters
    i and j; the diagonal holds within-cluster edge counts. ``node_counts``
    is n x K: neighbours of each node inside each cluster.
    """

    labels: np.ndarray
    K: int
    sizes: np.ndarray
    within_edges: np.ndarray
    within_weight: np.ndarray
    edge_counts: np.ndarray
    edge_weights: np.ndarray
    node_counts: np.ndarray
    node_weights: np.ndarray

    @classmethod
    def from_labels(cls, g: Graph, labels, K=None) -> "Partition":
        labels = np.asarray(labels, dtype=np.int64).ravel()
        if labels.shape[0] != g.n:
            raise GraphError(f"{labels.shape[0]} labels for {g.n} nodes")
        if labels.size and labels.min() < 0:
            raise GraphError("labels must be nonnegative")
        if K is None:
            K = int(labels.max()) + 1 if labels.size else 0
        sizes = np.bincount(labels, minlength=K)
        if sizes.shape[0] != K or np.any(sizes == 0):
            raise GraphError("every cluster id in [0, K) must be nonempty")
        W = g.weights
        node_counts, node_weights = _kernels.node_cluster_counts(
            W.indptr, W.indices, W.data, labels, K)
        counts = np.zeros((K, K), dtype=np.int64)
        weights = np.zeros((K, K))
        np.add.at(counts, labels, node_counts)
        np.add.at(weights, labels, node_weights)
        # diagonal counted every within edge twice
        counts[np.diag_indices(K)] //= 2
        weights[np.diag_indices(K)] /= 2.0
        return cls(labels, K, sizes, np.diag(counts).copy(), np.diag(weights).copy(),
                   counts, weights, node_counts, node_weights)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def n_max(self) -> int:
        return int(self.sizes.max())

    @property
    def n_min(self) -> int:
        return int(self.sizes.min())

    def members(self, k) -> np.ndarray:
        return np.flatnonzero(self.labels == k)

    def cross_edges(self) -> int:
        return int(np.triu(self.edge_counts, 1).sum())
