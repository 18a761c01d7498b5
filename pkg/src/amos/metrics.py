"""Clustering quality: external (vs. ground truth) and internal (cut based) metrics."""
from __future__ import annotations

import warnings

import numpy as np

from .errors import GraphError
from .graph import Graph

NMI_NORMALIZATION = "arithmetic"


def _labels(x):
    return np.asarray(x.labels if hasattr(x, "labels") else x).ravel()


def contingency_table(a, b) -> np.ndarray:
    """Co-occurrence counts; rows index the clusters of ``a``, columns those of ``b``."""
    a, b = _labels(a), _labels(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1 if ai.size else 0, bi.max() + 1 if bi.size else 0),
                     dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(a, b) -> float:
    """Mutual information over the arithmetic mean of the two entropies."""
    t = contingency_table(a, b)
    n = t.sum()
    ha = _entropy(t.sum(axis=1), n)
    hb = _entropy(t.sum(axis=0), n)
    if ha == 0.0 and hb == 0.0:
        return 1.0
    nz = t > 0
    outer = np.outer(t.sum(axis=1), t.sum(axis=0))
    mi = float(np.sum(t[nz] / n * np.log(t[nz] * n / outer[nz])))
    return float(min(1.0, max(0.0, mi / (0.5 * (ha + hb)))))


def _pair_counts(a, b):
    t = contingency_table(a, b)
    n = int(t.sum())
    comb = lambda x: x * (x - 1) // 2  # noqa: E731
    both = int(comb(t).sum())
    same_a = int(comb(t.sum(axis=1)).sum())
    same_b = int(comb(t.sum(axis=0)).sum())
    return both, same_a, same_b, comb(n)


def rand_index(a, b) -> float:
    """Fraction of node pairs on which the two partitions agree."""
    both, same_a, same_b, total = _pair_counts(a, b)
    if total == 0:
        return 1.0
    apart = total - same_a - same_b + both
    return (both + apart) / total


def f_measure(a, truth) -> float:
    """Pairwise F1 of the same-cluster pairs of ``a`` against ``truth``."""
    both, same_a, same_t, _ = _pair_counts(a, truth)
    if same_a == 0:
        warnings.warn("partition has no same-cluster pairs; F-measure set to 0",
                      RuntimeWarning, stacklevel=2)
        return 0.0
    if same_t == 0 or both == 0:
        return 0.0
    precision = both / same_a
    recall = both / same_t
    return 2 * precision * recall / (precision + recall)


def cut_volume(g: Graph, labels):
    """Per-cluster cut weight and volume (sum of weighted degrees)."""
    labels = _labels(labels)
    if labels.shape[0] != g.n:
        raise ValueError(f"{labels.shape[0]} labels for {g.n} nodes")
    _, lab = np.unique(labels, return_inverse=True)
    K = lab.max() + 1
    vol = np.bincount(lab, weights=g.degree, minlength=K)
    u, v, w = g.edges()
    crossing = lab[u] != lab[v]
    cut = (np.bincount(lab[u[crossing]], weights=w[crossing], minlength=K)
           + np.bincount(lab[v[crossing]], weights=w[crossing], minlength=K))
    return cut, vol


def conductance_per_cluster(g: Graph, labels) -> np.ndarray:
    cut, vol = cut_volume(g, labels)
    outside = vol.sum() - vol
    denom = np.minimum(vol, outside)
    if np.any(denom <= 0):
        raise GraphError("conductance undefined: a cluster or its complement has zero volume")
    return cut / denom


def conductance(g: Graph, labels) -> float:
    """Average over clusters of cut / min(vol inside, vol outside)."""
    return float(np.mean(conductance_per_cluster(g, labels)))


def normalized_cut_per_cluster(g: Graph, labels) -> np.ndarray:
    cut, vol = cut_volume(g, labels)
    if np.any(vol <= 0):
        raise GraphError("normalized cut undefined: a cluster has zero volume")
    return cut / vol


def normalized_cut(g: Graph, labels) -> float:
    """Sum of cut/vol over clusters divided by K."""
    return float(np.mean(normalized_cut_per_cluster(g, labels)))


def evaluate(g: Graph, labels, truth=None) -> dict:
    """All metrics as a JSON-ready dict. External metrics only with ``truth``."""
    labels = _labels(labels)
    if labels.shape[0] != g.n:
        raise ValueError(f"{labels.shape[0]} labels for {g.n} nodes")
    out = {"n": g.n, "K": int(np.unique(labels).size)}
    internal = {}
    try:
        c = conductance_per_cluster(g, labels)
        internal["conductance"] = float(c.mean())
        internal["conductance_max"] = float(c.max())
        internal["conductance_per_cluster"] = c.tolist()
    except GraphError as exc:
        internal["conductance"] = None
        internal["conductance_error"] = str(exc)
    try:
        nc = normalized_cut_per_cluster(g, labels)
        internal["normalized_cut"] = float(nc.mean())
        internal["normalized_cut_max"] = float(nc.max())
        internal["normalized_cut_per_cluster"] = nc.tolist()
    except GraphError as exc:
        internal["normalized_cut"] = None
        internal["normalized_cut_error"] = str(exc)
    out["internal"] = internal
    if truth is not None:
        truth = _labels(truth)
        if truth.shape != labels.shape:
            raise ValueError(f"truth has {truth.shape[0]} labels for {g.n} nodes")
        out["external"] = {
            "nmi": nmi(labels, truth),
            "rand_index": rand_index(labels, truth),
            "f_measure": f_measure(labels, truth),
        }
    out["conventions"] = {"nmi_normalization": NMI_NORMALIZATION,
                          "cut_aggregate": "mean_over_clusters"}
    return out
