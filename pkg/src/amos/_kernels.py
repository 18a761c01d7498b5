"""Hot inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports cleanly and the environment
variable ``AMOS_DISABLE_NUMBA`` is unset (or set to ``0``/``false``).
Both paths are always importable under explicit names so they can be
compared in tests and in ``benchmarks/bench_kernels.py``.
"""
import os

import numpy as np
import scipy.sparse as sp

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

_flag = os.environ.get("AMOS_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = HAS_NUMBA and _flag in ("", "0", "false", "no")

# Max n*K*d entries materialised at once by the numpy distance kernel.
_CHUNK_ELEMS = 1 << 22


# ---------------------------------------------------------------- numpy ---

def assign_labels_numpy(X, C):
    """Nearest-centroid labels and squared distances (ties -> lowest index)."""
    n, d = X.shape
    k = C.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n, dtype=np.float64)
    step = max(1, _CHUNK_ELEMS // max(1, k * d))
    for start in range(0, n, step):
        stop = min(n, start + step)
        diff = X[start:stop, None, :] - C[None, :, :]
        d2 = np.einsum("ikj,ikj->ik", diff, diff)
        lab = np.argmin(d2, axis=1)
        labels[start:stop] = lab
        best[start:stop] = d2[np.arange(stop - start), lab]
    return labels, best


def centroid_sums_numpy(X, labels, k):
    sums = np.zeros((k, X.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, X)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


def node_cluster_counts_numpy(indptr, indices, data, labels, k):
    """Per node: number and total weight of neighbours in each cluster."""
    n = indptr.shape[0] - 1
    onehot = sp.csr_matrix(
        (np.ones(n), (np.arange(n), labels)), shape=(n, k)
    )
    binary = sp.csr_matrix((np.ones_like(data), indices, indptr), shape=(n, n))
    weighted = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    counts = np.rint((binary @ onehot).toarray()).astype(np.int64)
    weights = (weighted @ onehot).toarray()
    return counts, weights


# ---------------------------------------------------------------- numba ---

def _assign_labels_loop(X, C):
    n, d = X.shape
    k = C.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n, dtype=np.float64)
    for i in range(n):
        bd = np.inf
        bl = 0
        for c in range(k):
            s = 0.0
            for j in range(d):
                t = X[i, j] - C[c, j]
                s += t * t
            if s < bd:
                bd = s
                bl = c
        labels[i] = bl
        best[i] = bd
    return labels, best


def _centroid_sums_loop(X, labels, k):
    n, d = X.shape
    sums = np.zeros((k, d), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    for i in range(n):
        c = labels[i]
        counts[c] += 1
        for j in range(d):
            sums[c, j] += X[i, j]
    return sums, counts


def _node_cluster_counts_loop(indptr, indices, data, labels, k):
    n = indptr.shape[0] - 1
    counts = np.zeros((n, k), dtype=np.int64)
    weights = np.zeros((n, k), dtype=np.float64)
    for u in range(n):
        for p in range(indptr[u], indptr[u + 1]):
            c = labels[indices[p]]
            counts[u, c] += 1
            weights[u, c] += data[p]
    return counts, weights


if HAS_NUMBA:
    assign_labels_numba = njit(cache=True, nogil=True)(_assign_labels_loop)
    centroid_sums_numba = njit(cache=True, nogil=True)(_centroid_sums_loop)
    node_cluster_counts_numba = njit(cache=True, nogil=True)(
        _node_cluster_counts_loop
    )
else:  # pragma: no cover
    assign_labels_numba = _assign_labels_loop
    centroid_sums_numba = _centroid_sums_loop
    node_cluster_counts_numba = _node_cluster_counts_loop


# ------------------------------------------------------------- dispatch ---

def assign_labels(X, C):
    X = np.ascontiguousarray(X, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    if USE_NUMBA:
        return assign_labels_numba(X, C)
    return assign_labels_numpy(X, C)


def centroid_sums(X, labels, k):
    X = np.ascontiguousarray(X, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if USE_NUMBA:
        return centroid_sums_numba(X, labels, int(k))
    return centroid_sums_numpy(X, labels, int(k))


def node_cluster_counts(indptr, indices, data, labels, k):
    args = (
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(data, dtype=np.float64),
        np.ascontiguousarray(labels, dtype=np.int64),
        int(k),
    )
    if USE_NUMBA:
        return node_cluster_counts_numba(*args)
    return node_cluster_counts_numpy(*args)
