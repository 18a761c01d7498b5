"""Undirected weighted graphs: ingestion, Laplacians and submatrix views."""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .errors import GraphError, GraphFormatError


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph backed by a symmetric CSR weight matrix.

    Build instances with :meth:`from_edges` or :func:`load_graph`; the
    constructor does not re-validate ``weights``.
    """

    weights: sp.csr_matrix

    @classmethod
    def from_edges(cls, n, u, v, w=None) -> "Graph":
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if w is None:
            w = np.ones(u.shape[0])
        w = np.asarray(w, dtype=np.float64).ravel()
        if not (u.shape == v.shape == w.shape):
            raise GraphError("u, v and w must have equal length")
        if u.size:
            if u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n:
                raise GraphError(f"edge endpoint out of range [0, {n})")
            if np.any(u == v):
                raise GraphError("self-loops are not allowed")
            if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
                raise GraphError("edge weights must be finite and strictly positive")
        a = np.minimum(u, v)
        b = np.maximum(u, v)
        key = a * n + b
        if np.unique(key).size != key.size:
            raise GraphError("duplicate undirected edge")
        rows = np.concatenate([a, b])
        cols = np.concatenate([b, a])
        data = np.concatenate([w, w])
        W = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        W.sort_indices()
        return cls(W)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.weights.nnz // 2

    @cached_property
    def degree(self) -> np.ndarray:
        """Weighted degree vector (diagonal of S)."""
        return np.asarray(self.weights.sum(axis=1)).ravel()

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        A = self.weights.copy()
        A.data = np.ones_like(A.data)
        return A

    def edges(self):
        """Return ``(u, v, w)`` arrays with ``u < v``, sorted by (u, v)."""
        coo = sp.triu(self.weights, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return (coo.row[order].astype(np.int64), coo.col[order].astype(np.int64),
                coo.data[order])

    def is_weighted(self) -> bool:
        return bool(np.any(self.weights.data != 1.0))

    def binarized(self) -> "Graph":
        return Graph(self.adjacency)


def as_nodeset(nodes, n) -> np.ndarray:
    """Validate an ordered list of distinct node indices in ``[0, n)``."""
    idx = np.asarray(nodes, dtype=np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise GraphError(f"node index out of range [0, {n})")
    if np.unique(idx).size != idx.size:
        raise GraphError("node set contains duplicates")
    return idx


# ------------------------------------------------------------------ I/O ---

def _open_text(source):
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8")), True
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8"), True
    if isinstance(source, io.TextIOBase):
        return source, False
    # binary file-like
    return io.TextIOWrapper(source, encoding="utf-8"), False


class _EdgeAccumulator:
    """Collects edges, collapsing (u,v)/(v,u) mirrors of equal weight."""

    def __init__(self):
        self.seen = {}  # (a, b) -> [weight, orientations]

    def add(self, u, v, w, line):
        if u == v:
            raise GraphFormatError(f"self-loop on node {u}", line)
        if not (w > 0) or not math.isfinite(w):
            raise GraphFormatError(f"edge weight must be positive, got {w}", line)
        key = (u, v) if u < v else (v, u)
        orient = u < v
        prev = self.seen.get(key)
        if prev is None:
            self.seen[key] = [w, {orient}]
            return
        if orient in prev[1]:
            raise GraphFormatError(f"duplicate edge ({u}, {v})", line)
        if prev[0] != w:
            raise GraphFormatError(
                f"edge ({u}, {v}) repeated with conflicting weights {prev[0]} and {w}",
                line,
            )
        prev[1].add(orient)

    def build(self, n) -> Graph:
        if self.seen:
            keys = np.array(list(self.seen.keys()), dtype=np.int64)
            w = np.array([val[0] for val in self.seen.values()])
            return Graph.from_edges(n, keys[:, 0], keys[:, 1], w)
        return Graph.from_edges(n, [], [], [])


def _parse_int(tok, line):
    try:
        return int(tok)
    except ValueError:
        raise GraphFormatError(f"expected integer node index, got {tok!r}", line) from None


def _parse_float(tok, line):
    try:
        return float(tok)
    except ValueError:
        raise GraphFormatError(f"expected numeric weight, got {tok!r}", line) from None


def _read_edgelist(fh, one_based, n):
    acc = _EdgeAccumulator()
    shift = 1 if one_based else 0
    max_idx = -1
    for lineno, raw in enumerate(fh, start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) not in (2, 3):
            raise GraphFormatError(f"expected 'u v' or 'u v w', got {s!r}", lineno)
        u = _parse_int(tok[0], lineno) - shift
        v = _parse_int(tok[1], lineno) - shift
        if u < 0 or v < 0:
            raise GraphFormatError("negative node index after index shift", lineno)
        w = _parse_float(tok[2], lineno) if len(tok) == 3 else 1.0
        acc.add(u, v, w, lineno)
        max_idx = max(max_idx, u, v)
    if n is None:
        n = max_idx + 1
    elif max_idx >= n:
        raise GraphFormatError(f"node index {max_idx} exceeds declared n={n}")
    return acc.build(n)


def _read_matrix_market(fh):
    header = fh.readline()
    tok = header.strip().lower().split()
    if len(tok) != 5 or tok[0] != "%%matrixmarket" or tok[1] != "matrix":
        raise GraphFormatError("missing %%MatrixMarket matrix header", 1)
    fmt, field, symmetry = tok[2], tok[3], tok[4]
    if fmt != "coordinate":
        raise GraphFormatError("only 'coordinate' MatrixMarket files are supported", 1)
    if symmetry != "symmetric":
        raise GraphFormatError("MatrixMarket file must be 'symmetric'", 1)
    if field not in ("pattern", "real", "integer"):
        raise GraphFormatError(f"unsupported MatrixMarket field {field!r}", 1)
    acc = _EdgeAccumulator()
    size = None
    nnz_read = 0
    for lineno, raw in enumerate(fh, start=2):
        s = raw.strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if size is None:
            if len(parts) != 3:
                raise GraphFormatError("expected 'rows cols nnz' size line", lineno)
            rows, cols, nnz = (_parse_int(p, lineno) for p in parts)
            if rows != cols:
                raise GraphFormatError("adjacency matrix must be square", lineno)
            size = (rows, nnz)
            continue
        want = 2 if field == "pattern" else 3
        if len(parts) != want:
            raise GraphFormatError(f"expected {want} columns for field {field!r}", lineno)
        i = _parse_int(parts[0], lineno) - 1
        j = _parse_int(parts[1], lineno) - 1
        if not (0 <= i < size[0] and 0 <= j < size[0]):
            raise GraphFormatError(f"entry ({i + 1}, {j + 1}) out of range", lineno)
        w = 1.0 if field == "pattern" else _parse_float(parts[2], lineno)
        acc.add(i, j, w, lineno)
        nnz_read += 1
    if size is None:
        raise GraphFormatError("missing size line")
    if nnz_read != size[1]:
        raise GraphFormatError(f"header declares {size[1]} entries, found {nnz_read}")
    return acc.build(size[0])


def load_graph(source, format="edgelist", one_based=False, binarize=False, n=None) -> Graph:
    """Read a graph from a path, bytes, or file object.

    Parameters
    ----------
    source : path, bytes or file-like
        Text input, UTF-8.
    format : {"edgelist", "mtx"}
        ``edgelist`` lines are ``u v`` or ``u v w``; ``#`` starts a comment.
        ``mtx`` must be a symmetric coordinate MatrixMarket file (always
        one-based, ``one_based`` is ignored).
    one_based : bool
        Shift edge-list indices down by one.
    binarize : bool
        Replace every weight by 1.
    n : int, optional
        Node count for edge lists; defaults to ``max index + 1``.
    """
    fh, close = _open_text(source)
    try:
        if format in ("edgelist", "edge-list"):
            g = _read_edgelist(fh, one_based, n)
        elif format in ("mtx", "matrix-market", "matrixmarket"):
            g = _read_matrix_market(fh)
        else:
            raise ValueError(f"unknown graph format {format!r}")
    finally:
        if close:
            fh.close()
    return g.binarized() if binarize else g


def write_edgelist(g: Graph, target, weighted=None) -> None:
    """Write ``u v [w]`` lines, zero-based, one undirected edge per line."""
    if weighted is None:
        weighted = g.is_weighted()
    u, v, w = g.edges()
    lines = [f"# n={g.n} m={g.m}\n"]
    if weighted:
        lines += [f"{a} {b} {c!r}\n" for a, b, c in zip(u.tolist(), v.tolist(), w.tolist())]
    else:
        lines += [f"{a} {b}\n" for a, b in zip(u.tolist(), v.tolist())]
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8") as fh:
            fh.writelines(lines)
    else:
        target.writelines(lines)


# ----------------------------------------------------------- operations ---

def degree_normalize(g: Graph) -> Graph:
    """Symmetric degree normalisation ``S^-1/2 W S^-1/2``; topology unchanged."""
    d = g.degree
    if g.n and np.any(d <= 0):
        raise GraphError(f"isolated node {int(np.argmin(d))} has zero degree")
    inv = 1.0 / np.sqrt(d)
    W = g.weights.tocoo()
    data = W.data * inv[W.row] * inv[W.col]
    out = sp.csr_matrix((data, (W.row, W.col)), shape=W.shape)
    out.sort_indices()
    return Graph(out)


def laplacian(g: Graph, dense=False):
    """Graph Laplacian ``L = S - W`` (sparse CSR unless ``dense``)."""
    L = (sp.diags(g.degree) - g.weights).tocsr()
    return L.toarray() if dense else L


def connected_components(g: Graph):
    """Return ``(count, labels)``; labels are numbered in order of first node."""
    count, labels = _cc(g.weights, directed=False)
    return int(count), labels.astype(np.int64)


def subgraph(g: Graph, nodes) -> Graph:
    """Induced subgraph, nodes re-indexed by their position in ``nodes``."""
    idx = as_nodeset(nodes, g.n)
    W = g.weights[idx][:, idx].tocsr()
    W.sort_indices()
    return Graph(W)


def interconnection_matrix(g: Graph, a, b):
    """Binary and weight matrices of edges between node sets ``a`` (rows) and ``b``."""
    a = as_nodeset(a, g.n)
    b = as_nodeset(b, g.n)
    if np.intersect1d(a, b).size:
        raise GraphError("node sets overlap")
    block = g.weights[a][:, b].toarray()
    return (block > 0).astype(np.int64), block
