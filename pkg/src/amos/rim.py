"""Synthetic random-interconnection-model graphs with planted clusters."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SpecError
from .graph import Graph, connected_components

MAX_CONNECT_TRIES = 100


@dataclass(frozen=True)
class InternalGraph:
    """Recipe for a cluster's internal graph.

    kind is one of ``complete``, ``erdos_renyi`` (needs ``p``), ``path``,
    or ``custom`` (needs ``edges``, local zero-based indices).
    """

    kind: str = "complete"
    p: Optional[float] = None
    edges: Optional[tuple] = None

    @classmethod
    def parse(cls, obj) -> "InternalGraph":
        if isinstance(obj, InternalGraph):
            return obj
        if isinstance(obj, str):
            return cls(obj)
        if isinstance(obj, dict):
            edges = obj.get("edges")
            return cls(obj.get("kind", "complete"), obj.get("p"),
                       tuple(map(tuple, edges)) if edges is not None else None)
        raise SpecError(f"cannot parse internal graph recipe {obj!r}")


@dataclass(frozen=True)
class RimSpec:
    sizes: tuple
    internal: tuple  # one InternalGraph per cluster
    cross_p: np.ndarray  # K x K, symmetric, diagonal ignored
    weight_mean: np.ndarray  # K x K
    weight_dist: str = "constant"  # or "exponential"
    seed: int = 0
    internal_weight: float = 1.0

    @classmethod
    def build(cls, sizes, cross_p, internal="complete", weight_mean=1.0,
              weight_dist="constant", seed=0, internal_weight=1.0) -> "RimSpec":
        sizes = tuple(int(s) for s in sizes)
        K = len(sizes)
        if isinstance(internal, (list, tuple)):
            internal = tuple(InternalGraph.parse(r) for r in internal)
        else:
            internal = (InternalGraph.parse(internal),) * K
        spec = cls(sizes, internal, _as_pair_matrix(cross_p, K, "cross_p"),
                   _as_pair_matrix(weight_mean, K, "weight_mean"), weight_dist,
                   int(seed), float(internal_weight))
        spec.validate()
        return spec

    @classmethod
    def from_dict(cls, d: dict) -> "RimSpec":
        try:
            return cls.build(
                d["sizes"], d.get("cross_p", 0.0), d.get("internal", "complete"),
                d.get("weight_mean", 1.0), d.get("weight_dist", "constant"),
                d.get("seed", 0), d.get("internal_weight", 1.0))
        except KeyError as exc:
            raise SpecError(f"missing field {exc}") from None

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "internal": [
                {k: v for k, v in (("kind", r.kind), ("p", r.p),
                                   ("edges", [list(e) for e in r.edges] if r.edges else None))
                 if v is not None}
                for r in self.internal
            ],
            "cross_p": self.cross_p.tolist(),
            "weight_mean": self.weight_mean.tolist(),
            "weight_dist": self.weight_dist,
            "seed": self.seed,
            "internal_weight": self.internal_weight,
        }

    @property
    def K(self) -> int:
        return len(self.sizes)

    def validate(self):
        K = self.K
        if K < 1 or any(s < 1 for s in self.sizes):
            raise SpecError("cluster sizes must be >= 1")
        if len(self.internal) != K:
            raise SpecError("need one internal recipe per cluster")
        off = ~np.eye(K, dtype=bool)
        P = self.cross_p
        if np.any(P[off] < 0) or np.any(P[off] > 1):
            raise SpecError("cross_p entries must lie in [0, 1]")
        if not np.allclose(P, P.T) or not np.allclose(self.weight_mean, self.weight_mean.T):
            raise SpecError("cross_p and weight_mean must be symmetric")
        if np.any(self.weight_mean[off] < 0):
            raise SpecError("weight_mean must be nonnegative")
        if np.any((self.weight_mean[off] == 0) & (P[off] > 0)):
            raise SpecError("pairs with cross_p > 0 need a positive weight_mean")
        if self.weight_dist not in ("constant", "exponential"):
            raise SpecError(f"unknown weight_dist {self.weight_dist!r}")
        if not self.internal_weight > 0:
            raise SpecError("internal_weight must be positive")
        for k, r in enumerate(self.internal):
            if r.kind == "erdos_renyi":
                if r.p is None or not 0 < r.p <= 1:
                    raise SpecError(f"cluster {k}: erdos_renyi needs p in (0, 1]")
            elif r.kind == "custom":
                if r.edges is None:
                    raise SpecError(f"cluster {k}: custom recipe needs edges")
            elif r.kind not in ("complete", "path"):
                raise SpecError(f"cluster {k}: unknown internal kind {r.kind!r}")


def _as_pair_matrix(x, K, name):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full((K, K), float(arr))
    if arr.shape != (K, K):
        raise SpecError(f"{name} must be a scalar or a {K}x{K} matrix")
    return arr.copy()


def _internal_edges(recipe: InternalGraph, size: int, rng, cluster: int):
    if size == 1:
        return np.empty((0, 2), dtype=np.int64)
    if recipe.kind == "complete":
        iu = np.triu_indices(size, 1)
        return np.column_stack(iu).astype(np.int64)
    if recipe.kind == "path":
        a = np.arange(size - 1)
        return np.column_stack([a, a + 1]).astype(np.int64)
    if recipe.kind == "custom":
        e = np.asarray(recipe.edges, dtype=np.int64).reshape(-1, 2)
        g = Graph.from_edges(size, e[:, 0], e[:, 1])
        if connected_components(g)[0] != 1:
            raise SpecError(f"cluster {cluster}: custom internal graph is not connected")
        return e
    iu = np.triu_indices(size, 1)
    for _ in range(MAX_CONNECT_TRIES):
        keep = rng.random(iu[0].size) < recipe.p
        e = np.column_stack([iu[0][keep], iu[1][keep]]).astype(np.int64)
        if connected_components(Graph.from_edges(size, e[:, 0], e[:, 1]))[0] == 1:
            return e
    raise SpecError(
        f"cluster {cluster}: no connected G({size}, {recipe.p}) "
        f"in {MAX_CONNECT_TRIES} draws")


def generate_rim(spec: RimSpec):
    """Draw a graph from ``spec``; returns ``(graph, labels)``.

    Cluster k occupies a contiguous block of node ids. Internal edges carry
    ``spec.internal_weight``; cross edges are Bernoulli(p_ij) with weights
    drawn from ``weight_dist`` with mean ``weight_mean[i, j]``.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    offsets = np.concatenate([[0], np.cumsum(spec.sizes)])
    n = int(offsets[-1])
    us, vs, ws = [], [], []
    for k, (size, recipe) in enumerate(zip(spec.sizes, spec.internal)):
        e = _internal_edges(recipe, size, rng, k) + offsets[k]
        us.append(e[:, 0])
        vs.append(e[:, 1])
        ws.append(np.full(e.shape[0], spec.internal_weight))
    for i in range(spec.K):
        for j in range(i + 1, spec.K):
            p = spec.cross_p[i, j]
            block = rng.random((spec.sizes[i], spec.sizes[j])) < p
            r, c = np.nonzero(block)
            mean = spec.weight_mean[i, j]
            if spec.weight_dist == "constant":
                w = np.full(r.size, mean)
            else:
                w = rng.exponential(mean, size=r.size)
                w[w <= 0] = np.finfo(float).tiny
            us.append(r + offsets[i])
            vs.append(c + offsets[j])
            ws.append(w)
    g = Graph.from_edges(n, np.concatenate(us), np.concatenate(vs), np.concatenate(ws))
    labels = np.repeat(np.arange(spec.K), spec.sizes)
    return g, labels


def empirical_t(g: Graph, labels) -> float:
    """Realised cross density times realised mean cross weight (total cross weight / cross pairs)."""
    labels = np.asarray(labels)
    sizes = np.bincount(labels)
    pairs = (g.n**2 - int(np.sum(sizes.astype(np.int64) ** 2))) // 2
    if pairs == 0:
        return 0.0
    u, v, w = g.edges()
    return float(w[labels[u] != labels[v]].sum() / pairs)
