"""The AMOS loop: grow K until spectral clusters pass the reliability tests."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ClusterTooSmallError, DisconnectedGraphError, GraphError
from .graph import Graph, connected_components, degree_normalize
from .kmeans import Partition, kmeans
from .spectral import embedding
from .stats import (
    glrt_homogeneity_test,
    homogeneous_estimates,
    inhomogeneous_pt_test,
    pair_estimates,
    t_lb_estimate,
)

SCHEMA = "amos_report_v1"
STAGES = ("rim_test", "glrt", "homogeneous_pt", "inhomogeneous_pt", "none")


@dataclass(frozen=True)
class AmosConfig:
    eta: float = 1e-5
    alpha: float = 0.05
    alpha_prime: float = 0.05
    k_max: Optional[int] = None  # default min(n - 1, 200)
    seed: int = 0
    restarts: int = 20
    normalize: bool = True

    def resolved_k_max(self, n: int) -> int:
        k = min(n - 1, 200) if self.k_max is None else int(self.k_max)
        if not 2 <= k <= n - 1:
            raise ValueError(f"k_max must be in [2, {n - 1}], got {k}")
        return k

    def validate(self):
        for name in ("eta", "alpha", "alpha_prime"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class IterationRecord:
    K: int
    sizes: list
    failing_stage: str
    first_failing_pair: Optional[tuple] = None
    p_values: list = field(default_factory=list)  # [(i, j, p), ...]
    glrt: Optional[dict] = None
    estimates: Optional[dict] = None
    product: Optional[float] = None
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "sizes": self.sizes,
            "failing_stage": self.failing_stage,
            "first_failing_pair": list(self.first_failing_pair) if self.first_failing_pair else None,
            "p_values": [[i, j, p] for i, j, p in self.p_values],
            "glrt": self.glrt,
            "estimates": self.estimates,
            "product": self.product,
            "diagnostics": self.diagnostics,
        }


@dataclass
class AmosReport:
    K: int
    partition: Partition
    iterations: list
    termination: str  # "reliable" | "k_max_exhausted"
    config: AmosConfig
    timings: dict = field(default_factory=dict)

    @property
    def labels(self) -> np.ndarray:
        return self.partition.labels

    def to_dict(self, include_timings=False) -> dict:
        out = {
            "schema": SCHEMA,
            "n": int(self.partition.n),
            "K": int(self.K),
            "termination": self.termination,
            "labels": self.partition.labels.tolist(),
            "sizes": self.partition.sizes.tolist(),
            "config": {
                "eta": self.config.eta,
                "alpha": self.config.alpha,
                "alpha_prime": self.config.alpha_prime,
                "k_max": self.config.k_max,
                "seed": self.config.seed,
                "restarts": self.config.restarts,
                "normalize": self.config.normalize,
            },
            "iterations": [rec.to_dict() for rec in self.iterations],
        }
        if include_timings:
            out["timings"] = dict(self.timings)
        return out

    def to_json(self, include_timings=False, **kw) -> str:
        return json.dumps(self.to_dict(include_timings), **kw)


def _estimates_snapshot(pairs, hom):
    return {
        "p_hat": hom.p_hat,
        "w_bar": hom.w_bar,
        "t_hat": hom.t_hat,
        "t_lb": hom.t_lb,
        "t_max": max(pr.t_hat for pr in pairs),
        "pairs": [
            {"i": pr.i, "j": pr.j, "m_ij": pr.m_ij, "p_hat": pr.p_hat,
             "w_bar": pr.w_bar if pr.has_edges else None, "t_hat": pr.t_hat}
            for pr in pairs
        ],
    }


def evaluate_partition(g: Graph, part: Partition, cfg: AmosConfig) -> IterationRecord:
    """Run the RIM test and the phase-transition tests on one partition."""
    K = part.K
    rec = IterationRecord(K=K, sizes=part.sizes.tolist(), failing_stage="none")
    pairs = pair_estimates(g, part)
    rec.p_values = [(pr.i, pr.j, pr.p_value) for pr in pairs]
    for pr in pairs:
        if pr.degenerate:
            rec.diagnostics.append(f"vtest_degenerate({pr.i},{pr.j})")
    for pr in pairs:
        if pr.p_value <= cfg.eta:
            rec.failing_stage = "rim_test"
            rec.first_failing_pair = (pr.i, pr.j)
            return rec

    hom = homogeneous_estimates(g, part, pairs, compute_t_lb=False)
    t_lb = None
    try:
        t_lb = t_lb_estimate(g, part)
    except ClusterTooSmallError as exc:
        rec.diagnostics.append(f"t_lb_undefined: {exc}")
    hom = replace(hom, t_lb=t_lb)
    rec.estimates = _estimates_snapshot(pairs, hom)
    if not hom.has_cross_edges:
        rec.diagnostics.append("no_cross_edges")

    homogeneous = True
    if K >= 3:
        gl = glrt_homogeneity_test(pairs, hom, cfg.alpha)
        rec.glrt = {"passed": gl.passed, "statistic": gl.statistic, "lower": gl.lower,
                    "upper": gl.upper, "dof": gl.dof, "side": gl.side}
        if gl.side == "low":
            rec.diagnostics.append("glrt_rejected_low_side")
        homogeneous = gl.passed

    if homogeneous:
        if t_lb is None or not hom.t_hat < t_lb:
            rec.failing_stage = "homogeneous_pt"
        return rec

    if t_lb is None:
        rec.failing_stage = "inhomogeneous_pt"
        return rec
    passed, prod, _ = inhomogeneous_pt_test(pairs, t_lb, cfg.alpha_prime)
    rec.product = prod
    if not passed:
        rec.failing_stage = "inhomogeneous_pt"
    return rec


def run_amos(g: Graph, cfg: AmosConfig = AmosConfig()) -> AmosReport:
    """Select the number of clusters of a connected graph.

    Starting at K = 2, clusters the spectral embedding and stops at the first
    K whose clusters pass the V-test on every pair and the applicable phase
    transition test. Returns the last partition with
    ``termination="k_max_exhausted"`` if no K up to ``k_max`` passes.
    """
    cfg.validate()
    n = g.n
    if n < 3:
        raise GraphError(f"AMOS needs at least 3 nodes, got {n}")
    ncomp, _ = connected_components(g)
    if ncomp != 1:
        raise DisconnectedGraphError(
            f"graph has {ncomp} connected components; run per component")
    k_max = cfg.resolved_k_max(n)
    work = degree_normalize(g) if cfg.normalize else g

    timings = {"embedding": 0.0, "kmeans": 0.0, "tests": 0.0}
    records = []
    part = None
    for K in range(2, k_max + 1):
        t0 = time.perf_counter()
        emb = embedding(work, K)
        t1 = time.perf_counter()
        seed_k = int(np.random.SeedSequence([cfg.seed, K]).generate_state(1)[0])
        km = kmeans(emb.Y, K, restarts=cfg.restarts, seed=seed_k)
        part = Partition.from_labels(work, km.labels, K)
        t2 = time.perf_counter()
        rec = evaluate_partition(work, part, cfg)
        t3 = time.perf_counter()
        timings["embedding"] += t1 - t0
        timings["kmeans"] += t2 - t1
        timings["tests"] += t3 - t2
        records.append(rec)
        if rec.failing_stage == "none":
            return AmosReport(K, part, records, "reliable", cfg, timings)
    return AmosReport(k_max, part, records, "k_max_exhausted", cfg, timings)
