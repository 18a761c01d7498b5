"""Phase-transition sweeps over the interconnection parameter t on planted graphs."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np
import scipy.sparse.linalg as spla

from .errors import SpecError
from .graph import laplacian
from .kmeans import Partition, kmeans
from .metrics import nmi
from .rim import RimSpec, empirical_t, generate_rim
from .spectral import embedding, sin_theta_distance
from .stats import t_bounds

SWEEP_COLUMNS = (
    "t", "trial", "seed", "nmi", "t_emp", "t_lb", "t_ub", "lambda_next_over_n",
    "delta_t", "lap_diff_fro", "bound", "sin_theta", "sub_threshold", "violation",
)


@dataclass(frozen=True)
class SweepRow:
    t: float
    trial: int
    seed: int
    nmi: float
    t_emp: float
    t_lb: float
    t_ub: float
    lambda_next_over_n: float
    delta_t: float
    lap_diff_fro: float
    bound: float
    sin_theta: float
    sub_threshold: bool
    violation: bool


def homogeneous_p(spec: RimSpec) -> float:
    off = spec.cross_p[~np.eye(spec.K, dtype=bool)]
    if off.size == 0 or not np.all(off == off[0]) or off[0] <= 0:
        raise SpecError("sweep needs a homogeneous spec with one cross_p > 0")
    return float(off[0])


def spec_at(spec: RimSpec, t: float, seed: int) -> RimSpec:
    """Copy of ``spec`` whose cross weights have mean ``t / p``, so ``p * W = t``."""
    p = homogeneous_p(spec)
    return replace(spec, weight_mean=np.full((spec.K, spec.K), t / p), seed=seed)


def _trial(args):
    spec, t, trial, seed, restarts = args
    s_graph, s_ref, s_km = np.random.SeedSequence(seed).generate_state(3)
    g, labels = generate_rim(spec_at(spec, t, int(s_graph)))
    g_ref, _ = generate_rim(spec_at(spec, t, int(s_ref)))
    K, n = spec.K, g.n
    emb = embedding(g, K)
    emb_ref = embedding(g_ref, K)
    km = kmeans(emb.Y, K, restarts=restarts, seed=int(s_km))
    t_lb, t_ub = t_bounds(g, Partition.from_labels(g, labels, K))
    lam = emb.lambda_next / n
    delta = min(t, abs(lam - t))
    fro = float(spla.norm(laplacian(g) - laplacian(g_ref)))
    bound = fro / (n * delta) if delta > 0 else math.inf
    sin = sin_theta_distance(emb.Y, emb_ref.Y)
    sub = t < t_lb
    return SweepRow(t, trial, seed, nmi(km.labels, labels), empirical_t(g, labels),
                    t_lb, t_ub, lam, delta, fro, bound, sin, sub, bool(sub and sin > bound))


def run_sweep(spec: RimSpec, t_grid, trials: int, seed: int = 0, restarts: int = 20,
              workers: int = 1) -> list:
    """Generate, embed and cluster ``trials`` graphs at every ``t`` in ``t_grid``.

    Each trial also draws an independent reference graph at the same ``t`` to
    compare eigenvector subspaces against the perturbation bound
    ``||L - L_ref||_F / (n * delta_t)``. Rows come back in (t, trial) order and
    do not depend on ``workers``.
    """
    grid = [float(t) for t in t_grid]
    if not grid:
        raise SpecError("t grid is empty")
    if any(t <= 0 for t in grid):
        raise SpecError("t grid must be strictly positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise SpecError("t grid must be strictly increasing")
    if trials < 1:
        raise SpecError("trials must be >= 1")
    homogeneous_p(spec)
    jobs = []
    for ti, t in enumerate(grid):
        for trial in range(trials):
            s = int(np.random.SeedSequence([seed, ti, trial]).generate_state(1)[0])
            jobs.append((spec, t, trial, s, restarts))
    if workers == 1:
        return [_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers or os.cpu_count()) as ex:
        return list(ex.map(_trial, jobs))


def write_sweep_csv(rows, target) -> None:
    close = isinstance(target, (str, os.PathLike))
    fh = open(target, "w", newline="", encoding="utf-8") if close else target
    try:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        for r in rows:
            d = asdict(r)
            w.writerow({k: (repr(v) if isinstance(v, float) else int(v) if isinstance(v, bool) else v)
                        for k, v in d.items()})
    finally:
        if close:
            fh.close()


def summarize(rows) -> dict:
    """Mean NMI and violation count per grid point."""
    out = {}
    for r in rows:
        s = out.setdefault(r.t, {"nmi": [], "violations": 0, "t_lb": [], "t_ub": []})
        s["nmi"].append(r.nmi)
        s["t_lb"].append(r.t_lb)
        s["t_ub"].append(r.t_ub)
        s["violations"] += int(r.violation)
    return {t: {"mean_nmi": float(np.mean(s["nmi"])), "violations": s["violations"],
                "mean_t_lb": float(np.mean(s["t_lb"])), "mean_t_ub": float(np.mean(s["t_ub"])),
                "trials": len(s["nmi"])}
            for t, s in out.items()}
