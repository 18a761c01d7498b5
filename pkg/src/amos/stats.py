"""Statistical reliability tests for clusters under the random interconnection model.

Contains the V-test on interconnection row sums, the maximum likelihood
estimates of interconnection parameters, the GLRT homogeneity test, the
phase-transition lower bound, and the Anscombe-based test used when the
clusters are inhomogeneous.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .errors import ClusterTooSmallError, DegenerateVTestError
from .graph import Graph, laplacian, subgraph
from .kmeans import Partition
from .spectral import partial_eigen_sum

ANSCOMBE_C = 3.0 / 8.0


# ------------------------------------------------------ special functions --

def normal_cdf(z):
    """Standard normal CDF via the complementary error function."""
    out = 0.5 * special.erfc(-np.asarray(z, dtype=np.float64) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def chi_square_quantile(q: int, upper_alpha: float) -> float:
    """Upper ``upper_alpha`` quantile of chi-square with ``q`` degrees of freedom.

    Solves ``P(X >= xi) = upper_alpha`` by inverting the regularised upper
    incomplete gamma function ``Q(q/2, xi/2)``.
    """
    if int(q) != q or q < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {q}")
    if not 0.0 < upper_alpha < 1.0:
        raise ValueError(f"upper_alpha must be in (0, 1), got {upper_alpha}")
    return float(2.0 * special.gammainccinv(q / 2.0, upper_alpha))


# ------------------------------------------------------------- V-test -----

def v_test_from_row_sums(x, n_j: int):
    """V-test statistic and two-sided p-value from the row sums of C_ij.

    Returns ``(z, p_value)``.
    """
    x = np.asarray(x, dtype=np.int64)
    n_i = x.shape[0]
    if n_j < 2 or n_i < 1:
        raise DegenerateVTestError(f"V-test undefined for shape ({n_i}, {n_j})")
    y = n_j - x
    X = int(x @ x - x.sum())
    Yv = int(y @ y - y.sum())
    if X < 0 or Yv < 0:
        raise RuntimeError(f"negative V-test moment (X={X}, Y={Yv}); row sums out of range")
    N = n_i * n_j * (n_j - 1)
    # V - N with V = (sqrt X + sqrt Y)^2, expanded so the integer part is exact
    z = ((X + Yv - N) + 2.0 * math.sqrt(X * Yv)) / math.sqrt(2.0 * N)
    p = 2.0 * normal_cdf(-abs(z))
    return z, min(1.0, p)


def v_test_pvalue(C) -> float:
    """p-value of the V-test for row homogeneity of a binary n_i x n_j matrix."""
    C = np.asarray(C)
    if C.ndim != 2:
        raise ValueError("C must be a 2-D matrix")
    return v_test_from_row_sums(C.sum(axis=1), C.shape[1])[1]


# ---------------------------------------------------------- estimates -----

@dataclass(frozen=True)
class PairStats:
    i: int
    j: int
    n_i: int
    n_j: int
    m_ij: int
    p_hat: float
    w_sum: float
    w_bar: float  # 1.0 when the pair has no cross edges
    has_edges: bool
    t_hat: float
    z: float
    p_value: float
    degenerate: bool = False  # V-test undefined (n_j < 2); auto-passed
    p_value_reverse: Optional[float] = None

    @property
    def pairs_possible(self) -> int:
        return self.n_i * self.n_j


@dataclass(frozen=True)
class HomogeneousStats:
    p_hat: float
    w_bar: float
    t_hat: float
    t_lb: Optional[float]  # None when some cluster has fewer than K nodes
    cross_edges: int
    cross_weight: float
    has_cross_edges: bool


def _vtest_or_pass(x, n_j):
    if n_j < 2 or x.shape[0] < 1:
        return 0.0, 1.0, True
    z, p = v_test_from_row_sums(x, n_j)
    return z, p, False


def pair_estimates(g: Graph, part: Partition, both_orientations=False) -> list:
    """Per-pair MLEs and V-test p-values, in (i, j) lexicographic order.

    The interconnection matrix of pair (i, j) is oriented with rows from the
    lower-indexed cluster.
    """
    K = part.K
    members = [part.members(k) for k in range(K)]
    out = []
    for i in range(K):
        for j in range(i + 1, K):
            n_i, n_j = int(part.sizes[i]), int(part.sizes[j])
            m_ij = int(part.edge_counts[i, j])
            w_sum = float(part.edge_weights[i, j])
            p_hat = m_ij / (n_i * n_j)
            has = m_ij > 0
            w_bar = w_sum / m_ij if has else 1.0
            z, p, degen = _vtest_or_pass(part.node_counts[members[i], j], n_j)
            rev = None
            if both_orientations:
                rev = _vtest_or_pass(part.node_counts[members[j], i], n_i)[1]
            out.append(PairStats(i, j, n_i, n_j, m_ij, p_hat, w_sum, w_bar, has,
                                 p_hat * w_bar if has else 0.0, z, p, degen, rev))
    return out


def t_bounds(g: Graph, part: Partition, method="auto"):
    """``(t_LB, t_UB)``: min_k S_2:K(L_k) divided by (K-1) n_max and (K-1) n_min."""
    K = part.K
    for k in range(K):
        if part.sizes[k] < K:
            raise ClusterTooSmallError(k, int(part.sizes[k]), K)
    sums = [partial_eigen_sum(laplacian(subgraph(g, part.members(k))), K, method=method)
            for k in range(K)]
    s = max(0.0, min(sums))
    return s / ((K - 1) * part.n_max), s / ((K - 1) * part.n_min)


def t_lb_estimate(g: Graph, part: Partition, method="auto") -> float:
    """Estimated lower bound on the phase-transition threshold.

    Raises
    ------
    ClusterTooSmallError
        If any cluster has fewer than K nodes.
    """
    return t_bounds(g, part, method)[0]


def homogeneous_estimates(g: Graph, part: Partition, pairs: Sequence[PairStats] = None,
                          compute_t_lb=True) -> HomogeneousStats:
    """Pooled estimates under a homogeneous interconnection model."""
    if part.K < 2:
        raise ValueError("homogeneous estimates need K >= 2")
    cross = g.m - int(part.within_edges.sum())
    denom = g.n**2 - int(np.sum(part.sizes.astype(np.int64) ** 2))
    p_hat = 2.0 * cross / denom
    if pairs is None:
        pairs = pair_estimates(g, part)
    w_total = float(sum(pr.w_sum for pr in pairs))
    has = cross > 0
    w_bar = w_total / cross if has else 1.0
    t_lb = None
    if compute_t_lb:
        try:
            t_lb = t_lb_estimate(g, part)
        except ClusterTooSmallError:
            t_lb = None
    return HomogeneousStats(p_hat, w_bar, p_hat * w_bar, t_lb, cross, w_total, has)


# --------------------------------------------------------------- GLRT -----

@dataclass(frozen=True)
class GlrtResult:
    passed: bool
    statistic: float
    lower: float
    upper: float
    dof: int
    side: Optional[str]  # "low" or "high" on failure


def glrt_statistic(pairs: Sequence[PairStats], p_hat: float) -> float:
    """Twice the log-likelihood ratio of pairwise vs pooled interconnection."""
    alt = 0.0
    cross = 0
    total = 0
    for pr in pairs:
        cross += pr.m_ij
        total += pr.pairs_possible
        if 0.0 < pr.p_hat < 1.0:
            alt += (special.xlogy(pr.m_ij, pr.p_hat)
                    + special.xlogy(pr.pairs_possible - pr.m_ij, 1.0 - pr.p_hat))
    # n^2 - sum n_k^2 equals twice the number of cross pairs
    null_scale = 2 * total - 2 * cross
    with np.errstate(divide="ignore"):
        null = special.xlogy(2 * cross, p_hat) + special.xlogy(null_scale, 1.0 - p_hat)
    return float(2.0 * alt - null)


def glrt_homogeneity_test(pairs: Sequence[PairStats], hom: HomogeneousStats,
                          alpha: float) -> GlrtResult:
    """Two-sided Wilks interval check of the pooled estimate.

    Passes iff ``xi(q, 1 - alpha/2) <= statistic <= xi(q, alpha/2)`` with
    ``q = C(K, 2) - 1``. Needs K >= 3.
    """
    if len(pairs) < 3:
        raise ValueError("GLRT needs at least 3 cluster pairs (K >= 3)")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    q = len(pairs) - 1
    stat = glrt_statistic(pairs, hom.p_hat)
    lo = chi_square_quantile(q, 1.0 - alpha / 2.0)
    hi = chi_square_quantile(q, alpha / 2.0)
    if not math.isfinite(stat):
        return GlrtResult(False, math.inf, lo, hi, q, "high")
    side = "low" if stat < lo else "high" if stat > hi else None
    return GlrtResult(side is None, stat, lo, hi, q, side)


# -------------------------------------------------- inhomogeneous test ----

def anscombe(x, n_i: int, n_j: int):
    """Variance-stabilised arcsine-root transform of a proportion."""
    nn = float(n_i) * float(n_j)
    arg = (np.asarray(x, dtype=np.float64) + ANSCOMBE_C / nn) / (1.0 + 2.0 * ANSCOMBE_C / nn)
    if np.any(arg < -1e-12) or np.any(arg > 1.0 + 1e-12):
        raise ValueError("anscombe argument outside [0, 1]")
    out = np.arcsin(np.sqrt(np.clip(arg, 0.0, 1.0)))
    return float(out) if np.ndim(out) == 0 else out


def f_ij(x: float, pair: PairStats) -> float:
    """Per-pair factor of the inhomogeneous phase-transition product.

    ``x`` above 1 is clamped to 1: no proportion exceeds it.
    """
    p = pair.p_hat
    if 0.0 < p < 1.0:
        xc = min(max(x, 0.0), 1.0)
        scale = math.sqrt(4.0 * pair.n_i * pair.n_j + 2.0)
        return normal_cdf(scale * (anscombe(xc, pair.n_i, pair.n_j)
                                   - anscombe(p, pair.n_i, pair.n_j)))
    return 1.0 if p < x else 0.0


def inhomogeneous_pt_test(pairs: Sequence[PairStats], t_lb: float, alpha_prime: float):
    """Return ``(passed, product, factors)``; passes iff product >= 1 - alpha'."""
    if t_lb < 0:
        raise ValueError("t_lb must be nonnegative")
    if not 0.0 < alpha_prime < 1.0:
        raise ValueError("alpha_prime must be in (0, 1)")
    factors = []
    prod = 1.0
    for pr in pairs:  # (i, j) lexicographic: fixed reduction order
        f = f_ij(t_lb / pr.w_bar, pr)
        factors.append(f)
        prod *= f
    return prod >= 1.0 - alpha_prime, prod, factors
