import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from amos.errors import ClusterTooSmallError, DegenerateVTestError
from amos.kmeans import Partition
from amos.rim import RimSpec, generate_rim
from amos.stats import (
    PairStats, anscombe, chi_square_quantile, f_ij, glrt_homogeneity_test, glrt_statistic,
    homogeneous_estimates, inhomogeneous_pt_test, normal_cdf, pair_estimates, t_bounds,
    t_lb_estimate, v_test_from_row_sums, v_test_pvalue,
)

from conftest import complete, make_graph, path


def scalar_vtest(rows):
    """Independent loop-based V-test."""
    n_i, n_j = len(rows), len(rows[0])
    X = Y = 0
    for r in rows:
        x = sum(r)
        y = n_j - x
        X += x * x - x
        Y += y * y - y
    N = n_i * n_j * (n_j - 1)
    z = ((math.sqrt(X) + math.sqrt(Y)) ** 2 - N) / math.sqrt(2 * N)
    phi = 0.5 * math.erfc(-z / math.sqrt(2))
    return 2 * min(phi, 1 - phi)


def pair(n_i=10, n_j=10, m=20, w_bar=1.0):
    p = m / (n_i * n_j)
    return PairStats(0, 1, n_i, n_j, m, p, m * w_bar, w_bar, m > 0, p * w_bar, 0.0, 1.0)


# ------------------------------------------------------------- V-test ---

def test_vtest_constant_matrices():
    assert v_test_pvalue(np.zeros((4, 5))) == 1.0
    assert v_test_pvalue(np.ones((4, 5))) == 1.0


def test_vtest_hand_example():
    z, p = v_test_from_row_sums([2, 0], 3)
    V = (math.sqrt(2) + math.sqrt(6)) ** 2
    assert V == pytest.approx(14.9282, abs=1e-4)
    assert z == pytest.approx(0.5977, abs=1e-4)
    assert p == pytest.approx(0.550, abs=1e-3)
    assert v_test_pvalue([[1, 1, 0], [0, 0, 0]]) == pytest.approx(scalar_vtest([[1, 1, 0], [0, 0, 0]]),
                                                                  abs=1e-12)


def test_vtest_degenerate_shape():
    with pytest.raises(DegenerateVTestError):
        v_test_pvalue(np.ones((3, 1)))


def test_vtest_matches_scalar_oracle(rng):
    for _ in range(100):
        shape = tuple(rng.integers([1, 2], 13))
        C = (rng.random(shape) < rng.uniform(0.1, 0.9)).astype(int)
        assert v_test_pvalue(C) == pytest.approx(scalar_vtest(C.tolist()), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_vtest_row_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    C = (rng.random(tuple(rng.integers([1, 2], 10))) < 0.4).astype(int)
    p = v_test_pvalue(C)
    assert 0.0 <= p <= 1.0
    assert v_test_pvalue(C[rng.permutation(C.shape[0])]) == p


def test_vtest_uniform_under_rim(rng):
    ps = [v_test_pvalue(rng.random((100, 100)) < 0.1) for _ in range(500)]
    assert sps.kstest(ps, "uniform").statistic <= 0.1


def test_vtest_detects_row_heterogeneity(rng):
    C = np.vstack([rng.random((50, 100)) < 0.02, rng.random((50, 100)) < 0.3])
    assert v_test_pvalue(C) < 1e-5


# --------------------------------------------------- special functions ---

def test_normal_cdf():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(40.0) == 1.0 and normal_cdf(-40.0) == 0.0
    z = np.linspace(-8, 8, 101)
    np.testing.assert_allclose(normal_cdf(z) + normal_cdf(-z), 1.0, atol=1e-15)
    np.testing.assert_allclose(normal_cdf(z), sps.norm.cdf(z), atol=1e-12)


def test_chi_square_quantile():
    assert chi_square_quantile(1, 0.05) == pytest.approx(3.8415, abs=1e-3)
    assert chi_square_quantile(2, 0.05) == pytest.approx(5.9915, abs=1e-3)
    assert chi_square_quantile(2, 0.5) == pytest.approx(2 * math.log(2), rel=1e-10)
    # q = 2 is exponential with mean 2: closed form -2 ln a
    for a in (0.001, 0.1, 0.9, 0.975):
        assert chi_square_quantile(2, a) == pytest.approx(-2 * math.log(a), rel=1e-10)
    for q in (1, 3, 7, 20):
        assert chi_square_quantile(q, 0.025) == pytest.approx(sps.chi2.isf(0.025, q), rel=1e-10)
    for bad in ((0, 0.5), (1.5, 0.5), (2, 0.0), (2, 1.0)):
        with pytest.raises(ValueError):
            chi_square_quantile(*bad)


# --------------------------------------------------------- estimates ----

def test_pair_estimates_no_cross_edges():
    g = make_graph(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    (pr,) = pair_estimates(g, Partition.from_labels(g, [0, 0, 0, 1, 1, 1]))
    assert pr.p_hat == 0 and pr.t_hat == 0 and pr.p_value == 1.0 and not pr.has_edges
    assert pr.w_bar == 1.0


def test_pair_estimates_complete_bipartite_cross():
    g = complete(6)
    (pr,) = pair_estimates(g, Partition.from_labels(g, [0, 0, 0, 1, 1, 1]))
    assert pr.p_hat == 1.0 and pr.m_ij == 9 and pr.p_value == 1.0


def test_pair_estimates_weights_and_orientation():
    g = make_graph(5, [(0, 1), (2, 3), (3, 4), (2, 4), (0, 2), (1, 3)], [1, 1, 1, 1, 2, 4])
    (pr,) = pair_estimates(g, Partition.from_labels(g, [0, 0, 1, 1, 1]), both_orientations=True)
    assert (pr.n_i, pr.n_j, pr.m_ij) == (2, 3, 2)
    assert pr.p_hat == pytest.approx(2 / 6) and pr.w_bar == pytest.approx(3)
    assert pr.t_hat == pytest.approx(1.0)
    assert pr.p_value == pytest.approx(scalar_vtest([[1, 0, 0], [0, 1, 0]]), abs=1e-12)
    assert pr.p_value_reverse == pytest.approx(scalar_vtest([[1, 0], [0, 1], [0, 0]]), abs=1e-12)


def test_pair_estimates_singleton_autopasses():
    g = make_graph(4, [(0, 1), (1, 2), (2, 3)])
    prs = pair_estimates(g, Partition.from_labels(g, [0, 0, 0, 1]))
    assert prs[0].degenerate and prs[0].p_value == 1.0


def test_pair_p_hat_binomial_ci():
    spec = RimSpec.build([100, 100], [[0, 0.1], [0.1, 0]], seed=7)
    g, lab = generate_rim(spec)
    (pr,) = pair_estimates(g, Partition.from_labels(g, lab))
    assert abs(pr.p_hat - 0.1) <= 3 * math.sqrt(0.1 * 0.9 / 10_000)


def test_homogeneous_estimates_examples():
    g = make_graph(4, [(0, 1), (2, 3), (1, 2)])
    hom = homogeneous_estimates(g, Partition.from_labels(g, [0, 0, 1, 1]))
    assert hom.p_hat == pytest.approx(2 * 1 / (16 - 8))
    assert hom.t_hat == pytest.approx(0.25)
    g2 = make_graph(4, [(0, 1), (2, 3)])
    assert homogeneous_estimates(g2, Partition.from_labels(g2, [0, 0, 1, 1])).p_hat == 0
    g3 = complete(7)
    hom3 = homogeneous_estimates(g3, Partition.from_labels(g3, [0, 1, 2, 0, 1, 2, 2]))
    assert hom3.p_hat == 1.0


def test_homogeneous_weight_average():
    g = make_graph(4, [(0, 1), (2, 3), (1, 2), (0, 3)], [1, 1, 2, 6])
    hom = homogeneous_estimates(g, Partition.from_labels(g, [0, 0, 1, 1]))
    assert hom.w_bar == pytest.approx(4) and hom.t_hat == pytest.approx(0.5 * 4)


@pytest.mark.parametrize("m,K", [(4, 2), (5, 3), (6, 4), (6, 6)])
def test_t_lb_complete_clusters(m, K):
    g = make_graph(m * K, [(a + k * m, b + k * m) for k in range(K)
                           for a in range(m) for b in range(a + 1, m)] +
                   [(k * m, (k + 1) * m) for k in range(K - 1)])
    part = Partition.from_labels(g, np.repeat(np.arange(K), m))
    assert t_lb_estimate(g, part) == pytest.approx(1.0)
    assert t_bounds(g, part)[1] == pytest.approx(1.0)


def test_t_lb_path_clusters():
    g = make_graph(6, [(0, 1), (1, 2), (3, 4), (4, 5), (2, 3)])
    assert t_lb_estimate(g, Partition.from_labels(g, [0, 0, 0, 1, 1, 1])) == pytest.approx(1 / 3)


def test_t_lb_disconnected_cluster_gives_zero():
    g = make_graph(6, [(0, 1), (0, 2), (3, 4), (4, 5), (2, 3)])
    part = Partition.from_labels(g, [0, 0, 1, 1, 1, 0])  # cluster 0 = {0,1,2,5}, node 5 isolated inside
    assert t_lb_estimate(g, part) == pytest.approx(0.0, abs=1e-12)


def test_t_bounds_unequal_sizes():
    g = make_graph(7, [(a, b) for a in range(4) for b in range(a + 1, 4)] +
                   [(4, 5), (5, 6), (4, 6), (0, 4)])
    lb, ub = t_bounds(g, Partition.from_labels(g, [0, 0, 0, 0, 1, 1, 1]))
    # lambda_2(K4) = 4, lambda_2(K3) = 3 -> min 3
    assert lb == pytest.approx(3 / 4) and ub == pytest.approx(3 / 3)


def test_t_lb_cluster_too_small():
    g = path(5)
    with pytest.raises(ClusterTooSmallError):
        t_lb_estimate(g, Partition.from_labels(g, [0, 0, 1, 1, 2]))
    hom = homogeneous_estimates(g, Partition.from_labels(g, [0, 0, 1, 1, 2]))
    assert hom.t_lb is None


# --------------------------------------------------------------- GLRT ---

def test_glrt_indicator_semantics():
    # K = 3, every pair complete or empty: only pooled terms remain
    pairs = [pair(3, 3, 9), pair(3, 3, 0), pair(3, 3, 0)]
    p = 9 / 27
    stat = glrt_statistic(pairs, p)
    expected = -(2 * 9 * math.log(p) + (54 - 18) * math.log(1 - p))
    assert stat == pytest.approx(expected)


def test_glrt_nonnegative(rng):
    for _ in range(200):
        pairs = []
        for _ in range(int(rng.integers(3, 10))):
            n_i, n_j = rng.integers(1, 30, 2)
            pairs.append(pair(int(n_i), int(n_j), int(rng.integers(0, n_i * n_j + 1))))
        total = sum(p.pairs_possible for p in pairs)
        cross = sum(p.m_ij for p in pairs)
        if not 0 < cross < total:
            continue
        assert glrt_statistic(pairs, cross / total) >= -1e-9


def test_glrt_infinite_statistic_fails():
    from amos.stats import HomogeneousStats

    pairs = [pair(3, 3, 2), pair(3, 3, 2), pair(3, 3, 2)]
    hom = HomogeneousStats(0.0, 1.0, 0.0, None, 6, 6.0, True)  # inconsistent p_hat = 0
    r = glrt_homogeneity_test(pairs, hom, 0.05)
    assert not r.passed and r.side == "high" and math.isinf(r.statistic)


def test_glrt_low_side_rejection():
    from amos.stats import HomogeneousStats

    pairs = [pair(10, 10, 20)] * 3
    hom = HomogeneousStats(0.2, 1.0, 0.2, None, 60, 60.0, True)
    r = glrt_homogeneity_test(pairs, hom, 0.05)
    assert r.statistic == pytest.approx(0, abs=1e-9)
    assert not r.passed and r.side == "low" and r.dof == 2
    assert r.lower == pytest.approx(sps.chi2.isf(0.975, 2))


def test_glrt_needs_three_pairs():
    from amos.stats import HomogeneousStats

    with pytest.raises(ValueError):
        glrt_homogeneity_test([pair()], HomogeneousStats(0.2, 1, 0.2, None, 20, 20.0, True), 0.05)


def _glrt_on(spec):
    g, lab = generate_rim(spec)
    part = Partition.from_labels(g, lab)
    prs = pair_estimates(g, part)
    return glrt_homogeneity_test(prs, homogeneous_estimates(g, part, prs, compute_t_lb=False), 0.05)


def test_glrt_monte_carlo_small():
    # fuller calibration lives in the acceptance suite
    passes = sum(_glrt_on(RimSpec.build([100] * 3, 0.1, seed=s)).passed for s in range(60))
    assert passes / 60 >= 0.85
    P = np.array([[0, 0.3, 0.01], [0.3, 0, 0.01], [0.01, 0.01, 0]])
    rejects = sum(not _glrt_on(RimSpec.build([100] * 3, P, seed=s)).passed for s in range(20))
    assert rejects == 20


# -------------------------------------------------- inhomogeneous test ---

def test_anscombe_properties():
    assert 0 < anscombe(1.0, 3, 4) < math.pi / 2
    assert anscombe(0.0, 10**6, 10**6) < 1e-6
    assert anscombe(0.2, 10, 10) < anscombe(0.3, 10, 10)
    x = np.linspace(0, 1, 50)
    assert np.all(np.diff(anscombe(x, 5, 7)) > 0)
    with pytest.raises(ValueError):
        anscombe(1.5, 2, 2)


def test_f_ij_examples():
    pr = pair(10, 10, 30)
    assert f_ij(0.3, pr) == pytest.approx(0.5)
    empty = pair(10, 10, 0)
    assert f_ij(0.01, empty) == 1.0 and f_ij(0.0, empty) == 0.0
    full = pair(10, 10, 100)
    assert f_ij(0.5, full) == 0.0 and f_ij(1.0, full) == 0.0
    # clamped above 1
    assert f_ij(5.0, pr) == f_ij(1.0, pr)


def test_f_ij_matches_formula():
    pr = pair(7, 9, 20)
    x = 0.45
    A = lambda v: math.asin(math.sqrt((v + 0.375 / 63) / (1 + 0.75 / 63)))  # noqa: E731
    expected = 0.5 * math.erfc(-math.sqrt(4 * 63 + 2) * (A(x) - A(20 / 63)) / math.sqrt(2))
    assert f_ij(x, pr) == pytest.approx(expected, abs=1e-14)


@settings(max_examples=80, deadline=None)
@given(n_i=st.integers(1, 40), n_j=st.integers(1, 40), frac=st.floats(0, 1),
       xs=st.lists(st.floats(0, 2), min_size=2, max_size=6))
def test_f_ij_nondecreasing(n_i, n_j, frac, xs):
    pr = pair(n_i, n_j, int(round(frac * n_i * n_j)))
    vals = [f_ij(x, pr) for x in sorted(xs)]
    assert all(0 <= v <= 1 for v in vals)
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_inhomogeneous_pt_examples():
    empties = [pair(5, 5, 0)] * 3
    ok, prod, factors = inhomogeneous_pt_test(empties, 0.5, 0.05)
    assert ok and prod == 1.0 and factors == [1.0] * 3
    ok, prod, _ = inhomogeneous_pt_test(empties[:2] + [pair(5, 5, 25)], 0.5, 0.05)
    assert not ok and prod == 0.0
    with pytest.raises(ValueError):
        inhomogeneous_pt_test(empties, -1.0, 0.05)


def test_inhomogeneous_pt_uses_per_pair_weight():
    pr = pair(10, 10, 30, w_bar=2.0)
    _, prod, (f,) = inhomogeneous_pt_test([pr], 0.6, 0.05)
    assert f == pytest.approx(0.5) and prod == f


def test_inhomogeneous_pt_monte_carlo():
    P = np.array([[0, 0.01, 0.03], [0.01, 0, 0.03], [0.03, 0.03, 0]])
    passes = 0
    for s in range(40):
        g, lab = generate_rim(RimSpec.build([100] * 3, P, seed=s))
        part = Partition.from_labels(g, lab)
        passes += inhomogeneous_pt_test(pair_estimates(g, part), t_lb_estimate(g, part), 0.05)[0]
    assert passes / 40 >= 0.9
