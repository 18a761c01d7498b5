"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Also times one end-to-end ``run_amos`` call under each path by toggling
``_kernels.USE_NUMBA`` in-process.
"""
import argparse
import timeit
import warnings

import numpy as np

from amos import _kernels as kn
from amos.engine import AmosConfig, run_amos
from amos.rim import RimSpec, generate_rim


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kn.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    X = rng.standard_normal((20_000, 8))
    C = rng.standard_normal((10, 8))
    labels = rng.integers(0, 10, X.shape[0])
    g, truth = generate_rim(RimSpec.build([300] * 4, 0.05, seed=1))
    W = g.weights
    csr = (W.indptr.astype(np.int64), W.indices.astype(np.int64), W.data, truth.astype(np.int64), 4)

    cases = [
        ("assign_labels 20000x8, k=10", kn.assign_labels_numpy, kn.assign_labels_numba, (X, C)),
        ("centroid_sums 20000x8, k=10", kn.centroid_sums_numpy, kn.centroid_sums_numba, (X, labels, 10)),
        (f"node_cluster_counts n={g.n}, m={g.m}", kn.node_cluster_counts_numpy,
         kn.node_cluster_counts_numba, csr),
    ]
    print(f"{'kernel':<40}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, f_np, f_nb, a in cases:
        f_nb(*a)  # compile
        t_np = best_of(lambda: f_np(*a), args.repeat)
        t_nb = best_of(lambda: f_nb(*a), args.repeat)
        print(f"{name:<40}{t_np * 1e3:>10.2f}{t_nb * 1e3:>10.2f}{t_np / t_nb:>8.1f}x")

    g2, _ = generate_rim(RimSpec.build([200] * 3, 0.02, seed=2))
    warnings.simplefilter("ignore")
    for use in (False, True):
        kn.USE_NUMBA = use
        run_amos(g2, AmosConfig(restarts=2))
        t = best_of(lambda: run_amos(g2, AmosConfig()), max(1, args.repeat // 2))
        print(f"run_amos n={g2.n} ({'numba' if use else 'numpy'}): {t:.3f}s")


if __name__ == "__main__":
    main()
