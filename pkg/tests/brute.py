"""Slow reference implementations used as oracles by the metric tests."""
import itertools
import math
from collections import Counter


def set_partitions(n, max_blocks):
    """All label vectors in restricted-growth form (each partition once)."""
    def rec(prefix, used):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(min(used + 1, max_blocks)):
            yield from rec(prefix + [b], max(used, b + 1))
    yield from rec([], 0)


def pair_agreement(a, b):
    both = same_a = same_b = agree = 0
    pairs = list(itertools.combinations(range(len(a)), 2))
    for i, j in pairs:
        sa, sb = a[i] == a[j], b[i] == b[j]
        both += sa and sb
        same_a += sa
        same_b += sb
        agree += sa == sb
    return both, same_a, same_b, agree, len(pairs)


def rand_index(a, b):
    *_, agree, total = pair_agreement(a, b)
    return agree / total if total else 1.0


def f_measure(a, truth):
    both, same_a, same_t, _, _ = pair_agreement(a, truth)
    if same_a == 0 or same_t == 0 or both == 0:
        return 0.0
    p, r = both / same_a, both / same_t
    return 2 * p * r / (p + r)


def nmi(a, b):
    n = len(a)
    ca, cb, cab = Counter(a), Counter(b), Counter(zip(a, b))
    h = lambda c: -sum(v / n * math.log(v / n) for v in c.values())  # noqa: E731
    ha, hb = h(ca), h(cb)
    if ha == 0 and hb == 0:
        return 1.0
    mi = sum(v / n * math.log(v * n / (ca[x] * cb[y])) for (x, y), v in cab.items())
    return mi / ((ha + hb) / 2)


def cut_and_volume(edges, labels):
    """edges: iterable of (u, v, w). Returns dicts keyed by cluster id."""
    cut, vol = Counter(), Counter()
    for u, v, w in edges:
        vol[labels[u]] += w
        vol[labels[v]] += w
        if labels[u] != labels[v]:
            cut[labels[u]] += w
            cut[labels[v]] += w
    return cut, vol


def conductance(edges, labels):
    cut, vol = cut_and_volume(edges, labels)
    total = sum(vol.values())
    ks = sorted(set(labels))
    return sum(cut[k] / min(vol[k], total - vol[k]) for k in ks) / len(ks)


def normalized_cut(edges, labels):
    cut, vol = cut_and_volume(edges, labels)
    ks = sorted(set(labels))
    return sum(cut[k] / vol[k] for k in ks) / len(ks)
