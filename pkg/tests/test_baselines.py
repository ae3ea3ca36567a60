import math

import numpy as np
import pytest
from scipy.stats import ortho_group

from dqm import LabeledDataset, baselines, f1, n1, n3
from dqm.baselines import fisher_ratios


def brute_n3(ds):
    pts = ds.data.tolist()
    errors = 0
    for i, p in enumerate(pts):
        best, best_j = math.inf, -1
        for j, q in enumerate(pts):
            if j != i:
                d = math.dist(p, q)
                if d < best:
                    best, best_j = d, j
        errors += ds.labels[best_j] != ds.labels[i]
    return errors / len(pts)


def kruskal_n1(ds):
    pts = ds.data
    m = len(pts)
    edges = sorted((math.dist(pts[i], pts[j]), i, j) for i in range(m) for j in range(i + 1, m))
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    touched = set()
    for _, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            if ds.labels[i] != ds.labels[j]:
                touched.update((i, j))
    return len(touched) / m


def brute_fisher(ds):
    out = []
    for k in range(ds.n):
        col = ds.data[:, k]
        mu = col.mean()
        num = den = 0.0
        for i in range(ds.c):
            v = col[ds.labels == i]
            p = len(v) / ds.m
            num += p * (v.mean() - mu) ** 2
            den += p * v.var()
        out.append(num / den)
    return out


def _noisy(rng, m=120, n=4, c=3):
    y = np.arange(m) % c
    return LabeledDataset(rng.standard_normal((m, n)) + y[:, None] * 0.8, y)


# --- F1 ---------------------------------------------------------------------


def test_f1_zero_variance_is_perfect_separator():
    ds = LabeledDataset([[0.0], [0.0], [1.0], [1.0]], [0, 0, 1, 1])
    assert f1(ds) == math.inf
    rep = baselines(ds, ["f1"])
    assert rep.f1_perfect_separator and rep.to_dict()["f1"] is None


def test_f1_identical_distributions():
    ds = LabeledDataset([[-1.0], [1.0], [-1.0], [1.0]], [0, 0, 1, 1])
    assert f1(ds) == 0.0


def test_f1_takes_the_best_feature():
    # feature A: class means +-2, within variance 1 -> 4; feature B: means -+0.5 -> 0.25
    ds = LabeledDataset([[1, 0.5], [3, -1.5], [-3, 1.5], [-1, -0.5]], [0, 0, 1, 1])
    np.testing.assert_allclose(fisher_ratios(ds), [4.0, 0.25], rtol=1e-14)
    assert f1(ds) == pytest.approx(4.0, rel=1e-14)


def test_f1_matches_formula_on_gaussians():
    rng = np.random.default_rng(0)
    for _ in range(10):
        ds = _noisy(rng, n=5)
        np.testing.assert_allclose(fisher_ratios(ds), brute_fisher(ds), rtol=1e-10)


def test_f1_positive_affine_invariance():
    rng = np.random.default_rng(1)
    ds = _noisy(rng, n=6)
    scale, shift = rng.uniform(0.01, 100, 6), rng.uniform(-1e3, 1e3, 6)
    moved = LabeledDataset(ds.data * scale + shift, ds.labels)
    assert f1(moved) == pytest.approx(f1(ds), rel=1e-9)


# --- N1 ---------------------------------------------------------------------


def test_n1_single_bridge():
    ds = LabeledDataset([[0.0], [1.0], [10.0], [11.0]], [0, 0, 1, 1])
    assert n1(ds) == 0.5


def test_n1_interleaved():
    ds = LabeledDataset(np.arange(6.0)[:, None], [0, 1, 0, 1, 0, 1])
    assert n1(ds) == 1.0


def test_n1_far_tight_clusters():
    rng = np.random.default_rng(2)
    x = np.vstack([rng.normal(0, 0.01, (15, 3)), rng.normal(100, 0.01, (25, 3))])
    ds = LabeledDataset(x, [0] * 15 + [1] * 25)
    assert n1(ds) == 2 / 40


def test_n1_matches_kruskal():
    rng = np.random.default_rng(3)
    for _ in range(10):
        ds = _noisy(rng, m=int(rng.integers(10, 80)), n=int(rng.integers(1, 6)))
        assert n1(ds) == kruskal_n1(ds)


# --- N3 ---------------------------------------------------------------------


def test_n3_separated_clusters():
    rng = np.random.default_rng(4)
    x = np.vstack([rng.normal(0, 0.1, (20, 2)), rng.normal(50, 0.1, (20, 2))])
    assert n3(LabeledDataset(x, [0] * 20 + [1] * 20)) == 0.0


def test_n3_alternating_with_ties():
    ds = LabeledDataset(np.arange(4.0)[:, None], [0, 1, 0, 1])
    assert n3(ds) == 1.0


def test_n3_matches_brute_force():
    rng = np.random.default_rng(5)
    for m in (2, 3, 17, 130, 500):
        ds = _noisy(rng, m=max(m, 3), n=3)
        assert n3(ds) == brute_n3(ds)


def test_n3_block_size_irrelevant():
    ds = _noisy(np.random.default_rng(6), m=101)
    assert n3(ds, block=7) == n3(ds, block=1000)


# --- invariances ------------------------------------------------------------


def test_rigid_motion_invariance():
    rng = np.random.default_rng(7)
    for n in (2, 5, 10):
        ds = _noisy(rng, m=90, n=n)
        q = ortho_group.rvs(n, random_state=rng.integers(2**31))
        moved = LabeledDataset(ds.data @ q.T + rng.uniform(-5, 5, n), ds.labels)
        assert n1(moved) == n1(ds)
        assert n3(moved) == n3(ds)


def test_row_permutation_invariance():
    rng = np.random.default_rng(8)
    ds = _noisy(rng, m=75, n=4)
    perm = rng.permutation(ds.m)
    shuffled = LabeledDataset(ds.data[perm], ds.labels[perm])
    assert n1(shuffled) == n1(ds)
    assert n3(shuffled) == n3(ds)
    assert f1(shuffled) == pytest.approx(f1(ds), rel=1e-12)


def test_fractions_in_unit_interval():
    rep = baselines(_noisy(np.random.default_rng(9)))
    assert 0 <= rep.n1 <= 1 and 0 <= rep.n3 <= 1
    assert set(rep.elapsed_s) == {"f1", "n1", "n3"}


def test_baselines_subset_and_unknown():
    rep = baselines(_noisy(np.random.default_rng(10)), ["n3"])
    assert rep.f1 is None and rep.n1 is None and rep.n3 is not None
    with pytest.raises(ValueError):
        baselines(_noisy(np.random.default_rng(10)), ["n2"])
