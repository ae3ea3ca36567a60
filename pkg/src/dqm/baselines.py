"""Descriptor baselines: maximum Fisher ratio (F1), MST boundary fraction (N1)
and leave-one-out 1-NN error (N3).

N1 and N3 never store an ``m x m`` distance matrix; N1 runs Prim's algorithm
with distances recomputed from the newest tree vertex, N3 scans row blocks.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledDataset, partition, standardize as standardize_dataset

__all__ = ["BaselineReport", "f1", "n1", "n3", "fisher_ratios", "baselines", "MEASURES"]

MEASURES = ("f1", "n1", "n3")


@dataclass
class BaselineReport:
    f1: float | None = None
    n1: float | None = None
    n3: float | None = None
    elapsed_s: dict = field(default_factory=dict)

    @property
    def f1_perfect_separator(self) -> bool:
        return self.f1 is not None and math.isinf(self.f1)

    def to_dict(self) -> dict:
        out = {}
        for name in MEASURES:
            v = getattr(self, name)
            if v is None:
                continue
            out[name] = v if math.isfinite(v) else None
        if self.f1 is not None:
            out["f1_perfect_separator"] = self.f1_perfect_separator
        out["elapsed_s"] = dict(self.elapsed_s)
        return out


def fisher_ratios(ds: LabeledDataset) -> np.ndarray:
    """Per-feature multi-class Fisher ratio.

    ``sum_i p_i (mu_ik - mu_k)^2 / sum_i p_i var_ik`` with ``p_i = m_i / m`` and
    population variances. A feature with zero pooled variance scores 0 when
    the class means coincide and ``inf`` otherwise.
    """
    part = partition(ds)
    p = part.counts / ds.m
    means = np.empty((ds.c, ds.n))
    var = np.empty((ds.c, ds.n))
    for i, rows in enumerate(part.per_class_rows):
        x = ds.data[rows]
        mu = x.mean(axis=0)
        r = x - mu
        corr = r.mean(axis=0)
        r -= corr
        means[i] = mu + corr
        var[i] = np.mean(r * r, axis=0)
    overall = p @ means
    num = p @ (means - overall) ** 2
    den = p @ var
    scale = np.maximum(np.abs(means).max(axis=0), 1.0)
    separated = num > (64 * np.finfo(float).eps * scale) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(den > 0, num / den, np.where(separated, np.inf, 0.0))
    return ratios


def f1(ds: LabeledDataset) -> float:
    return float(fisher_ratios(ds).max())


def _sq_norms(x: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", x, x)


def n1(ds: LabeledDataset) -> float:
    """Fraction of points touching an MST edge that joins two classes.

    Prim's algorithm over the complete Euclidean graph, O(m^2 n) time and
    O(m) extra memory. The next vertex is the closest outside the tree; ties
    go to the lower row index.
    """
    x, y, m = ds.data, ds.labels, ds.m
    if m < 2:
        raise ValueError("n1 needs at least two points")
    sq = _sq_norms(x)
    in_tree = np.zeros(m, dtype=bool)
    best = np.full(m, np.inf)
    parent = np.full(m, -1)
    boundary = np.zeros(m, dtype=bool)
    cur = 0
    in_tree[0] = True
    for _ in range(m - 1):
        d = np.maximum(sq + sq[cur] - 2.0 * (x @ x[cur]), 0.0)
        closer = ~in_tree & (d < best)
        best[closer] = d[closer]
        parent[closer] = cur
        nxt = int(np.argmin(np.where(in_tree, np.inf, best)))
        in_tree[nxt] = True
        p = parent[nxt]
        if y[p] != y[nxt]:
            boundary[p] = boundary[nxt] = True
        cur = nxt
    return float(boundary.sum() / m)


def n3(ds: LabeledDataset, block: int = 256) -> float:
    """Leave-one-out 1-NN error rate (Euclidean, ties to the lower row index)."""
    x, y, m = ds.data, ds.labels, ds.m
    if m < 2:
        raise ValueError("n3 needs at least two points")
    sq = _sq_norms(x)
    errors = 0
    for start in range(0, m, block):
        stop = min(start + block, m)
        d = sq[start:stop, None] + sq[None, :] - 2.0 * (x[start:stop] @ x.T)
        np.maximum(d, 0.0, out=d)
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        nn = np.argmin(d, axis=1)
        errors += int(np.count_nonzero(y[nn] != y[start:stop]))
    return errors / m


_FUNCS = {"f1": f1, "n1": n1, "n3": n3}


def baselines(ds: LabeledDataset, measures=MEASURES, standardize: bool = False) -> BaselineReport:
    """Compute the requested subset of F1, N1, N3 with per-measure timing."""
    unknown = set(measures) - set(MEASURES)
    if unknown:
        raise ValueError(f"unknown measures: {sorted(unknown)}")
    if standardize:
        ds = standardize_dataset(ds)
    report = BaselineReport()
    for name in MEASURES:
        if name in measures:
            t0 = time.perf_counter()
            setattr(report, name, _FUNCS[name](ds))
            report.elapsed_s[name] = time.perf_counter() - t0
    return report
