"""Random unit directions and matrix-free scatter quadratic forms.

The within-class form of direction ``v`` is ``sum_i mean_j (v.(x_ij - xbar_i))^2``
and the between-class form is ``sum_i (m_i/m) (v.(xbar_i - xbar))^2``; neither
needs an ``n x n`` matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import ClassPartition, LabeledDataset, partition

__all__ = [
    "QuadraticForms",
    "sample_unit_vector",
    "quadratic_forms",
    "quadratic_forms_batch",
    "scatter_matrices",
]

# Above this many rows per class, column means are accumulated blockwise.
_BLOCKED_SUM_ROWS = 1 << 20
_BLOCK = 4096


@dataclass(frozen=True)
class QuadraticForms:
    within_total: float
    within_per_class: np.ndarray
    between: float

    @property
    def ratio(self) -> float:
        """Fisher criterion along the direction; ``nan`` when both forms vanish."""
        if self.within_total > 0:
            return self.between / self.within_total
        return np.inf if self.between > 0 else np.nan


def sample_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian draw scaled to unit Euclidean norm."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    while True:
        v = rng.standard_normal(n)
        norm = np.linalg.norm(v)
        if norm > 0:
            return v / norm


def _col_mean(a: np.ndarray) -> np.ndarray:
    if a.shape[0] <= _BLOCKED_SUM_ROWS:
        return a.mean(axis=0)
    # blockwise partial sums keep the error growth near O(sqrt(m)) instead of O(m)
    partial = np.add.reduceat(a, np.arange(0, a.shape[0], _BLOCK), axis=0)
    return partial.sum(axis=0) / a.shape[0]


def _center(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two-pass centering with a correction pass.

    Identical rows come out exactly zero, which keeps the within-class form
    of a collapsed class at exactly 0.
    """
    mu = _col_mean(a)
    r = a - mu
    corr = _col_mean(r)
    r -= corr
    return r, mu + corr


def quadratic_forms_batch(ds: LabeledDataset, part: ClassPartition | None,
                          vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate the forms for every column of ``vectors`` (shape ``(n, k)``).

    Returns ``(within_total, within_per_class, between)`` with shapes ``(k,)``,
    ``(c, k)`` and ``(k,)``.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if vectors.shape[0] != ds.n:
        raise ValueError(f"direction has length {vectors.shape[0]}, dataset has n={ds.n}")
    part = partition(ds) if part is None else part
    c, k = part.n_classes, vectors.shape[1]
    within = np.empty((c, k))
    means = np.empty((c, ds.n))
    for i, rows in enumerate(part.per_class_rows):
        resid, means[i] = _center(ds.data[rows])
        proj = resid @ vectors
        within[i] = np.einsum("jk,jk->k", proj, proj) / rows.size
    weights = part.counts / part.counts.sum()
    gmean = weights @ means
    proj_means = (means - gmean) @ vectors
    between = weights @ (proj_means * proj_means)
    return within.sum(axis=0), within, between


def quadratic_forms(ds: LabeledDataset, part: ClassPartition | None, v) -> QuadraticForms:
    """Within-total, per-class within and between forms along ``v``.

    ``v`` is used as given (no normalization), so the forms scale with
    ``|v|^2`` while their ratio does not.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("v must be a vector")
    wt, wc, b = quadratic_forms_batch(ds, part, v)
    return QuadraticForms(float(wt[0]), wc[:, 0].copy(), float(b[0]))


def scatter_matrices(ds: LabeledDataset, part: ClassPartition | None = None):
    """Explicit normalized scatter matrices.

    Returns ``(S_w, S_b, S_w_per_class)`` where ``S_w_per_class`` has shape
    ``(c, n, n)`` and ``S_w`` is its sum. Memory is ``O(c n^2)``.
    """
    part = partition(ds) if part is None else part
    c, n = part.n_classes, ds.n
    per_class = np.empty((c, n, n))
    means = np.empty((c, n))
    for i, rows in enumerate(part.per_class_rows):
        resid, means[i] = _center(ds.data[rows])
        per_class[i] = resid.T @ resid / rows.size
    weights = part.counts / part.counts.sum()
    diff = means - weights @ means
    s_b = (diff * weights[:, None]).T @ diff
    s_w = per_class.sum(axis=0)
    # symmetrize away rounding asymmetry from the products
    return (s_w + s_w.T) / 2, (s_b + s_b.T) / 2, (per_class + per_class.transpose(0, 2, 1)) / 2
