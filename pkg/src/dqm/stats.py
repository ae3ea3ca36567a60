"""Bootstrap moments and Pearson / Spearman correlation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PairedSeries",
    "bootstrap_moments",
    "rankdata",
    "pearson",
    "spearman",
    "correlate",
]


@dataclass(frozen=True)
class PairedSeries:
    xs: np.ndarray
    ys: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64).ravel()
        ys = np.asarray(self.ys, dtype=np.float64).ravel()
        if xs.shape != ys.shape:
            raise ValueError(f"series lengths differ: {xs.size} vs {ys.size}")
        if np.isnan(xs).any() or np.isnan(ys).any():
            raise ValueError("series contain NaN")
        if self.labels and len(self.labels) != xs.size:
            raise ValueError("labels length does not match series length")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self):
        return self.xs.size


def bootstrap_moments(samples) -> tuple[float, float]:
    """Mean and variance of bootstrap statistics: ``mean(s)`` and ``mean(s^2) - mean(s)^2``.

    The sums run on values shifted by the first sample, which leaves the
    variance unchanged but avoids cancellation when the spread is small
    relative to the mean. The variance is clamped at zero.
    """
    s = np.asarray(samples, dtype=np.float64).ravel()
    if s.size == 0:
        raise ValueError("bootstrap_moments needs at least one sample")
    shift = s[0]
    d = s - shift
    mean_d = d.mean()
    var = float(np.mean(d * d) - mean_d * mean_d)
    return float(shift + mean_d), max(var, 0.0)


def rankdata(x) -> np.ndarray:
    """1-based ranks; tied values share the average of their positions."""
    a = np.asarray(x, dtype=np.float64).ravel()
    order = np.argsort(a, kind="mergesort")
    sorted_a = a[order]
    # start index of each run of equal values
    starts = np.flatnonzero(np.r_[True, sorted_a[1:] != sorted_a[:-1]])
    ends = np.r_[starts[1:], a.size]
    avg = (starts + ends + 1) / 2.0
    ranks = np.empty(a.size)
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def pearson(x, y) -> float | None:
    """Product-moment correlation, or None when either series has zero variance."""
    a = np.asarray(x, dtype=np.float64).ravel()
    b = np.asarray(y, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ValueError(f"series lengths differ: {a.size} vs {b.size}")
    if a.size < 2:
        return None
    a = a - a.mean()
    b = b - b.mean()
    saa, sbb = float(a @ a), float(b @ b)
    if saa <= 0 or sbb <= 0:
        return None
    r = float(a @ b) / math.sqrt(saa * sbb)
    return min(1.0, max(-1.0, r))


def spearman(x, y) -> float | None:
    return pearson(rankdata(x), rankdata(y))


def correlate(series: PairedSeries) -> dict:
    """Both correlations plus absolute values, as reported in the result tables.

    Undefined correlations come back as None with a ``diagnostic`` message.
    """
    p = pearson(series.xs, series.ys)
    s = spearman(series.xs, series.ys)
    out = {
        "n": len(series),
        "pearson": p,
        "spearman": s,
        "abs_pearson": None if p is None else abs(p),
        "abs_spearman": None if s is None else abs(s),
    }
    if p is None or s is None:
        out["diagnostic"] = "undefined: fewer than two points or a zero-variance series"
    return out
