"""Independent reference computations used by the tests.

Nothing here calls into dqm's numerical code.
"""

import math

import numpy as np


def explicit_scatter(ds):
    """Within, between and per-class scatter matrices accumulated point by point."""
    n, c = ds.n, ds.c
    per_class = np.zeros((c, n, n))
    means = np.zeros((c, n))
    counts = np.zeros(c)
    for i in range(c):
        rows = ds.data[ds.labels == i]
        counts[i] = len(rows)
        means[i] = rows.sum(axis=0) / len(rows)
        for x in rows:
            d = x - means[i]
            per_class[i] += np.outer(d, d)
        per_class[i] /= len(rows)
    overall = ds.data.sum(axis=0) / ds.m
    s_b = np.zeros((n, n))
    for i in range(c):
        d = means[i] - overall
        s_b += counts[i] / counts.sum() * np.outer(d, d)
    return per_class.sum(axis=0), s_b, per_class


def _det3(a):
    return (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))


def largest_generalized_eigenvalue(w, b):
    """Largest root of det(B - lambda W) = 0 for n <= 3, without an eigensolver.

    n=1: a quotient. n=2: the quadratic formula on the characteristic
    polynomial. n=3: bisection on the cubic det(B - lambda W), evaluated by
    the rule of Sarrus.
    """
    w, b = np.asarray(w, float), np.asarray(b, float)
    n = w.shape[0]
    if n == 1:
        return b[0, 0] / w[0, 0]
    if n == 2:
        a2 = w[0, 0] * w[1, 1] - w[0, 1] ** 2
        a1 = -(w[0, 0] * b[1, 1] + w[1, 1] * b[0, 0] - 2 * w[0, 1] * b[0, 1])
        a0 = b[0, 0] * b[1, 1] - b[0, 1] ** 2
        disc = max(a1 * a1 - 4 * a2 * a0, 0.0)
        # numerically stable form of the larger root (a1 <= 0 for PSD B, PD W)
        q = -0.5 * (a1 - math.sqrt(disc))
        return q / a2
    if n == 3:
        def p(lam):
            return _det3((b - lam * w).tolist())

        # roots are real and nonnegative, so their sum trace(W^-1 B) bounds the top one;
        # above it p < 0 (leading term -det(W) lambda^3)
        top = float(np.trace(np.linalg.solve(w, b)))
        if top <= 0:
            return 0.0
        lo, hi = 0.0, top * (1 + 1e-9)
        # locate the highest sign change, then bisect it
        grid = np.linspace(0.0, hi, 2001)
        vals = [p(g) for g in grid]
        for k in range(len(grid) - 1, 0, -1):
            if vals[k - 1] >= 0 > vals[k] or vals[k - 1] > 0 >= vals[k]:
                lo, hi = grid[k - 1], grid[k]
                break
        else:
            return 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if p(mid) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    raise ValueError("closed form only for n <= 3")
