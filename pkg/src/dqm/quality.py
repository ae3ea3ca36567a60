"""Class separability and in-class variability.

:func:`measure` is the bootstrap / random-projection estimator. For each of
``n_bootstrap`` iterations it draws a stratified sample, standardizes it and
evaluates ``n_vectors`` random unit directions. The iteration keeps the
largest between/within ratio, and the smallest within-class forms overall
and per class scaled by ``1/(c n)``. The reported measures are means of
those per-iteration extremes.

:func:`measure_exact` computes the same quantities as eigenvalues of the
explicit scatter matrices. It is the reference used to validate the
estimator on data small enough to hold ``n x n`` matrices.
"""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .dataset import (
    LabeledDataset,
    MeasureConfig,
    partition,
    standardize as standardize_dataset,
    stratified_bootstrap,
)
from .exceptions import DatasetError, NumericalDegeneracyError
from .projection import quadratic_forms_batch, sample_unit_vector, scatter_matrices
from .stats import PairedSeries, bootstrap_moments, correlate

__all__ = [
    "QualityReport",
    "ExactReport",
    "ExactApproxComparison",
    "measure",
    "measure_exact",
    "compare_exact_approx",
    "resolve_n_jobs",
]

logger = logging.getLogger(__name__)

MAX_REDRAWS = 10
DEFAULT_MAX_FEATURES = 4096

# sub-stream namespaces under the master seed
_SAMPLE_STREAM = 0
_VECTOR_STREAM = 1


@dataclass
class QualityReport:
    m_sep: float
    m_var: float
    m_var_i: list
    m_sep_std: float
    m_var_std: float
    config: MeasureConfig
    elapsed_s: float = 0.0
    n_degenerate_iterations: int = 0
    class_names: list = field(default_factory=list)
    # per-iteration maxima / minima behind the means (not serialized)
    sep_samples: np.ndarray = field(default=None, repr=False)
    var_samples: np.ndarray = field(default=None, repr=False)
    var_i_samples: np.ndarray = field(default=None, repr=False)

    @property
    def degenerate(self) -> bool:
        """True when some iteration produced no finite separability ratio."""
        return self.n_degenerate_iterations > 0

    def to_dict(self) -> dict:
        d = {
            "m_sep": _json_float(self.m_sep),
            "m_var": self.m_var,
            "m_var_i": list(self.m_var_i),
            "m_sep_std": _json_float(self.m_sep_std),
            "m_var_std": self.m_var_std,
            "config": self.config.to_dict(),
            "elapsed_s": self.elapsed_s,
            "n_degenerate_iterations": self.n_degenerate_iterations,
        }
        if self.class_names:
            d["class_names"] = list(self.class_names)
        return d


@dataclass
class ExactReport:
    m_sep_exact: float
    m_var_exact: float
    m_var_i_exact: list
    singular: bool
    regularized: bool
    ridge: float
    standardized: bool
    elapsed_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "m_sep_exact": self.m_sep_exact,
            "m_var_exact": self.m_var_exact,
            "m_var_i_exact": list(self.m_var_i_exact),
            "singular": self.singular,
            "regularized": self.regularized,
            "ridge": self.ridge,
            "standardized": self.standardized,
            "elapsed_s": self.elapsed_s,
        }


def _json_float(x: float):
    # JSON has no infinity; a perfect separator is reported as null
    return x if math.isfinite(x) else None


def resolve_n_jobs(n_jobs: int | None) -> int:
    if n_jobs is None:
        return 1
    if n_jobs < 0:
        return max(1, (os.cpu_count() or 1) + 1 + n_jobs)
    return max(1, n_jobs)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _directions(cfg: MeasureConfig, n: int, b: int, attempt: int) -> np.ndarray:
    # one stream per direction, so a larger n_vectors extends the same prefix
    cols = [sample_unit_vector(n, _rng(cfg.seed, _VECTOR_STREAM, b, attempt, j))
            for j in range(cfg.n_vectors)]
    return np.column_stack(cols)


@dataclass
class _Iteration:
    sep: float | None
    var: float
    var_i: np.ndarray
    any_between: bool


def _run_iteration(ds, part, full_sample, cfg: MeasureConfig, b: int) -> _Iteration:
    scale = 1.0 / (ds.c * ds.n)
    for attempt in range(MAX_REDRAWS):
        if full_sample is not None:
            sample = full_sample
        else:
            sample = stratified_bootstrap(ds, cfg.sample_ratio, _rng(cfg.seed, _SAMPLE_STREAM, b, attempt), part)
            if cfg.standardize:
                sample = standardize_dataset(sample)
        within, within_i, between = quadratic_forms_batch(sample, None, _directions(cfg, ds.n, b, attempt))
        ok = within > 0
        var = scale * within.min()
        var_i = scale * within_i.min(axis=1)
        if ok.any():
            return _Iteration(float(np.max(between[ok] / within[ok])), float(var), var_i, True)
    logger.warning("iteration %d: within-class scatter vanished on all %d redraws", b, MAX_REDRAWS)
    return _Iteration(None, float(var), var_i, bool((between > 0).any()))


def measure(ds: LabeledDataset, cfg: MeasureConfig | None = None, n_jobs: int | None = 1) -> QualityReport:
    """Estimate separability and in-class variability by bootstrap + random projection.

    Directions whose within-class form is exactly zero are skipped; an
    iteration where every direction is skipped is redrawn up to
    ``MAX_REDRAWS`` times. If it stays degenerate it still contributes its
    variability values (which are then 0) but no separability ratio. When no
    iteration yields a ratio, ``m_sep`` is ``inf`` if any between-class form
    was positive (perfect separation) and 0 otherwise.

    Results do not depend on ``n_jobs``: every iteration draws from its own
    seed-derived stream and results are reduced in iteration order.
    """
    cfg = MeasureConfig() if cfg is None else cfg
    t0 = time.perf_counter()
    part = partition(ds)
    full_sample = None
    if not cfg.resample:
        full_sample = standardize_dataset(ds) if cfg.standardize else ds

    def run(b):
        return _run_iteration(ds, part, full_sample, cfg, b)

    workers = resolve_n_jobs(n_jobs)
    if workers == 1:
        its = [run(b) for b in range(cfg.n_bootstrap)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            its = list(pool.map(run, range(cfg.n_bootstrap)))

    seps = [it.sep for it in its if it.sep is not None]
    n_degenerate = len(its) - len(seps)
    if seps:
        m_sep, sep_var = bootstrap_moments(seps)
    else:
        m_sep = math.inf if any(it.any_between for it in its) else 0.0
        sep_var = 0.0
    m_var, var_var = bootstrap_moments([it.var for it in its])
    m_var_i = np.mean([it.var_i for it in its], axis=0)
    return QualityReport(
        m_sep=m_sep,
        m_var=m_var,
        m_var_i=[float(v) for v in m_var_i],
        m_sep_std=math.sqrt(sep_var),
        m_var_std=math.sqrt(var_var),
        config=cfg,
        elapsed_s=time.perf_counter() - t0,
        n_degenerate_iterations=n_degenerate,
        class_names=[str(c) for c in ds.class_names],
        sep_samples=np.array(seps),
        var_samples=np.array([it.var for it in its]),
        var_i_samples=np.array([it.var_i for it in its]),
    )


def measure_exact(ds: LabeledDataset, standardize: bool = True,
                  max_features: int = DEFAULT_MAX_FEATURES, ridge: float | None = None) -> ExactReport:
    """Exact measures from eigenvalues of the explicit scatter matrices.

    Separability is the largest eigenvalue of the symmetric-definite pencil
    (between, within): the within matrix is Cholesky-factored as ``L L^T``
    and the largest eigenvalue of ``L^-1 S_b L^-T`` is taken. If the within
    matrix is numerically singular, ``1e-8 * trace / n`` is added to its
    diagonal unless an explicit ``ridge`` is given; either way the report
    flags it. Variability values are smallest eigenvalues scaled by
    ``1/(c n)``, computed without any ridge.
    """
    if ds.n > max_features:
        raise DatasetError(f"n={ds.n} exceeds the exact-solver cap of {max_features} features")
    t0 = time.perf_counter()
    if standardize:
        ds = standardize_dataset(ds)
    s_w, s_b, s_wi = scatter_matrices(ds)
    n, c = ds.n, ds.c

    eig_w = np.linalg.eigvalsh(s_w)
    top = eig_w[-1]
    if top <= 0:
        raise NumericalDegeneracyError("within-class scatter is zero; separability is undefined")
    singular = bool(eig_w[0] <= n * np.finfo(float).eps * top)
    if ridge is None:
        ridge = 1e-8 * np.trace(s_w) / n if singular else 0.0
    regularized = ridge > 0
    try:
        chol = linalg.cholesky(s_w + ridge * np.eye(n), lower=True)
    except linalg.LinAlgError:
        raise NumericalDegeneracyError("within-class scatter is singular beyond regularization") from None
    half = linalg.solve_triangular(chol, s_b, lower=True)
    reduced = linalg.solve_triangular(chol, half.T, lower=True)
    m_sep = float(np.linalg.eigvalsh((reduced + reduced.T) / 2)[-1])

    scale = 1.0 / (c * n)
    var_i = [max(float(np.linalg.eigvalsh(s)[0]), 0.0) * scale for s in s_wi]
    return ExactReport(
        m_sep_exact=max(m_sep, 0.0),
        m_var_exact=max(float(eig_w[0]), 0.0) * scale,
        m_var_i_exact=var_i,
        singular=singular,
        regularized=bool(regularized),
        ridge=float(ridge),
        standardized=bool(standardize),
        elapsed_s=time.perf_counter() - t0,
    )


@dataclass
class ExactApproxComparison:
    names: list
    exact: np.ndarray
    approx: np.ndarray
    correlation: dict

    @property
    def pearson(self):
        return self.correlation["pearson"]

    @property
    def spearman(self):
        return self.correlation["spearman"]

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"name": name, "exact": float(e), "approx": float(a)}
                for name, e, a in zip(self.names, self.exact, self.approx)
            ],
            **self.correlation,
        }


def compare_exact_approx(datasets, cfg: MeasureConfig | None = None, names=None,
                         standardize: bool = True, n_jobs: int | None = 1) -> ExactApproxComparison:
    """Pair exact and estimated separability over several datasets and correlate them."""
    datasets = list(datasets)
    names = [f"dataset-{i}" for i in range(len(datasets))] if names is None else list(names)
    exact, approx = [], []
    for ds in datasets:
        exact.append(measure_exact(ds, standardize=standardize).m_sep_exact)
        approx.append(measure(ds, cfg, n_jobs=n_jobs).m_sep)
    exact, approx = np.array(exact), np.array(approx)
    return ExactApproxComparison(names, exact, approx, correlate(PairedSeries(exact, approx, tuple(names))))
