"""scikit-learn compatible wrappers around the measures.

Each estimator takes ``(X, y)`` in ``fit`` and exposes its results as
trailing-underscore attributes, so it can be cloned, grid-searched over its
parameters and dropped into tooling that expects ``get_params``.

>>> from sklearn.datasets import load_iris
>>> X, y = load_iris(return_X_y=True)
>>> est = DataQualityMeasure(n_bootstrap=20, random_state=0).fit(X, y)
>>> est.m_var_i_.shape
(3,)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_X_y

from .baselines import MEASURES, baselines
from .dataset import LabeledDataset, MeasureConfig
from .degrade import DegradeSpec, degrade
from .exceptions import DatasetError
from .quality import DEFAULT_MAX_FEATURES, measure, measure_exact

__all__ = [
    "check_labeled",
    "DataQualityMeasure",
    "ExactDataQuality",
    "ComplexityBaselines",
    "ClassCollapser",
]


def check_labeled(X, y) -> tuple[LabeledDataset, np.ndarray]:
    """Validate ``(X, y)`` and encode labels densely.

    Returns the dataset and the sorted original class values (``classes_``).
    """
    X, y = check_X_y(X, y, dtype=np.float64, ensure_min_samples=2)
    classes, codes = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise DatasetError("need at least two classes (c < 2)")
    return LabeledDataset(X, codes, n_classes=classes.size, class_names=tuple(classes.tolist())), classes


def _seed(random_state) -> int:
    if random_state is None:
        return int(np.random.SeedSequence().entropy % 2**64)
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    if isinstance(random_state, np.random.RandomState):
        return int(random_state.randint(0, 2**63))
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(0, 2**63))
    raise ValueError(f"cannot derive a seed from {random_state!r}")


class DataQualityMeasure(BaseEstimator):
    """Separability and in-class variability estimated by bootstrap random projection.

    Parameters
    ----------
    n_bootstrap : int, default=100
        Bootstrap samples drawn.
    sample_ratio : float, default=0.25
        Per-class fraction drawn with replacement in each sample.
    n_vectors : int, default=10
        Random unit directions per sample.
    standardize : bool, default=True
        Standardize each bootstrap sample.
    random_state : int, RandomState, Generator or None
        Master seed. Use an int for reproducible results.
    n_jobs : int or None
        Threads used across bootstrap iterations; results do not depend on it.

    Attributes
    ----------
    m_sep_ : float
        Class separability.
    m_var_ : float
        Overall in-class variability.
    m_var_i_ : ndarray of shape (n_classes,)
        Per-class in-class variability, ordered as ``classes_``.
    m_sep_std_, m_var_std_ : float
        Bootstrap standard deviation of the per-iteration values.
    report_ : QualityReport
    classes_ : ndarray
    """

    def __init__(self, n_bootstrap=100, sample_ratio=0.25, n_vectors=10, standardize=True,
                 random_state=None, n_jobs=None):
        self.n_bootstrap = n_bootstrap
        self.sample_ratio = sample_ratio
        self.n_vectors = n_vectors
        self.standardize = standardize
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        ds, self.classes_ = check_labeled(X, y)
        cfg = MeasureConfig(
            n_bootstrap=self.n_bootstrap,
            sample_ratio=self.sample_ratio,
            n_vectors=self.n_vectors,
            seed=_seed(self.random_state),
            standardize=self.standardize,
        )
        self.report_ = measure(ds, cfg, n_jobs=self.n_jobs)
        self.m_sep_ = self.report_.m_sep
        self.m_var_ = self.report_.m_var
        self.m_var_i_ = np.asarray(self.report_.m_var_i)
        self.m_sep_std_ = self.report_.m_sep_std
        self.m_var_std_ = self.report_.m_var_std
        self.n_features_in_ = ds.n
        return self

    def score(self, X=None, y=None):
        """Return ``m_sep_``; refits first when data is given."""
        if X is not None:
            self.fit(X, y)
        check_is_fitted(self, "m_sep_")
        return self.m_sep_


class ExactDataQuality(BaseEstimator):
    """Exact separability / variability from eigenvalues of the scatter matrices.

    Only practical for moderate ``n``; ``max_features`` guards against
    materializing huge ``n x n`` matrices.
    """

    def __init__(self, standardize=True, max_features=DEFAULT_MAX_FEATURES, ridge=None):
        self.standardize = standardize
        self.max_features = max_features
        self.ridge = ridge

    def fit(self, X, y):
        ds, self.classes_ = check_labeled(X, y)
        self.report_ = measure_exact(ds, standardize=self.standardize,
                                     max_features=self.max_features, ridge=self.ridge)
        self.m_sep_ = self.report_.m_sep_exact
        self.m_var_ = self.report_.m_var_exact
        self.m_var_i_ = np.asarray(self.report_.m_var_i_exact)
        self.regularized_ = self.report_.regularized
        self.n_features_in_ = ds.n
        return self


class ComplexityBaselines(BaseEstimator):
    """F1 / N1 / N3 complexity measures as a fitted estimator."""

    def __init__(self, measures=MEASURES, standardize=False):
        self.measures = measures
        self.standardize = standardize

    def fit(self, X, y):
        ds, self.classes_ = check_labeled(X, y)
        self.report_ = baselines(ds, tuple(self.measures), standardize=self.standardize)
        self.f1_, self.n1_, self.n3_ = self.report_.f1, self.report_.n1, self.report_.n3
        self.n_features_in_ = ds.n
        return self


class ClassCollapser(BaseEstimator):
    """Resampler that degrades one class to noisy copies of a few similar rows.

    ``fit_resample(X, y)`` returns the degraded ``(X, y)`` with the original
    label values. ``target_class`` is a label value as it appears in ``y``.
    """

    def __init__(self, target_class=0, num_exemplars=10, output_count=1000, noise_sigma=1.0,
                 random_state=0):
        self.target_class = target_class
        self.num_exemplars = num_exemplars
        self.output_count = output_count
        self.noise_sigma = noise_sigma
        self.random_state = random_state

    def fit(self, X, y):
        ds, self.classes_ = check_labeled(X, y)
        hits = np.flatnonzero(self.classes_ == self.target_class)
        if hits.size == 0:
            raise DatasetError(f"target class {self.target_class!r} not present in y")
        self.target_index_ = int(hits[0])
        self.n_features_in_ = ds.n
        return self

    def fit_resample(self, X, y):
        self.fit(X, y)
        ds, _ = check_labeled(X, y)
        spec = DegradeSpec(
            target_class=self.target_index_,
            num_exemplars=self.num_exemplars,
            output_count=self.output_count,
            noise_sigma=self.noise_sigma,
            seed=_seed(self.random_state),
        )
        out = degrade(ds, spec)
        return out.data.copy(), self.classes_[out.labels]
