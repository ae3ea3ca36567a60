"""Class separability and in-class variability measures for labeled,
high-dimensional classification data, with exact and baseline references."""

__version__ = "0.1.0"

from .baselines import BaselineReport, baselines, f1, n1, n3
from .dataset import (
    ClassPartition,
    LabeledDataset,
    MeasureConfig,
    load_csv,
    load_dataset,
    load_idx,
    load_raw,
    partition,
    standardize,
    stratified_bootstrap,
    write_csv,
    write_raw,
)
from .degrade import DegradeSpec, degrade, select_similar
from .estimators import ClassCollapser, ComplexityBaselines, DataQualityMeasure, ExactDataQuality
from .exceptions import DatasetError, NumericalDegeneracyError
from .projection import QuadraticForms, quadratic_forms, sample_unit_vector, scatter_matrices
from .quality import ExactReport, QualityReport, compare_exact_approx, measure, measure_exact
from .stats import PairedSeries, bootstrap_moments, pearson, spearman
