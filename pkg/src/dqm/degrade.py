"""Collapse one class onto a few mutually similar exemplars plus Gaussian noise."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .dataset import LabeledDataset
from .exceptions import DatasetError

__all__ = ["DegradeSpec", "select_similar", "degrade"]


@dataclass(frozen=True)
class DegradeSpec:
    target_class: int
    num_exemplars: int = 10
    output_count: int = 1000
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_exemplars < 1:
            raise ValueError("num_exemplars must be >= 1")
        if self.output_count < 1:
            raise ValueError("output_count must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


def select_similar(ds: LabeledDataset, class_id: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Random anchor row of ``class_id`` plus its ``k - 1`` most cosine-similar classmates.

    Zero-norm rows have no direction and are dropped with a warning. Ties in
    similarity go to the lower row index. Returns ``k`` row indices into
    ``ds``, anchor first.
    """
    if not 0 <= class_id < ds.c:
        raise DatasetError(f"class {class_id} does not exist (c={ds.c})")
    rows = np.flatnonzero(ds.labels == class_id)
    x = ds.data[rows]
    norms = np.linalg.norm(x, axis=1)
    zero = norms == 0
    if zero.any():
        warnings.warn(f"{int(zero.sum())} zero-norm rows in class {class_id} excluded", RuntimeWarning,
                      stacklevel=2)
        rows, x, norms = rows[~zero], x[~zero], norms[~zero]
    if rows.size < k:
        raise DatasetError(f"class {class_id} has {rows.size} usable rows, need {k}")
    a = int(rng.integers(rows.size))
    sim = (x @ x[a]) / (norms * norms[a])
    others = np.delete(np.arange(rows.size), a)
    # primary key: descending similarity, secondary: ascending row index
    order = others[np.lexsort((rows[others], -sim[others]))]
    return np.concatenate([[rows[a]], rows[order[: k - 1]]])


def degrade(ds: LabeledDataset, spec: DegradeSpec) -> LabeledDataset:
    """Replace the target class with noisy resamples of similar exemplars.

    Non-target rows keep their order; the ``output_count`` synthesized rows
    are appended after them.
    """
    rng = np.random.default_rng(spec.seed)
    exemplars = ds.data[select_similar(ds, spec.target_class, spec.num_exemplars, rng)]
    picks = rng.integers(exemplars.shape[0], size=spec.output_count)
    synth = exemplars[picks] + spec.noise_sigma * rng.standard_normal((spec.output_count, ds.n))
    keep = ds.labels != spec.target_class
    data = np.concatenate([ds.data[keep], synth])
    labels = np.concatenate([ds.labels[keep], np.full(spec.output_count, spec.target_class)])
    out = ds.with_data(data, labels)
    out.metadata["degrade"] = spec.to_dict()
    return out
