"""Labeled dataset model, file ingestion, stratified bootstrap and standardization."""

from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import DatasetError

__all__ = [
    "LabeledDataset",
    "ClassPartition",
    "MeasureConfig",
    "load_csv",
    "write_csv",
    "load_idx",
    "load_raw",
    "write_raw",
    "load_dataset",
    "partition",
    "stratified_bootstrap",
    "standardize",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Dense ``(m, n)`` float matrix with integer class ids in ``[0, c)``.

    ``class_names`` maps each dense id back to the label found in the source
    file, when there was one.
    """

    data: np.ndarray
    labels: np.ndarray
    n_classes: int | None = None
    class_names: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, order="C", copy=True)
        labels = np.array(self.labels, copy=True)
        if data.ndim != 2:
            raise DatasetError(f"data must be 2-D, got shape {data.shape}")
        if labels.ndim != 1 or labels.shape[0] != data.shape[0]:
            raise DatasetError(
                f"labels must be a vector of length {data.shape[0]}, got shape {labels.shape}"
            )
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise DatasetError("labels must be integer class ids")
        labels = labels.astype(np.intp)
        if data.shape[1] == 0:
            raise DatasetError("dataset has no feature columns")
        bad = ~np.isfinite(data)
        if bad.any():
            r, col = np.argwhere(bad)[0]
            raise DatasetError(f"non-finite value at row {r}, column {col}")

        c = self.n_classes
        if c is None:
            c = int(labels.max()) + 1 if labels.size else 0
        if labels.size and (labels.min() < 0 or labels.max() >= c):
            raise DatasetError(f"labels must lie in [0, {c})")
        if c < 2:
            raise DatasetError(f"need at least two classes (c < 2, got c={c})")
        counts = np.bincount(labels, minlength=c)
        if (counts == 0).any():
            missing = np.flatnonzero(counts == 0).tolist()
            raise DatasetError(f"class ids {missing} have no rows")
        if self.class_names and len(self.class_names) != c:
            raise DatasetError("class_names length does not match class count")

        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "n_classes", c)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def c(self) -> int:
        return self.n_classes

    def with_data(self, data: np.ndarray, labels: np.ndarray | None = None) -> "LabeledDataset":
        """Return a new dataset sharing class count and names."""
        return LabeledDataset(
            data,
            self.labels if labels is None else labels,
            n_classes=self.n_classes,
            class_names=self.class_names,
            metadata=dict(self.metadata),
        )

    def __repr__(self):
        return f"LabeledDataset(m={self.m}, n={self.n}, c={self.c})"


@dataclass(frozen=True, eq=False)
class ClassPartition:
    per_class_rows: tuple
    counts: np.ndarray
    class_means: np.ndarray
    global_mean: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.per_class_rows)


@dataclass(frozen=True)
class MeasureConfig:
    """Settings for the bootstrap / random-projection estimator.

    Parameters
    ----------
    n_bootstrap : int
        Number of bootstrap samples.
    sample_ratio : float
        Fraction of each class drawn (with replacement) per bootstrap sample.
    n_vectors : int
        Random unit directions evaluated per bootstrap sample.
    seed : int
        Master seed; every iteration and direction derives its own stream.
    standardize : bool
        Standardize every bootstrap sample before projecting.
    resample : bool
        When False every iteration scores the full dataset (no resampling);
        only the random directions change. Used for bound checks against
        the exact eigenvalue solution.
    """

    n_bootstrap: int = 100
    sample_ratio: float = 0.25
    n_vectors: int = 10
    seed: int = 0
    standardize: bool = True
    resample: bool = True

    def __post_init__(self):
        if int(self.n_bootstrap) != self.n_bootstrap or self.n_bootstrap < 1:
            raise ValueError(f"n_bootstrap must be a positive integer, got {self.n_bootstrap!r}")
        if not (0.0 < self.sample_ratio <= 1.0):
            raise ValueError(f"sample_ratio must be in (0, 1], got {self.sample_ratio!r}")
        if int(self.n_vectors) != self.n_vectors or self.n_vectors < 1:
            raise ValueError(f"n_vectors must be a positive integer, got {self.n_vectors!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "n_bootstrap": int(self.n_bootstrap),
            "sample_ratio": float(self.sample_ratio),
            "n_vectors": int(self.n_vectors),
            "seed": int(self.seed),
            "standardize": bool(self.standardize),
            "resample": bool(self.resample),
        }


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def _remap_first_seen(raw: Sequence) -> tuple[np.ndarray, list]:
    ids: dict = {}
    out = np.empty(len(raw), dtype=np.intp)
    for i, v in enumerate(raw):
        out[i] = ids.setdefault(v, len(ids))
    return out, list(ids)


def load_csv(path, label_column=-1) -> LabeledDataset:
    """Read a CSV file with a header row.

    ``label_column`` is a header name or a (possibly negative) column index.
    Labels are remapped to ``0..c-1`` in order of first appearance; the
    original values are kept in ``class_names``.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        ncol = len(header)
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if label_column not in header:
                raise DatasetError(f"{path}: label column {label_column!r} not in header")
            li = header.index(label_column)
        else:
            li = int(label_column)
            if not -ncol <= li < ncol:
                raise DatasetError(f"{path}: label column index {li} out of range for {ncol} columns")
            li %= ncol
        feat_cols = [j for j in range(ncol) if j != li]

        rows, raw_labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if len(rec) != ncol:
                raise DatasetError(f"{path}: row {lineno} has {len(rec)} fields, expected {ncol}")
            vals = []
            for j in feat_cols:
                cell = rec[j]
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {lineno}, column {header[j]!r}: cannot parse {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DatasetError(
                        f"{path}: row {lineno}, column {header[j]!r}: non-finite value {cell!r}"
                    )
                vals.append(v)
            rows.append(vals)
            raw_labels.append(rec[li])
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    labels, names = _remap_first_seen(raw_labels)
    if len(names) < 2:
        raise DatasetError(f"{path}: only one distinct label (c < 2)")
    return LabeledDataset(
        np.asarray(rows, dtype=np.float64),
        labels,
        n_classes=len(names),
        class_names=tuple(names),
        metadata={
            "source": str(path),
            "label_column": header[li],
            "feature_names": [header[j] for j in feat_cols],
        },
    )


def write_csv(ds: LabeledDataset, path, label_column: str = "label") -> None:
    """Write ``ds`` as CSV; floats use ``repr`` so a reload is exact."""
    names = ds.metadata.get("feature_names") or [f"x{j}" for j in range(ds.n)]
    classes = ds.class_names or tuple(range(ds.c))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*names, label_column])
        for row, lab in zip(ds.data.tolist(), ds.labels.tolist()):
            w.writerow([*map(repr, row), classes[lab]])


_IDX_TYPES = {
    0x08: np.dtype("u1"),
    0x09: np.dtype("i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}


def _read_idx(path, expect_ndim: Sequence[int]) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    buf = path.read_bytes()
    if len(buf) < 4:
        raise DatasetError(f"{path}: truncated IDX header")
    magic = struct.unpack(">I", buf[:4])[0]
    zero, dtype_code, ndim = magic >> 16, (magic >> 8) & 0xFF, magic & 0xFF
    if zero != 0 or dtype_code not in _IDX_TYPES or ndim not in expect_ndim:
        wanted = ", ".join(f"0x{0x800 | d:08x}" for d in expect_ndim)
        raise DatasetError(f"{path}: bad IDX magic 0x{magic:08x} (expected one of {wanted})")
    hdr = 4 + 4 * ndim
    if len(buf) < hdr:
        raise DatasetError(f"{path}: truncated IDX header")
    dims = struct.unpack(f">{ndim}I", buf[4:hdr])
    dtype = _IDX_TYPES[dtype_code]
    need = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    if len(buf) - hdr < need:
        raise DatasetError(
            f"{path}: truncated IDX body ({len(buf) - hdr} bytes, expected {need})"
        )
    return np.frombuffer(buf, dtype=dtype, count=int(np.prod(dims)), offset=hdr).reshape(dims)


def load_idx(images_path, labels_path) -> LabeledDataset:
    """Read an IDX image/label pair (MNIST layout).

    Each item is flattened row-major into one row; values are widened to
    float64 (bytes stay in ``[0, 255]``). Numeric labels are mapped to dense
    ids in sorted order, so MNIST digits keep their values.
    """
    images = _read_idx(images_path, (2, 3, 4))
    raw = _read_idx(labels_path, (1,))
    if images.shape[0] != raw.shape[0]:
        raise DatasetError(
            f"count mismatch: {images.shape[0]} images but {raw.shape[0]} labels"
        )
    values, labels = np.unique(raw, return_inverse=True)
    if values.size < 2:
        raise DatasetError(f"{labels_path}: only one distinct label (c < 2)")
    data = images.reshape(images.shape[0], -1).astype(np.float64)
    return LabeledDataset(
        data,
        labels,
        n_classes=values.size,
        class_names=tuple(v.item() for v in values),
        metadata={"source": str(images_path), "labels_source": str(labels_path),
                  "item_shape": list(images.shape[1:])},
    )


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def write_raw(ds: LabeledDataset, path) -> Path:
    """Write little-endian float64 rows plus labels and a JSON sidecar.

    Produces ``path`` (data), ``path.labels`` (little-endian int64) and
    ``path.json`` holding ``{m, n, c, labels_path}``. Returns the sidecar path.
    """
    path = Path(path)
    lab_path = path.with_name(path.name + ".labels")
    ds.data.astype("<f8").tofile(path)
    ds.labels.astype("<i8").tofile(lab_path)
    meta = {"m": ds.m, "n": ds.n, "c": ds.c, "labels_path": lab_path.name}
    if ds.class_names:
        meta["class_names"] = list(ds.class_names)
    side = _sidecar(path)
    side.write_text(json.dumps(meta, indent=2) + "\n")
    return side


def load_raw(path) -> LabeledDataset:
    """Read a raw float64 matrix written by :func:`write_raw`.

    ``path`` may name the data file or its ``.json`` sidecar.
    """
    path = Path(path)
    if path.suffix == ".json" and path.with_suffix("").is_file():
        side, path = path, path.with_suffix("")
    else:
        side = _sidecar(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    if not side.is_file():
        raise DatasetError(f"missing sidecar {side}")
    try:
        meta = json.loads(side.read_text())
        m, n, c = int(meta["m"]), int(meta["n"]), int(meta["c"])
        lab_path = side.parent / meta["labels_path"]
    except (KeyError, ValueError, TypeError) as exc:
        raise DatasetError(f"{side}: bad sidecar ({exc})") from None
    data = np.fromfile(path, dtype="<f8")
    if data.size != m * n:
        raise DatasetError(f"{path}: expected {m * n} float64 values, found {data.size}")
    if not lab_path.is_file():
        raise DatasetError(f"no such file: {lab_path}")
    labels = np.fromfile(lab_path, dtype="<i8")
    if labels.size != m:
        raise DatasetError(f"count mismatch: {m} rows but {labels.size} labels")
    return LabeledDataset(
        data.reshape(m, n),
        labels,
        n_classes=c,
        class_names=tuple(meta.get("class_names", ())),
        metadata={"source": str(path)},
    )


def load_dataset(path, fmt: str | None = None, label_column=-1, labels_path=None) -> LabeledDataset:
    """Dispatch on ``fmt`` (``csv``, ``idx`` or ``raw``); guessed from the suffix if None."""
    if fmt is None:
        suffix = Path(path).suffix.lower()
        fmt = {".csv": "csv", ".json": "raw", ".f64": "raw", ".bin": "raw"}.get(suffix, "idx")
    if fmt == "csv":
        return load_csv(path, label_column)
    if fmt == "idx":
        if labels_path is None:
            raise DatasetError("idx input needs a labels file")
        return load_idx(path, labels_path)
    if fmt == "raw":
        return load_raw(path)
    raise DatasetError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def partition(ds: LabeledDataset) -> ClassPartition:
    onehot = np.zeros((ds.c, ds.m))
    onehot[ds.labels, np.arange(ds.m)] = 1.0
    counts = np.bincount(ds.labels, minlength=ds.c)
    sums = onehot @ ds.data
    means = sums / counts[:, None]
    order = np.argsort(ds.labels, kind="stable")
    rows = tuple(_frozen(r) for r in np.split(order, np.cumsum(counts)[:-1]))
    return ClassPartition(
        per_class_rows=rows,
        counts=_frozen(counts),
        class_means=_frozen(means),
        global_mean=_frozen(ds.data.mean(axis=0)),
    )


def stratified_bootstrap(ds: LabeledDataset, ratio: float, rng: np.random.Generator,
                         part: ClassPartition | None = None) -> LabeledDataset:
    """Draw ``round(ratio * m_i)`` rows (at least one) with replacement from each class."""
    if not (0.0 < ratio <= 1.0):
        raise ValueError(f"ratio must be in (0, 1], got {ratio!r}")
    part = partition(ds) if part is None else part
    picks = []
    for rows in part.per_class_rows:
        k = max(1, int(math.floor(ratio * rows.size + 0.5)))
        picks.append(rows[rng.integers(0, rows.size, size=k)])
    idx = np.concatenate(picks)
    return ds.with_data(ds.data[idx], ds.labels[idx])


def standardize(ds: LabeledDataset) -> LabeledDataset:
    """Zero-mean, unit population-std columns; constant columns become 0."""
    return ds.with_data(standardize_array(ds.data))


def standardize_array(x: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=0)
    centered = x - mean
    std = np.sqrt(np.mean(centered * centered, axis=0))
    constant = np.ptp(x, axis=0) == 0
    std[constant] = 1.0
    centered[:, constant] = 0.0
    return centered / std
