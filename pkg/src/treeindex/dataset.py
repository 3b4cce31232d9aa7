"""Data model and CSV plumbing shared by every other module.

A :class:`Dataset` is an immutable numeric table. A :class:`ClusterAssignment`
maps each record to an integer cluster ID, and :class:`LabeledDataset` joins
the two so that cluster IDs can act as class values for tree induction.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

MIN_LEAF_FLOOR = 2
MIN_LEAF_CEILING = 15


class DatasetError(ValueError):
    """Raised for malformed input tables or mismatched assignments."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    attributes: tuple[str, ...]
    records: np.ndarray
    true_classes: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        records = np.asarray(self.records, dtype=float)
        if records.ndim != 2:
            raise DatasetError(f"records must be 2-D, got shape {records.shape}")
        n, d = records.shape
        if n < 1 or d < 1:
            raise DatasetError(f"dataset needs n >= 1 and d >= 1, got n={n}, d={d}")
        attributes = tuple(str(a) for a in self.attributes)
        if len(attributes) != d:
            raise DatasetError(f"{len(attributes)} attribute names for {d} columns")
        if len(set(attributes)) != d:
            raise DatasetError(f"duplicate attribute names in {attributes}")
        if not np.all(np.isfinite(records)):
            row, col = np.argwhere(~np.isfinite(records))[0]
            raise DatasetError(f"non-finite value at row {row}, column {attributes[col]!r}")
        true_classes = self.true_classes
        if true_classes is not None:
            true_classes = tuple(str(c) for c in true_classes)
            if len(true_classes) != n:
                raise DatasetError(f"{len(true_classes)} class labels for {n} records")
        object.__setattr__(self, "attributes", attributes)
        object.__setattr__(self, "records", _frozen(records))
        object.__setattr__(self, "true_classes", true_classes)

    @property
    def n(self) -> int:
        return self.records.shape[0]

    @property
    def d(self) -> int:
        return self.records.shape[1]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.records[:, self.attributes.index(name)]
        except ValueError:
            raise DatasetError(f"unknown attribute {name!r}; have {list(self.attributes)}") from None

    def with_records(self, records: np.ndarray) -> "Dataset":
        return Dataset(self.name, self.attributes, records, self.true_classes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.attributes == other.attributes
            and self.true_classes == other.true_classes
            and np.array_equal(self.records, other.records)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Per-record cluster IDs.

    IDs are kept as given (any non-negative integers); ``declared_k`` is the
    number of distinct IDs that actually occur, so an empty cluster can't be
    represented. Use :meth:`canonical` for dense first-occurrence IDs.
    """

    labels: np.ndarray
    declared_k: int = field(init=False)

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.size == 0:
            raise DatasetError("labels must be a non-empty 1-D sequence")
        if not np.issubdtype(labels.dtype, np.integer):
            as_int = labels.astype(np.int64)
            if not np.array_equal(as_int, labels):
                raise DatasetError("cluster IDs must be integers")
            labels = as_int
        if labels.min() < 0:
            raise DatasetError("cluster IDs must be >= 0")
        object.__setattr__(self, "labels", _frozen(labels.astype(np.int64)))
        object.__setattr__(self, "declared_k", int(np.unique(labels).size))

    @property
    def n(self) -> int:
        return self.labels.size

    def canonical(self) -> "ClusterAssignment":
        """Relabel to 0..k-1 in order of first occurrence."""
        _, first, inverse = np.unique(self.labels, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        return ClusterAssignment(rank[inverse])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClusterAssignment):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    base: Dataset
    class_of: np.ndarray
    num_classes: int

    def __post_init__(self) -> None:
        class_of = np.asarray(self.class_of)
        if class_of.shape != (self.base.n,):
            raise DatasetError(f"{class_of.size} class values for {self.base.n} records")
        distinct = int(np.unique(class_of).size)
        if self.num_classes != distinct or distinct < 1:
            raise DatasetError(f"num_classes={self.num_classes} but {distinct} distinct classes present")
        object.__setattr__(self, "class_of", _frozen(class_of))


def label_with_clustering(ds: Dataset, ca: ClusterAssignment) -> LabeledDataset:
    if ca.n != ds.n:
        raise DatasetError(f"assignment has {ca.n} labels but dataset has {ds.n} records")
    return LabeledDataset(ds, ca.labels, ca.declared_k)


def min_leaf_size(n: int) -> int:
    """Minimum records per leaf: 1% of ``n`` (floored), clamped to [2, 15]."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return max(MIN_LEAF_FLOOR, min(MIN_LEAF_CEILING, n // 100))


def min_max_normalize(ds: Dataset) -> Dataset:
    x = ds.records
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (x - lo) / safe, 0.0)
    # guard against 1 + eps from rounding
    return ds.with_records(np.clip(scaled, 0.0, 1.0))


PathLike = Union[str, "os.PathLike[str]"]


def _parse_cell(text: str, row: int, col_name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(f"non-numeric cell {text!r} at row {row}, column {col_name!r}") from None
    if not math.isfinite(value):
        raise DatasetError(f"non-finite cell {text!r} at row {row}, column {col_name!r}")
    return value


def load_csv(
    path: PathLike,
    has_header: bool = True,
    class_column: Optional[Union[str, int]] = None,
    name: Optional[str] = None,
) -> Dataset:
    """Read a numeric CSV into a :class:`Dataset`.

    ``class_column`` selects the true-class column by header name or 0-based
    index; every other cell must parse as a finite real. Row numbers in error
    messages are 1-based file lines.
    """
    if not os.path.exists(path):
        raise DatasetError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DatasetError(f"empty file: {path}")

    first_data_line = 1
    if has_header:
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
        first_data_line = 2
        if not rows:
            raise DatasetError(f"no data rows in {path}")
        dupes = sorted({h for h in header if header.count(h) > 1})
        if dupes:
            raise DatasetError(f"duplicate header names {dupes} in {path}")
    else:
        header = [f"attr{j}" for j in range(len(rows[0]))]

    width = len(header)
    class_idx: Optional[int] = None
    if class_column is not None:
        if isinstance(class_column, int):
            class_idx = class_column
        elif class_column in header:
            class_idx = header.index(class_column)
        elif not has_header and str(class_column).isdigit():
            class_idx = int(class_column)
        else:
            raise DatasetError(f"class column {class_column!r} not found in header {header}")
        if not 0 <= class_idx < width:
            raise DatasetError(f"class column index {class_idx} out of range for {width} columns")

    keep = [j for j in range(width) if j != class_idx]
    values = np.empty((len(rows), len(keep)))
    classes: list[str] = []
    for i, row in enumerate(rows):
        line = i + first_data_line
        if len(row) != width:
            raise DatasetError(f"row {line} has {len(row)} cells, expected {width}")
        for out_j, j in enumerate(keep):
            values[i, out_j] = _parse_cell(row[j].strip(), line, header[j])
        if class_idx is not None:
            classes.append(row[class_idx].strip())

    return Dataset(
        name=name or os.path.splitext(os.path.basename(os.fspath(path)))[0],
        attributes=tuple(header[j] for j in keep),
        records=values,
        true_classes=tuple(classes) if class_idx is not None else None,
    )


def write_csv(ds: Dataset, path: PathLike, class_column: str = "class") -> None:
    """Write ``ds`` with a header row; floats use ``repr`` so reloading is exact."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = list(ds.attributes)
        if ds.true_classes is not None:
            header.append(class_column)
        w.writerow(header)
        for i, row in enumerate(ds.records):
            cells = [repr(float(v)) for v in row]
            if ds.true_classes is not None:
                cells.append(ds.true_classes[i])
            w.writerow(cells)


def write_assignment(ca: ClusterAssignment, path: PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["record_index", "cluster_id"])
        for i, c in enumerate(ca.labels):
            w.writerow([i, int(c)])


def load_assignment(path: PathLike, n: Optional[int] = None) -> ClusterAssignment:
    """Read a ``record_index,cluster_id`` CSV (header optional).

    Records may appear in any order but every index 0..n-1 must occur once.
    """
    if not os.path.exists(path):
        raise DatasetError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and not rows[0][0].strip().lstrip("-").isdigit():
        rows = rows[1:]
    if not rows:
        raise DatasetError(f"empty assignment file: {path}")
    pairs = []
    for line, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise DatasetError(f"assignment row {line} must have 2 cells, got {len(row)}")
        try:
            pairs.append((int(row[0]), int(row[1])))
        except ValueError:
            raise DatasetError(f"non-integer cell in assignment row {line}: {row}") from None
    size = len(pairs)
    labels = np.full(size, -1, dtype=np.int64)
    for idx, cid in pairs:
        if not 0 <= idx < size or labels[idx] != -1:
            raise DatasetError(f"record index {idx} is out of range or repeated")
        labels[idx] = cid
    if n is not None and size != n:
        raise DatasetError(f"assignment covers {size} records, dataset has {n}")
    return ClusterAssignment(labels)


