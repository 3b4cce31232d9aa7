"""Conventional cluster-quality indexes for comparison with the Tree Index.

External indexes (need true classes):

* ``f_measure`` -- class-weighted best-match F1:
  ``sum_j (n_j / n) * max_i F1(cluster i, class j)``.
* ``purity`` -- ``(1/n) * sum_i max_j n_ij``.
* ``entropy_ext`` -- cluster-size-weighted class entropy in bits.

Internal indexes (Euclidean distance throughout):

* ``sse`` -- squared distance of each record to its cluster mean.
* ``silhouette`` -- mean of ``(b - a) / max(a, b)``; a record alone in its
  cluster scores 0, as does a record with ``a == b == 0``.
* ``db`` -- Davies-Bouldin with ``S_i`` the mean member-to-centroid distance.
  Coincident centroids give ``inf``.
* ``xb`` -- crisp Xie-Beni, ``SSE / (n * min_{i != j} |c_i - c_j|^2)``.
  Coincident centroids give ``inf``.

Every function accepts any integer cluster IDs; they are densified
internally, so all indexes are invariant under relabelling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dataset import ClusterAssignment, Dataset

HIGHER = "higher"
LOWER = "lower"

# chunk rows of the pairwise distance matrix to bound memory
_SILHOUETTE_CHUNK = 512


class MissingClassesError(ValueError):
    pass


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # [cluster, class]
    cluster_ids: tuple[int, ...]
    class_names: tuple[str, ...]

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def cluster_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def class_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @classmethod
    def from_labels(cls, labels, classes) -> "ContingencyTable":
        labels = np.asarray(labels)
        classes = np.asarray(classes, dtype=object).astype(str)
        if labels.shape != classes.shape:
            raise ValueError(f"{labels.size} cluster labels vs {classes.size} class labels")
        cluster_ids, ci = np.unique(labels, return_inverse=True)
        class_names, ki = np.unique(classes, return_inverse=True)
        counts = np.zeros((cluster_ids.size, class_names.size), dtype=np.int64)
        np.add.at(counts, (ci, ki), 1)
        return cls(counts, tuple(int(c) for c in cluster_ids), tuple(str(c) for c in class_names))


def contingency(ds: Dataset, ca: ClusterAssignment) -> ContingencyTable:
    if ds.true_classes is None:
        raise MissingClassesError(f"dataset {ds.name!r} has no true-class column")
    if ca.n != ds.n:
        raise ValueError(f"assignment has {ca.n} labels, dataset has {ds.n} records")
    return ContingencyTable.from_labels(ca.labels, ds.true_classes)


def f_measure(ct: ContingencyTable) -> float:
    counts = ct.counts.astype(float)
    n_i = counts.sum(axis=1, keepdims=True)
    n_j = counts.sum(axis=0, keepdims=True)
    precision = counts / n_i
    recall = counts / n_j
    with np.errstate(invalid="ignore"):
        f1 = np.where(counts > 0, 2 * precision * recall / (precision + recall), 0.0)
    return float(np.sum(n_j[0] / ct.n * f1.max(axis=0)))


def purity(ct: ContingencyTable) -> float:
    return float(ct.counts.max(axis=1).sum() / ct.n)


def external_entropy(ct: ContingencyTable) -> float:
    counts = ct.counts.astype(float)
    sizes = counts.sum(axis=1)
    p = counts / sizes[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(counts > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0).sum(axis=1)
    return max(0.0, float(np.sum(sizes / ct.n * h)))


@dataclass(frozen=True)
class CentroidModel:
    centers: np.ndarray
    counts: np.ndarray
    codes: np.ndarray  # per-record dense cluster index

    @classmethod
    def fit(cls, x: np.ndarray, labels) -> "CentroidModel":
        x = np.asarray(x, dtype=float)
        _, codes = np.unique(np.asarray(labels), return_inverse=True)
        k = int(codes.max()) + 1
        counts = np.bincount(codes, minlength=k)
        sums = np.zeros((k, x.shape[1]))
        np.add.at(sums, codes, x)
        return cls(sums / counts[:, None], counts, codes)

    @property
    def k(self) -> int:
        return self.centers.shape[0]


def _check_lengths(ds: Dataset, ca: ClusterAssignment) -> None:
    if ca.n != ds.n:
        raise ValueError(f"assignment has {ca.n} labels, dataset has {ds.n} records")


def _need_two(ca: ClusterAssignment, index: str) -> None:
    if ca.declared_k < 2:
        raise ValueError(f"{index} needs at least 2 clusters, got {ca.declared_k}")


def sse(ds: Dataset, ca: ClusterAssignment) -> float:
    _check_lengths(ds, ca)
    model = CentroidModel.fit(ds.records, ca.labels)
    diff = ds.records - model.centers[model.codes]
    return float(np.sum(diff * diff))


def silhouette(ds: Dataset, ca: ClusterAssignment) -> float:
    _check_lengths(ds, ca)
    _need_two(ca, "silhouette")
    x = ds.records
    _, codes = np.unique(ca.labels, return_inverse=True)
    k = int(codes.max()) + 1
    sizes = np.bincount(codes, minlength=k).astype(float)
    onehot = np.zeros((x.shape[0], k))
    onehot[np.arange(x.shape[0]), codes] = 1.0

    s = np.empty(x.shape[0])
    for start in range(0, x.shape[0], _SILHOUETTE_CHUNK):
        stop = min(start + _SILHOUETTE_CHUNK, x.shape[0])
        d2 = np.zeros((stop - start, x.shape[0]))
        for j in range(x.shape[1]):
            diff = x[start:stop, j, None] - x[None, :, j]
            d2 += diff * diff
        dist = np.sqrt(d2)
        sums = dist @ onehot
        own = codes[start:stop]
        rows = np.arange(stop - start)
        own_size = sizes[own]
        with np.errstate(divide="ignore", invalid="ignore"):
            a = sums[rows, own] / (own_size - 1)
            mean_other = sums / sizes[None, :]
        mean_other[rows, own] = np.inf
        b = mean_other.min(axis=1)
        denom = np.maximum(a, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(denom > 0, (b - a) / denom, 0.0)
        val[own_size == 1] = 0.0
        s[start:stop] = val
    return float(np.clip(s.mean(), -1.0, 1.0))


def db_index(ds: Dataset, ca: ClusterAssignment) -> float:
    _check_lengths(ds, ca)
    _need_two(ca, "db")
    model = CentroidModel.fit(ds.records, ca.labels)
    spread = np.zeros(model.k)
    np.add.at(spread, model.codes, np.linalg.norm(ds.records - model.centers[model.codes], axis=1))
    spread /= model.counts
    diff = model.centers[:, None, :] - model.centers[None, :, :]
    sep = np.sqrt(np.sum(diff * diff, axis=-1))
    off = ~np.eye(model.k, dtype=bool)
    if np.any(sep[off] == 0):
        return math.inf
    ratio = (spread[:, None] + spread[None, :]) / np.where(off, sep, 1.0)
    ratio[~off] = -np.inf
    return float(ratio.max(axis=1).mean())


def xb_index(ds: Dataset, ca: ClusterAssignment) -> float:
    _check_lengths(ds, ca)
    _need_two(ca, "xb")
    model = CentroidModel.fit(ds.records, ca.labels)
    diff = model.centers[:, None, :] - model.centers[None, :, :]
    sep2 = np.sum(diff * diff, axis=-1)
    min_sep2 = sep2[~np.eye(model.k, dtype=bool)].min()
    if min_sep2 == 0:
        return math.inf
    return sse(ds, ca) / (ds.n * min_sep2)


@dataclass(frozen=True)
class IndexSpec:
    name: str
    direction: str
    func: Callable[[Dataset, ClusterAssignment], float]
    external: bool = False


def _external(fn: Callable[[ContingencyTable], float]):
    def run(ds: Dataset, ca: ClusterAssignment) -> float:
        return fn(contingency(ds, ca))

    return run


INDEXES: dict[str, IndexSpec] = {
    "f_measure": IndexSpec("f_measure", HIGHER, _external(f_measure), external=True),
    "purity": IndexSpec("purity", HIGHER, _external(purity), external=True),
    "entropy_ext": IndexSpec("entropy_ext", LOWER, _external(external_entropy), external=True),
    "silhouette": IndexSpec("silhouette", HIGHER, silhouette),
    "db": IndexSpec("db", LOWER, db_index),
    "xb": IndexSpec("xb", LOWER, xb_index),
    "sse": IndexSpec("sse", LOWER, sse),
}


def compute(name: str, ds: Dataset, ca: ClusterAssignment) -> float:
    try:
        spec = INDEXES[name]
    except KeyError:
        raise ValueError(f"unknown index {name!r}; choose from {sorted(INDEXES)}") from None
    return spec.func(ds, ca)


def check_range(name: str, value: float, num_classes: Optional[int] = None) -> None:
    """Assert the documented range of an index value."""
    tol = 1e-12
    if name in ("purity", "f_measure"):
        ok = -tol <= value <= 1 + tol
    elif name == "entropy_ext":
        cap = math.log2(num_classes) if num_classes and num_classes > 1 else 0.0
        ok = -tol <= value <= cap + 1e-9
    elif name == "silhouette":
        ok = -1 - tol <= value <= 1 + tol
    else:
        ok = value >= 0
    if not ok:
        raise AssertionError(f"{name}={value} outside its valid range")
