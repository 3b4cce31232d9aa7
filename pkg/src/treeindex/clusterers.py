"""Reference clusterers: Lloyd's k-means with uniform or k-means++ seeding,
random choice of k, and a one-vs-rest degenerate partition.

Every random draw goes through a ``numpy.random.Generator`` built from an
explicit integer seed, so a (dataset, config) pair always yields the same
assignment and trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .dataset import ClusterAssignment, Dataset

UNIFORM = "uniform"
PLUS_PLUS = "plus-plus"


class ClusteringError(ValueError):
    pass


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    max_iterations: int = 50
    movement_threshold: float = 0.005
    seeding: str = UNIFORM
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ClusteringError(f"k must be >= 1, got {self.k}")
        if self.max_iterations < 1:
            raise ClusteringError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.movement_threshold < 0:
            raise ClusteringError("movement_threshold must be >= 0")
        if self.seeding not in (UNIFORM, PLUS_PLUS):
            raise ClusteringError(f"unknown seeding {self.seeding!r}")


@dataclass(frozen=True)
class KMeansTrace:
    sse: tuple[float, ...]
    max_shift: tuple[float, ...]
    centers: np.ndarray = field(repr=False)
    iterations_run: int
    converged: bool

    def to_csv(self) -> str:
        rows = ["iteration,sse,max_shift"]
        for i, (s, m) in enumerate(zip(self.sse, self.max_shift), start=1):
            rows.append(f"{i},{s!r},{m!r}")
        return "\n".join(rows) + "\n"


def random_k(n: int, rng: np.random.Generator) -> int:
    """Uniform integer in ``[2, floor(sqrt(n))]``."""
    if n < 4:
        raise ClusteringError(f"random k needs n >= 4 (range [2, sqrt(n)] is empty for n={n})")
    return int(rng.integers(2, math.isqrt(n) + 1))


def _sq_dist_to(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = np.zeros((x.shape[0], centers.shape[0]))
    for j in range(x.shape[1]):
        diff = x[:, j, None] - centers[None, :, j]
        d2 += diff * diff
    return d2


def _pp_indices(x: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = _sq_dist_to(x, x[chosen[0]][None, :])[:, 0]
    while len(chosen) < k:
        total = d2.sum()
        if total > 0:
            cum = np.cumsum(d2)
            u = rng.random() * cum[-1]
            # side="right" skips zero-mass records
            nxt = int(np.searchsorted(cum, u, side="right"))
            nxt = min(nxt, n - 1)
            while d2[nxt] == 0:  # only reachable via rounding at the top end
                nxt -= 1
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, _sq_dist_to(x, x[nxt][None, :])[:, 0])
    return chosen


def kmeans_pp_seed(ds: Dataset, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ initial centers (D^2 weighting).

    If every remaining record coincides with a chosen center the next pick
    is uniform over records not yet chosen.
    """
    if not 1 <= k <= ds.n:
        raise ClusteringError(f"k={k} must be in [1, n={ds.n}]")
    return ds.records[_pp_indices(ds.records, k, rng)].copy()


def _fill_empty(x: np.ndarray, centers: np.ndarray, labels: np.ndarray, k: int) -> None:
    """Move the record farthest from its center into each empty cluster.

    Donors must come from clusters with at least two members and must not
    already sit on their center, so no new empty cluster appears and SSE
    does not increase. Clusters that can't be filled stay empty.
    """
    sizes = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(sizes == 0)
    if empty.size == 0:
        return
    dist = np.sum((x - centers[labels]) ** 2, axis=1)
    for j in empty:
        ok = (sizes[labels] >= 2) & (dist > 0)
        if not ok.any():
            break
        r = int(np.argmax(np.where(ok, dist, -1.0)))
        sizes[labels[r]] -= 1
        labels[r] = j
        sizes[j] = 1
        dist[r] = 0.0


def _means(x: np.ndarray, labels: np.ndarray, old: np.ndarray) -> np.ndarray:
    k = old.shape[0]
    sizes = np.bincount(labels, minlength=k)
    sums = np.zeros_like(old)
    np.add.at(sums, labels, x)  # fixed record order
    out = old.copy()
    live = sizes > 0
    out[live] = sums[live] / sizes[live, None]
    return out


def kmeans(ds: Dataset, cfg: KMeansConfig) -> tuple[ClusterAssignment, KMeansTrace]:
    """Lloyd iterations until the largest center move is within threshold.

    Returned labels are dense, numbered by first occurrence; if clusters
    vanish (only possible with duplicate records) ``declared_k < cfg.k``.
    """
    x = ds.records
    n, k = x.shape[0], cfg.k
    if k > n:
        raise ClusteringError(f"k={k} exceeds the number of records n={n}")
    rng = np.random.default_rng(cfg.rng_seed)
    if cfg.seeding == PLUS_PLUS:
        centers = kmeans_pp_seed(ds, k, rng)
    else:
        centers = x[np.sort(rng.choice(n, size=k, replace=False))].copy()

    sse_hist: list[float] = []
    shifts: list[float] = []
    converged = False
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(cfg.max_iterations):
        labels = np.argmin(_sq_dist_to(x, centers), axis=1)
        _fill_empty(x, centers, labels, k)
        new_centers = _means(x, labels, centers)
        shift = float(np.sqrt(np.max(np.sum((new_centers - centers) ** 2, axis=1))))
        centers = new_centers
        resid = x - centers[labels]
        sse_hist.append(float(np.sum(resid * resid)))
        shifts.append(shift)
        if shift <= cfg.movement_threshold:
            converged = True
            break

    assignment = ClusterAssignment(labels).canonical()
    # reorder surviving centers to match canonical IDs
    order = [int(labels[np.flatnonzero(assignment.labels == c)[0]]) for c in range(assignment.declared_k)]
    trace = KMeansTrace(
        sse=tuple(sse_hist),
        max_shift=tuple(shifts),
        centers=centers[order].copy(),
        iterations_run=len(sse_hist),
        converged=converged,
    )
    return assignment, trace


def degenerate_one_vs_rest(ds: Dataset, isolate: int) -> ClusterAssignment:
    """Record ``isolate`` alone in cluster 1, everything else in cluster 0."""
    if ds.n < 2:
        raise ClusteringError("one-vs-rest needs at least 2 records")
    if not 0 <= isolate < ds.n:
        raise ClusteringError(f"isolate index {isolate} out of range for n={ds.n}")
    labels = np.zeros(ds.n, dtype=np.int64)
    labels[isolate] = 1
    return ClusterAssignment(labels)


CLUSTERERS = ("kmeans", "kmeans++", "degenerate")


@dataclass(frozen=True)
class ClusterRun:
    assignment: ClusterAssignment
    clusterer: str
    k_requested: Optional[int]
    seed: int
    trace: Optional[KMeansTrace] = None


def run_clusterer(
    name: str,
    ds: Dataset,
    k: Union[int, str, None] = None,
    seed: int = 0,
    isolate: int = 0,
    max_iterations: int = 50,
    movement_threshold: float = 0.005,
) -> ClusterRun:
    """Dispatch by clusterer name; ``k="random"`` draws k from ``[2, sqrt(n)]``.

    The k draw and the clustering use independent streams spawned from
    ``seed``, so a run can be replayed from its seed alone.
    """
    if name == "degenerate":
        return ClusterRun(degenerate_one_vs_rest(ds, isolate), name, 2, seed)
    if name not in ("kmeans", "kmeans++"):
        raise ClusteringError(f"unknown clusterer {name!r}; choose from {list(CLUSTERERS)}")
    if k is None:
        raise ClusteringError(f"{name} needs k (an integer or 'random')")
    k_stream, km_stream = np.random.SeedSequence(seed).spawn(2)
    if k == "random":
        k_val = random_k(ds.n, np.random.default_rng(k_stream))
    else:
        try:
            k_val = int(k)
        except (TypeError, ValueError):
            raise ClusteringError(f"k must be an integer or 'random', got {k!r}") from None
    cfg = KMeansConfig(
        k=k_val,
        max_iterations=max_iterations,
        movement_threshold=movement_threshold,
        seeding=PLUS_PLUS if name == "kmeans++" else UNIFORM,
        rng_seed=int(km_stream.generate_state(1, dtype=np.uint64)[0]),
    )
    assignment, trace = kmeans(ds, cfg)
    return ClusterRun(assignment, name, k_val, seed, trace)
