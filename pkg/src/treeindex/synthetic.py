"""Synthetic fixtures: Gaussian blobs and flat EEG-like channels."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .dataset import ClusterAssignment, Dataset
from .eeg_features import ChannelSignal


def two_blobs(
    n: int = 500,
    separation: float = 6.0,
    sigma: float = 1.0,
    d: int = 2,
    seed: int = 0,
) -> Dataset:
    """Two isotropic Gaussian blobs whose centers are ``separation * sigma``
    apart along the first attribute.

    The first ``n // 2`` records belong to ``blob0``, the rest to ``blob1``.
    """
    rng = np.random.default_rng(seed)
    n0 = n // 2
    x = rng.normal(scale=sigma, size=(n, d))
    x[n0:, 0] += separation * sigma
    classes = ["blob0"] * n0 + ["blob1"] * (n - n0)
    return Dataset(f"blobs{seed}", tuple(f"x{j}" for j in range(d)), x, tuple(classes))


def blob_assignment(ds: Dataset) -> ClusterAssignment:
    """Ground-truth assignment of a :func:`two_blobs` dataset."""
    assert ds.true_classes is not None
    return ClusterAssignment(np.array([int(c[-1]) for c in ds.true_classes]))


def random_assignment(n: int, k: int, seed: int) -> ClusterAssignment:
    """Uniform random labels over ``k`` clusters (every cluster non-empty)."""
    rng = np.random.default_rng(seed)
    while True:
        labels = rng.integers(0, k, size=n)
        if np.unique(labels).size == k:
            return ClusterAssignment(labels)


def synthetic_channel(
    channel_id: str,
    seconds: float,
    sample_rate: float = 256.0,
    seed: int = 0,
    seizure: Optional[tuple[float, float]] = None,
) -> ChannelSignal:
    """Integer-valued noise channel; samples inside ``seizure`` get a large
    rhythmic component so the seizure epochs stand out."""
    rng = np.random.default_rng(seed)
    m = int(round(seconds * sample_rate))
    x = rng.normal(scale=30.0, size=m)
    if seizure:
        t = np.arange(m) / sample_rate
        inside = (t >= seizure[0]) & (t < seizure[1])
        x[inside] += 200.0 * np.sin(2 * np.pi * 3.0 * t[inside])
    return ChannelSignal(channel_id, np.round(x), sample_rate)
