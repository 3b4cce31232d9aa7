"""Turn raw per-channel EEG sample streams into labelled epoch feature records.

Each channel is cut into consecutive, non-overlapping epochs (10 s by
default); a trailing partial epoch is dropped. Nine features are computed
per epoch and each epoch is labelled ``seizure`` if it overlaps an annotated
seizure interval by a positive duration.

Feature definitions (population statistics over the epoch's samples):

=============  ==============================================================
Max, Min       sample extremes
Mean           arithmetic mean
Std            population standard deviation
Kurtosis       ``m4 / m2**2`` (not excess kurtosis)
Skewness       ``m3 / m2**1.5``
Entropy        Shannon entropy (bits) of an equal-width amplitude histogram
               over ``[min, max]`` with ``ceil(sqrt(N))`` bins by default
LineLength     ``sum |x[i+1] - x[i]|``
Energy         ``sum x[i]**2``
=============  ==============================================================

A constant epoch has undefined skewness and kurtosis; both are reported as
0 and the epoch is flagged degenerate.

Input is one sample file per channel plus a JSON manifest; EDF recordings
must be converted to flat sample files first (see :func:`load_manifest`).
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .dataset import Dataset

logger = logging.getLogger(__name__)

FEATURE_NAMES = (
    "Max",
    "Min",
    "Mean",
    "Std",
    "Kurtosis",
    "Skewness",
    "Entropy",
    "LineLength",
    "Energy",
)
SEIZURE = "seizure"
NON_SEIZURE = "non-seizure"
DEFAULT_SAMPLE_RATE = 256.0
DEFAULT_EPOCH_SECONDS = 10.0


class EEGError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelSignal:
    channel_id: str
    samples: np.ndarray
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self) -> None:
        if not self.sample_rate > 0:
            raise EEGError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=float).ravel()
        if not np.all(np.isfinite(samples)):
            raise EEGError(f"channel {self.channel_id!r} has non-finite samples")
        object.__setattr__(self, "samples", samples)


@dataclass(frozen=True)
class Epoch:
    channel_id: str
    epoch_index: int
    samples: np.ndarray
    start_second: float
    end_second: float


@dataclass(frozen=True)
class SeizureInterval:
    start_second: float
    end_second: float

    def __post_init__(self) -> None:
        if not 0 <= self.start_second < self.end_second:
            raise EEGError(f"bad seizure interval [{self.start_second}, {self.end_second})")


@dataclass(frozen=True)
class FeatureRecord:
    max: float
    min: float
    mean: float
    std: float
    kurtosis: float
    skewness: float
    entropy: float
    line_length: float
    energy: float
    degenerate: bool = False
    label: Optional[str] = None

    def values(self) -> tuple[float, ...]:
        return (
            self.max,
            self.min,
            self.mean,
            self.std,
            self.kurtosis,
            self.skewness,
            self.entropy,
            self.line_length,
            self.energy,
        )


def _epoch_length(sample_rate: float, epoch_seconds: float) -> int:
    length = sample_rate * epoch_seconds
    if abs(length - round(length)) > 1e-9 or round(length) < 1:
        raise EEGError(f"{epoch_seconds} s at {sample_rate} Hz is not a whole number of samples")
    return int(round(length))


def epoch_signal(sig: ChannelSignal, epoch_seconds: float = DEFAULT_EPOCH_SECONDS) -> list[Epoch]:
    size = _epoch_length(sig.sample_rate, epoch_seconds)
    count = sig.samples.size // size
    if count == 0:
        raise EEGError(
            f"channel {sig.channel_id!r} has {sig.samples.size} samples, "
            f"fewer than one {epoch_seconds} s epoch ({size})"
        )
    return [
        Epoch(
            sig.channel_id,
            i,
            sig.samples[i * size : (i + 1) * size],
            i * epoch_seconds,
            (i + 1) * epoch_seconds,
        )
        for i in range(count)
    ]


def default_bins(num_samples: int) -> int:
    return max(1, math.ceil(math.sqrt(num_samples)))


def _features_matrix(block: np.ndarray, bins: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Features for each row of ``block`` (one epoch per row).

    Returns ``(features, degenerate)`` with features shaped ``(rows, 9)``.
    """
    block = np.asarray(block, dtype=float)
    rows, m = block.shape
    if m == 0:
        raise EEGError("empty epoch")
    nbins = default_bins(m) if bins is None else int(bins)
    if nbins < 1:
        raise EEGError("histogram needs at least one bin")

    hi = block.max(axis=1)
    lo = block.min(axis=1)
    # a float mean can stray outside [min, max] by rounding
    mean = np.clip(block.mean(axis=1), lo, hi)
    centred = block - mean[:, None]
    m2 = np.mean(centred**2, axis=1)
    m3 = np.mean(centred**3, axis=1)
    m4 = np.mean(centred**4, axis=1)
    degenerate = hi == lo
    safe_m2 = np.where(degenerate, 1.0, m2)
    skew = np.where(degenerate, 0.0, m3 / safe_m2**1.5)
    kurt = np.where(degenerate, 0.0, m4 / safe_m2**2)
    std = np.sqrt(m2)

    span = np.where(degenerate, 1.0, hi - lo)
    idx = np.floor((block - lo[:, None]) * nbins / span[:, None]).astype(np.int64)
    np.clip(idx, 0, nbins - 1, out=idx)
    flat = (idx + (np.arange(rows) * nbins)[:, None]).ravel()
    hist = np.bincount(flat, minlength=rows * nbins).reshape(rows, nbins)
    p = hist / m
    with np.errstate(divide="ignore", invalid="ignore"):
        entropy = -np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0).sum(axis=1)
    entropy = np.where(degenerate, 0.0, np.maximum(entropy, 0.0))

    line_length = np.abs(np.diff(block, axis=1)).sum(axis=1)
    energy = np.sum(block * block, axis=1)
    feats = np.column_stack([hi, lo, mean, std, kurt, skew, entropy, line_length, energy])
    return feats, degenerate


def extract_features(ep: Epoch, bins: Optional[int] = None) -> FeatureRecord:
    samples = np.asarray(ep.samples, dtype=float)
    if samples.size == 0:
        raise EEGError("empty epoch")
    feats, degenerate = _features_matrix(samples[None, :], bins)
    return FeatureRecord(*(float(v) for v in feats[0]), degenerate=bool(degenerate[0]))


def label_epoch(ep: Epoch, intervals: Iterable[SeizureInterval]) -> str:
    for iv in intervals:
        if max(ep.start_second, iv.start_second) < min(ep.end_second, iv.end_second):
            return SEIZURE
    return NON_SEIZURE


def _label_block(count: int, epoch_seconds: float, intervals: Sequence[SeizureInterval]) -> list[str]:
    starts = np.arange(count) * epoch_seconds
    ends = starts + epoch_seconds
    hit = np.zeros(count, dtype=bool)
    for iv in intervals:
        hit |= np.maximum(starts, iv.start_second) < np.minimum(ends, iv.end_second)
    return [SEIZURE if h else NON_SEIZURE for h in hit]


def build_eeg_dataset(
    channels: Sequence[ChannelSignal],
    intervals: Sequence[SeizureInterval] = (),
    epoch_seconds: float = DEFAULT_EPOCH_SECONDS,
    bins: Optional[int] = None,
    name: str = "eeg",
) -> Dataset:
    """Stack every channel's epoch features: channel order, then epoch order."""
    if not channels:
        raise EEGError("need at least one channel")
    blocks = []
    labels: list[str] = []
    degenerate = 0
    for sig in channels:
        size = _epoch_length(sig.sample_rate, epoch_seconds)
        count = sig.samples.size // size
        if count == 0:
            raise EEGError(
                f"channel {sig.channel_id!r} has {sig.samples.size} samples, "
                f"fewer than one epoch ({size})"
            )
        feats, flags = _features_matrix(sig.samples[: count * size].reshape(count, size), bins)
        blocks.append(feats)
        degenerate += int(flags.sum())
        labels.extend(_label_block(count, epoch_seconds, intervals))
    if degenerate:
        logger.warning("%d constant epochs: skewness/kurtosis set to 0", degenerate)
    return Dataset(name, FEATURE_NAMES, np.vstack(blocks), tuple(labels))


@dataclass(frozen=True)
class Manifest:
    sample_rate: float
    epoch_seconds: float
    channels: tuple[tuple[str, str], ...]  # (channel_id, absolute path)
    seizures: tuple[SeizureInterval, ...]


def load_manifest(path: str) -> Manifest:
    """Parse a JSON manifest.

    Example::

        {
          "sample_rate": 256,
          "epoch_seconds": 10,
          "channels": [{"id": "FP1-F7", "path": "FP1-F7.txt"}, ...],
          "seizures": [[2996, 3036]]
        }

    Channel paths are relative to the manifest's directory. Sample files are
    a single column of reals (``.txt``/``.csv``) or a 1-D ``.npy`` array; an
    EDF converter only needs to write one of those per channel.
    """
    if not os.path.exists(path):
        raise EEGError(f"no such manifest: {path}")
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise EEGError(f"manifest {path} is not valid JSON: {exc}") from None
    root = os.path.dirname(os.path.abspath(path))
    try:
        channels = tuple(
            (str(c["id"]), os.path.join(root, str(c["path"]))) for c in raw["channels"]
        )
        seizures = tuple(SeizureInterval(float(s), float(e)) for s, e in raw.get("seizures", []))
        rate = float(raw.get("sample_rate", DEFAULT_SAMPLE_RATE))
        epoch = float(raw.get("epoch_seconds", DEFAULT_EPOCH_SECONDS))
    except (KeyError, TypeError, ValueError) as exc:
        raise EEGError(f"malformed manifest {path}: {exc}") from None
    if not channels:
        raise EEGError(f"manifest {path} lists no channels")
    return Manifest(rate, epoch, channels, seizures)


def read_samples(path: str) -> np.ndarray:
    if not os.path.exists(path):
        raise EEGError(f"missing channel file: {path}")
    if path.endswith(".npy"):
        data = np.load(path)
    else:
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=1)
        except ValueError as exc:
            raise EEGError(f"could not parse samples in {path}: {exc}") from None
    data = np.asarray(data, dtype=float)
    if data.ndim != 1:
        raise EEGError(f"{path} must hold a single column of samples")
    return data


def dataset_from_manifest(path: str, bins: Optional[int] = None) -> Dataset:
    man = load_manifest(path)
    signals = [
        ChannelSignal(cid, read_samples(cpath), man.sample_rate) for cid, cpath in man.channels
    ]
    name = os.path.splitext(os.path.basename(path))[0]
    return build_eeg_dataset(signals, man.seizures, man.epoch_seconds, bins, name)
