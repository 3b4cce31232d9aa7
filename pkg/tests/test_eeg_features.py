import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treeindex.eeg_features import (
    FEATURE_NAMES,
    NON_SEIZURE,
    SEIZURE,
    ChannelSignal,
    EEGError,
    Epoch,
    SeizureInterval,
    build_eeg_dataset,
    dataset_from_manifest,
    epoch_signal,
    extract_features,
    label_epoch,
    load_manifest,
)


def sig(n, rate=256.0, seed=0):
    return ChannelSignal("c", np.random.default_rng(seed).normal(size=n), rate)


def epoch(samples, start=0.0, end=10.0):
    return Epoch("c", 0, np.asarray(samples, dtype=float), start, end)


@pytest.mark.parametrize("n, count", [(921_600, 360), (925_000, 361), (2560, 1)])
def test_epoch_counts(n, count):
    eps = epoch_signal(sig(n))
    assert len(eps) == count
    assert all(e.samples.size == 2560 for e in eps)
    assert eps[-1].start_second == (count - 1) * 10.0


def test_epoch_too_short():
    with pytest.raises(EEGError):
        epoch_signal(sig(1000))


def test_channel_validation():
    with pytest.raises(EEGError):
        ChannelSignal("c", np.array([1.0, np.nan]))
    with pytest.raises(EEGError):
        ChannelSignal("c", np.ones(5), sample_rate=0)
    with pytest.raises(EEGError):
        SeizureInterval(5, 5)


def test_constant_epoch():
    f = extract_features(epoch(np.full(2560, 4.0)))
    assert (f.max, f.min, f.mean, f.std) == (4.0, 4.0, 4.0, 0.0)
    assert f.line_length == 0.0
    assert f.energy == 2560 * 16.0
    assert f.entropy == 0.0
    assert f.skewness == 0.0 and f.kurtosis == 0.0
    assert f.degenerate


def test_two_sample_epoch():
    f = extract_features(epoch([3, 4]))
    assert f.line_length == 1.0
    assert f.energy == 25.0
    assert f.mean == 3.5
    assert f.std == 0.5
    assert f.skewness == 0.0
    assert f.kurtosis == 1.0
    assert not f.degenerate


def test_standard_normal_moments():
    f = extract_features(epoch(np.random.default_rng(2024).normal(size=2560)))
    assert abs(f.skewness) < 0.15
    assert abs(f.kurtosis - 3.0) < 0.5
    # 51 bins over a normal sample: close to but below log2(51)
    assert 4.0 < f.entropy < math.log2(51)


def test_entropy_uniform_histogram():
    # every bin gets the same count
    f = extract_features(epoch(np.arange(16.0)), bins=4)
    assert f.entropy == pytest.approx(2.0, abs=1e-12)


def test_labels_on_reference_interval():
    iv = [SeizureInterval(2996, 3036)]
    labels = [label_epoch(e, iv) for e in epoch_signal(sig(921_600))]
    seizure = [i for i, l in enumerate(labels) if l == SEIZURE]
    assert seizure == [299, 300, 301, 302, 303]
    assert label_epoch(epoch(np.ones(3), 3040, 3050), iv) == NON_SEIZURE
    # touching endpoints is not an overlap
    assert label_epoch(epoch(np.ones(3), 3036, 3046), iv) == NON_SEIZURE
    assert label_epoch(epoch(np.ones(3), 2986, 2996), iv) == NON_SEIZURE


def test_build_dataset_shapes():
    ds = build_eeg_dataset([sig(25_600)])
    assert (ds.n, ds.d) == (10, 9)
    assert ds.attributes == FEATURE_NAMES
    mixed = build_eeg_dataset([sig(25_600), sig(30_000, seed=1), sig(5_200, seed=2)])
    assert mixed.n == 10 + 11 + 2


def test_build_dataset_matches_per_epoch():
    channels = [sig(12_800, seed=s) for s in range(3)]
    ds = build_eeg_dataset(channels, [SeizureInterval(12, 25)])
    expected = []
    labels = []
    for ch in channels:
        for ep in epoch_signal(ch):
            expected.append(extract_features(ep).values())
            labels.append(label_epoch(ep, [SeizureInterval(12, 25)]))
    np.testing.assert_array_equal(ds.records, np.array(expected))
    assert list(ds.true_classes) == labels
    assert labels[:5] == [NON_SEIZURE, SEIZURE, SEIZURE, NON_SEIZURE, NON_SEIZURE]


def test_build_needs_channels():
    with pytest.raises(EEGError):
        build_eeg_dataset([])


adversarial = st.one_of(
    st.lists(st.integers(-1000, 1000), min_size=2, max_size=300),
    st.builds(lambda c, n: [c] * n, st.integers(-50, 50), st.integers(1, 50)),
    st.builds(lambda n: [(-1) ** i for i in range(n)], st.integers(2, 100)),
    st.builds(lambda n, p, h: [h if i == p % n else 0 for i in range(n)], st.integers(2, 100), st.integers(0, 99), st.integers(-10**6, 10**6)),
)


@settings(max_examples=300, deadline=None)
@given(adversarial)
def test_feature_bounds(samples):
    f = extract_features(epoch(samples))
    assert f.min <= f.mean <= f.max
    assert f.std >= 0 and f.line_length >= 0 and f.energy >= 0 and f.entropy >= 0
    assert f.kurtosis >= 0
    assert all(math.isfinite(v) for v in f.values())


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-500, 500), min_size=2, max_size=200), st.integers(-10_000, 10_000))
def test_shift_invariance(samples, c):
    a = extract_features(epoch(samples))
    b = extract_features(epoch(np.asarray(samples) + c))
    assert b.entropy == a.entropy
    assert b.line_length == a.line_length
    for name in ("std", "skewness", "kurtosis"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), abs=1e-9, rel=1e-9)
    assert (b.max, b.min) == (a.max + c, a.min + c)
    assert b.mean == pytest.approx(a.mean + c, abs=1e-9)


@settings(max_examples=200)
@given(
    st.floats(0, 200),
    st.floats(0.1, 50),
    st.floats(0, 20),
    st.floats(0, 20),
    st.integers(0, 30),
)
def test_labeling_monotone(start, length, grow_left, grow_right, idx):
    small = SeizureInterval(start, start + length)
    big = SeizureInterval(max(0.0, start - grow_left), start + length + grow_right)
    ep = epoch(np.ones(2), idx * 10.0, idx * 10.0 + 10.0)
    if label_epoch(ep, [small]) == SEIZURE:
        assert label_epoch(ep, [big]) == SEIZURE


def _write_manifest(tmp_path, seconds=60, channels=2, npy=False, seizures=((20, 35),)):
    entries = []
    for c in range(channels):
        data = np.round(np.random.default_rng(c).normal(scale=20, size=seconds * 256))
        if npy:
            name = f"ch{c}.npy"
            np.save(tmp_path / name, data)
        else:
            name = f"ch{c}.txt"
            (tmp_path / name).write_text("\n".join(str(int(v)) for v in data) + "\n")
        entries.append({"id": f"ch{c}", "path": name})
    man = {"sample_rate": 256, "epoch_seconds": 10, "channels": entries, "seizures": [list(s) for s in seizures]}
    path = tmp_path / "rec.json"
    path.write_text(json.dumps(man))
    return path


@pytest.mark.parametrize("npy", [False, True])
def test_manifest_round_trip(tmp_path, npy):
    path = _write_manifest(tmp_path, npy=npy)
    man = load_manifest(str(path))
    assert man.sample_rate == 256.0 and len(man.channels) == 2
    ds = dataset_from_manifest(str(path))
    assert (ds.n, ds.d) == (12, 9)
    assert ds.name == "rec"
    assert sum(c == SEIZURE for c in ds.true_classes) == 2 * 2


def test_manifest_errors(tmp_path):
    with pytest.raises(EEGError, match="no such manifest"):
        load_manifest(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(EEGError):
        load_manifest(str(bad))
    bad.write_text(json.dumps({"channels": []}))
    with pytest.raises(EEGError):
        load_manifest(str(bad))
    bad.write_text(json.dumps({"channels": [{"id": "a", "path": "nope.txt"}]}))
    with pytest.raises(EEGError, match="missing channel file"):
        dataset_from_manifest(str(bad))
