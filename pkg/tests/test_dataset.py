import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from treeindex.dataset import (
    ClusterAssignment,
    Dataset,
    DatasetError,
    label_with_clustering,
    load_assignment,
    load_csv,
    min_leaf_size,
    min_max_normalize,
    write_assignment,
    write_csv,
)


def _write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_plain_numeric(tmp_path):
    p = _write(tmp_path, "1,2\n3,4\n5,6\n")
    ds = load_csv(p, has_header=False)
    assert (ds.n, ds.d) == (3, 2)
    assert ds.true_classes is None
    np.testing.assert_array_equal(ds.records, [[1, 2], [3, 4], [5, 6]])


def test_load_with_named_class_column(tmp_path):
    p = _write(
        tmp_path,
        "mcv,alkphos,sgpt,sgot,gammagt,drinks,selector\n"
        "85,92,45,27,31,0.0,1\n"
        "85,64,59,32,23,0.0,2\n",
    )
    ds = load_csv(p, class_column="selector")
    assert ds.d == 6
    assert "selector" not in ds.attributes
    assert ds.true_classes == ("1", "2")


def test_class_column_by_index(tmp_path):
    p = _write(tmp_path, "a,lab,b\n1,x,2\n3,y,4\n")
    ds = load_csv(p, class_column=1)
    assert ds.attributes == ("a", "b")
    assert ds.true_classes == ("x", "y")


def test_non_numeric_cell_names_location(tmp_path):
    p = _write(tmp_path, "a,b\n1,2\n3,abc\n")
    with pytest.raises(DatasetError, match=r"'abc'.*row 3.*'b'"):
        load_csv(p)


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "empty"),
        ("a,a\n1,2\n", "duplicate"),
        ("a,b\n1,nan\n", "non-finite"),
        ("a,b\n1,2\n3\n", "cells"),
    ],
)
def test_load_errors(tmp_path, text, match):
    with pytest.raises(DatasetError, match=match):
        load_csv(_write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(DatasetError, match="no such file"):
        load_csv(tmp_path / "nope.csv")


def test_unknown_class_column(tmp_path):
    with pytest.raises(DatasetError, match="class column"):
        load_csv(_write(tmp_path, "a,b\n1,2\n"), class_column="selector")


def test_dataset_invariants():
    with pytest.raises(DatasetError):
        Dataset("x", ("a",), np.zeros((0, 1)))
    with pytest.raises(DatasetError):
        Dataset("x", ("a", "b"), np.zeros((2, 1)))
    with pytest.raises(DatasetError):
        Dataset("x", ("a",), np.zeros((2, 1)), ("p",))
    ds = Dataset("x", ("a",), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        ds.records[0, 0] = 1.0


@settings(max_examples=50, deadline=None)
@given(
    hnp.arrays(
        np.float64,
        hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=6),
        elements=st.floats(-1e6, 1e6, allow_nan=False, width=64),
    ),
    st.booleans(),
)
def test_csv_round_trip(tmp_path_factory, values, with_classes):
    n, d = values.shape
    classes = tuple("c%d" % (i % 3) for i in range(n)) if with_classes else None
    ds = Dataset("rt", tuple(f"v{j}" for j in range(d)), values, classes)
    path = tmp_path_factory.mktemp("rt") / "rt.csv"
    write_csv(ds, path)
    back = load_csv(path, class_column="class" if with_classes else None)
    np.testing.assert_allclose(back.records, ds.records, rtol=0, atol=1e-12)
    assert back.attributes == ds.attributes
    assert back.true_classes == ds.true_classes


def test_normalize_examples():
    ds = Dataset("n", ("a", "b", "c"), [[2, 5, 0.0], [4, 5, 0.5], [6, 5, 1.0]])
    out = min_max_normalize(ds).records
    np.testing.assert_allclose(out[:, 0], [0, 0.5, 1])
    np.testing.assert_array_equal(out[:, 1], [0, 0, 0])
    np.testing.assert_array_equal(out[:, 2], [0, 0.5, 1])


@settings(max_examples=60, deadline=None)
@given(
    hnp.arrays(
        np.float64,
        hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8),
        elements=st.floats(-1e3, 1e3, allow_nan=False),
    )
)
def test_normalize_idempotent_and_bounded(values):
    ds = Dataset("n", tuple(f"v{j}" for j in range(values.shape[1])), values)
    once = min_max_normalize(ds)
    twice = min_max_normalize(once)
    assert once.records.min() >= 0 and once.records.max() <= 1
    np.testing.assert_allclose(twice.records, once.records, atol=1e-12)


@pytest.mark.parametrize(
    "labels, k", [([0, 0, 1, 1], 2), ([0, 0, 0, 0], 1), ([3, 7, 3, 9], 3)]
)
def test_label_with_clustering(labels, k):
    ds = Dataset("l", ("a",), np.arange(4.0)[:, None])
    before = ds.records.copy()
    lds = label_with_clustering(ds, ClusterAssignment(labels))
    assert lds.num_classes == k
    np.testing.assert_array_equal(lds.class_of, labels)
    np.testing.assert_array_equal(ds.records, before)


def test_label_length_mismatch():
    ds = Dataset("l", ("a",), np.arange(4.0)[:, None])
    with pytest.raises(DatasetError):
        label_with_clustering(ds, ClusterAssignment([0, 1, 0]))


def test_assignment_declared_k_and_canonical():
    ca = ClusterAssignment([5, 5, 2, 9, 2])
    assert ca.declared_k == 3
    np.testing.assert_array_equal(ca.canonical().labels, [0, 0, 1, 2, 1])
    with pytest.raises(DatasetError):
        ClusterAssignment([0, -1])


@pytest.mark.parametrize("n, expected", [(8280, 15), (100, 2), (1000, 10), (1, 2), (199, 2), (1599, 15)])
def test_min_leaf_size(n, expected):
    assert min_leaf_size(n) == expected


@given(st.integers(1, 10**6), st.integers(0, 10**6))
def test_min_leaf_monotone_and_bounded(n, extra):
    a, b = min_leaf_size(n), min_leaf_size(n + extra)
    assert 2 <= a <= b <= 15


def test_assignment_round_trip(tmp_path):
    ca = ClusterAssignment([1, 0, 0, 2])
    path = tmp_path / "a.csv"
    write_assignment(ca, path)
    assert path.read_text().splitlines()[0] == "record_index,cluster_id"
    assert load_assignment(path, 4) == ca
    with pytest.raises(DatasetError):
        load_assignment(path, 5)
    # shuffled rows, no header
    (tmp_path / "b.csv").write_text("2,0\n0,1\n3,2\n1,0\n")
    assert load_assignment(tmp_path / "b.csv") == ca
