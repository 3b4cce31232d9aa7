"""Unpruned C4.5-style induction over continuous attributes.

Splits are binary ``x[a] <= t`` tests with ``t`` the midpoint between two
consecutive distinct observed values. Each candidate's information gain is
reduced by ``log2(N - 1) / |D|`` (``N`` distinct values of the attribute
among the ``|D|`` records at the node), Quinlan's correction for the many
thresholds a continuous attribute offers. Selection uses gain ratio on the
corrected gain, restricted to candidates whose corrected gain is positive
and at least the mean over all positive candidates at the node. Exact ties
go to the lower attribute index, then the lower threshold.

The correction matters here: without it a split that merely parks a lone
record among ``min_leaf - 1`` others always has positive gain, so a
one-record cluster could never produce a bare root.

Split scores are computed from class counts alone, never from attribute
values, so any strictly increasing per-attribute transform produces the same
tree topology and bit-identical leaf statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .dataset import LabeledDataset

# gains at or below this are treated as zero
GAIN_EPS = 1e-12
# gain ratios within this of the best are ties
TIE_EPS = 1e-12


@dataclass(frozen=True)
class Leaf:
    class_counts: tuple[int, ...]
    depth: int

    @property
    def support(self) -> int:
        return sum(self.class_counts)


@dataclass(frozen=True)
class Internal:
    attribute_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"
    depth: int


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class LeafSummary:
    entropy: float
    depth: int
    support: int


@dataclass(frozen=True)
class DecisionTree:
    root: TreeNode
    num_classes: int
    min_leaf: int
    num_leaves: int
    class_ids: tuple[int, ...] = ()
    attributes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Split:
    attribute_index: int
    threshold: float
    gain: float
    adjusted_gain: float
    gain_ratio: float
    left_count: int
    right_count: int


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Shannon entropy in bits of each row of a count matrix."""
    counts = np.asarray(counts, dtype=float)
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / totals
        terms = np.where(counts > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def split_entropy(class_counts: Sequence[int]) -> float:
    counts = np.asarray(class_counts, dtype=float)
    if counts.size == 0 or counts.sum() < 1:
        raise ValueError("entropy of an empty histogram is undefined")
    if np.any(counts < 0):
        raise ValueError(f"negative class count in {list(class_counts)}")
    # sorted so the value does not depend on how clusters are numbered;
    # rounding can leave -0.0 or a hair below zero for pure histograms
    return max(0.0, float(_entropy_rows(np.sort(counts)[None, :])[0]))


def information_gain(parent: Sequence[int], left: Sequence[int], right: Sequence[int]) -> float:
    p, l, r = (np.asarray(h, dtype=float) for h in (parent, left, right))
    if not (p.shape == l.shape == r.shape) or not np.array_equal(l + r, p):
        raise ValueError(f"left {list(left)} + right {list(right)} != parent {list(parent)}")
    n = p.sum()
    n_l, n_r = l.sum(), r.sum()
    gain = split_entropy(p)
    if n_l:
        gain -= n_l / n * split_entropy(l)
    if n_r:
        gain -= n_r / n * split_entropy(r)
    # non-negative by concavity; clamp rounding noise
    return max(0.0, gain)


def gain_ratio(gain: float, left_count: int, right_count: int) -> float:
    if left_count < 1 or right_count < 1:
        raise ValueError("both sides of a split need at least one record")
    n = left_count + right_count
    fl, fr = left_count / n, right_count / n
    split_info = -(fl * np.log2(fl) + fr * np.log2(fr))
    return float(gain / split_info)


def threshold_penalty(distinct_values: int, node_size: int) -> float:
    """``log2(N - 1) / |D|``; zero when the attribute offers one threshold."""
    if distinct_values <= 2:
        return 0.0
    return float(np.log2(distinct_values - 1) / node_size)


def _candidates(xs: np.ndarray, ys: np.ndarray, num_classes: int, min_leaf: int, penalize: bool):
    """All admissible splits of one sorted attribute column.

    Returns (positions, raw gains, corrected gains, ratios) where position
    ``i`` means the left side holds sorted records ``0..i``.
    """
    m = xs.size
    lo, hi = min_leaf - 1, m - min_leaf - 1
    if hi < lo:
        return None
    pos = np.arange(lo, hi + 1)
    pos = pos[xs[pos] < xs[pos + 1]]
    if pos.size == 0:
        return None
    onehot = np.zeros((m, num_classes), dtype=np.int64)
    onehot[np.arange(m), ys] = 1
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    left = cum[pos]
    right = total - left
    n_l = (pos + 1).astype(float)
    n_r = m - n_l
    h_parent = _entropy_rows(total[None, :])[0]
    gains = h_parent - (n_l / m) * _entropy_rows(left) - (n_r / m) * _entropy_rows(right)
    adjusted = gains
    if penalize:
        distinct = 1 + int(np.count_nonzero(xs[1:] > xs[:-1]))
        adjusted = gains - threshold_penalty(distinct, m)
    fl, fr = n_l / m, n_r / m
    split_info = -(fl * np.log2(fl) + fr * np.log2(fr))
    return pos, gains, adjusted, adjusted / split_info


def best_split(
    x: np.ndarray,
    y: np.ndarray,
    num_classes: int,
    min_leaf: int,
    penalize: bool = True,
) -> Optional[Split]:
    """Choose the split at a node holding records ``x`` with class codes ``y``.

    ``y`` must be dense codes in ``0..num_classes-1``. Returns ``None`` when
    no admissible split has positive corrected gain.
    """
    found = []
    for a in range(x.shape[1]):
        order = np.argsort(x[:, a], kind="stable")
        xs = x[order, a]
        res = _candidates(xs, y[order], num_classes, min_leaf, penalize)
        if res is not None:
            found.append((a, xs, *res))
    if not found:
        return None

    all_gains = np.concatenate([f[4] for f in found])
    positive = all_gains > GAIN_EPS
    if not positive.any():
        return None
    mean_gain = all_gains[positive].mean()

    masked = []
    for a, xs, pos, raw, adj, ratios in found:
        ok = (adj > GAIN_EPS) & (adj >= mean_gain - GAIN_EPS)
        masked.append(np.where(ok, ratios, -np.inf))
    best_ratio = max(float(r.max()) for r in masked)

    best = None
    for (a, xs, pos, raw, adj, _), r in zip(found, masked):
        hits = np.flatnonzero(r >= best_ratio - TIE_EPS)
        if hits.size:
            j = int(hits[0])
            best = (float(raw[j]), float(adj[j]), a, int(pos[j]), xs)
            break
    assert best is not None
    gain, adjusted, a, i, xs = best
    lo_v, hi_v = xs[i], xs[i + 1]
    threshold = (lo_v + hi_v) / 2.0
    if not lo_v < threshold < hi_v:
        # adjacent floats: the midpoint rounds onto an endpoint
        threshold = lo_v
    m = xs.size
    return Split(a, float(threshold), gain, adjusted, best_ratio, i + 1, m - i - 1)


def build_tree(
    lds: LabeledDataset,
    min_leaf: int,
    max_depth: Optional[int] = None,
    penalize: bool = True,
) -> DecisionTree:
    """Grow an unpruned tree on the cluster labels of ``lds``.

    Nodes stop splitting when pure, when no split leaves ``min_leaf`` records
    on both sides, or when no split has positive corrected gain.
    ``penalize=False`` drops the threshold correction (plain gain ratio).
    """
    if min_leaf < 1:
        raise ValueError(f"min_leaf must be >= 1, got {min_leaf}")
    x = lds.base.records
    class_ids, y = np.unique(lds.class_of, return_inverse=True)
    k = class_ids.size
    leaves = 0

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        nonlocal leaves
        yy = y[idx]
        counts = np.bincount(yy, minlength=k)
        split = None
        if np.count_nonzero(counts) > 1 and (max_depth is None or depth < max_depth):
            split = best_split(x[idx], yy, k, min_leaf, penalize)
        if split is None:
            leaves += 1
            return Leaf(tuple(int(c) for c in counts), depth)
        go_left = x[idx, split.attribute_index] <= split.threshold
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        return Internal(split.attribute_index, split.threshold, left, right, depth)

    root = grow(np.arange(lds.base.n), 0)
    return DecisionTree(
        root=root,
        num_classes=k,
        min_leaf=min_leaf,
        num_leaves=leaves,
        class_ids=tuple(int(c) for c in class_ids),
        attributes=lds.base.attributes,
    )


def iter_leaves(node: TreeNode):
    """Leaves in left-to-right order."""
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Leaf):
            yield cur
        else:
            stack.append(cur.right)
            stack.append(cur.left)


def leaves(tree: DecisionTree) -> list[LeafSummary]:
    return [
        LeafSummary(split_entropy(leaf.class_counts), leaf.depth, leaf.support)
        for leaf in iter_leaves(tree.root)
    ]


def tree_depth(tree: DecisionTree) -> int:
    return max(leaf.depth for leaf in iter_leaves(tree.root))


def topology(node: TreeNode):
    """Nested tuple of the tree shape, ignoring thresholds."""
    if isinstance(node, Leaf):
        return ("leaf", node.class_counts, node.depth)
    return ("split", node.attribute_index, topology(node.left), topology(node.right))


def dump_tree(tree: DecisionTree, fmt: str = "{:.6g}") -> str:
    """Indented text rendering, one test or leaf per line."""
    names = tree.attributes
    lines: list[str] = []

    def name(a: int) -> str:
        return names[a] if a < len(names) else f"attr{a}"

    def walk(node: TreeNode, indent: str) -> None:
        if isinstance(node, Leaf):
            counts = ", ".join(str(c) for c in node.class_counts)
            lines.append(f"{indent}class counts [{counts}] depth={node.depth}")
            return
        t = fmt.format(node.threshold)
        lines.append(f"{indent}{name(node.attribute_index)} <= {t}")
        walk(node.left, indent + "  ")
        lines.append(f"{indent}{name(node.attribute_index)} > {t}")
        walk(node.right, indent + "  ")

    walk(tree.root, "")
    return "\n".join(lines) + "\n"
