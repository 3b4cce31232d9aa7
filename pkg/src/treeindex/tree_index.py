"""The Tree Index score of a clustering.

Each record is labelled with its cluster ID, a decision tree is grown on
those labels, and every leaf contributes ``entropy * depth``. The sum is
divided by the number of clusters. Lower is better. A tree that never
splits (its root is its only leaf) scores ``inf``.

Scores are plain floats with ``math.inf`` standing in for the unbounded
value, so ordinary comparison already ranks ``inf`` worst.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .dataset import ClusterAssignment, Dataset, label_with_clustering, min_leaf_size
from .decision_tree import DecisionTree, LeafSummary, build_tree, leaves

INFINITY = math.inf


@dataclass(frozen=True)
class TreeIndexReport:
    score: float
    per_leaf: tuple[LeafSummary, ...]
    num_clusters: int
    num_leaves: int
    min_leaf_used: int
    tree: Optional[DecisionTree] = None

    def summary(self) -> str:
        return (
            f"tree_index={format_score(self.score)} leaves={self.num_leaves} "
            f"clusters={self.num_clusters} min_leaf={self.min_leaf_used}"
        )

    def leaf_table(self) -> str:
        rows = ["leaf,entropy,depth,support"]
        for i, leaf in enumerate(self.per_leaf):
            rows.append(f"{i},{leaf.entropy:.6f},{leaf.depth},{leaf.support}")
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "tree_index": score_to_json(self.score),
            "leaves": self.num_leaves,
            "clusters": self.num_clusters,
            "min_leaf": self.min_leaf_used,
            "per_leaf": [
                {"entropy": leaf.entropy, "depth": leaf.depth, "support": leaf.support}
                for leaf in self.per_leaf
            ],
        }


def format_score(value: float) -> str:
    """Text rendering: ``inf`` for the unbounded score, else 6 decimals."""
    if math.isinf(value):
        return "inf"
    if math.isnan(value):
        return "nan"
    return f"{value:.6f}"


def score_to_json(value: float):
    return "inf" if math.isinf(value) else value


def parse_score(text: str) -> float:
    return float(text)


def score_from_leaves(per_leaf: Sequence[LeafSummary], num_clusters: int) -> float:
    if num_clusters < 1:
        raise ValueError(f"num_clusters must be >= 1, got {num_clusters}")
    if not per_leaf:
        raise ValueError("a tree has at least one leaf")
    # a depth-0 leaf is the whole tree; its weight is infinite whatever its entropy
    if any(leaf.depth == 0 for leaf in per_leaf):
        return INFINITY
    return sum(leaf.entropy * leaf.depth for leaf in per_leaf) / num_clusters


def tree_index_of_tree(tree: DecisionTree, num_clusters: int) -> TreeIndexReport:
    if tree.num_classes != num_clusters:
        raise ValueError(
            f"tree was grown over {tree.num_classes} classes, not {num_clusters}"
        )
    per_leaf = tuple(leaves(tree))
    return TreeIndexReport(
        score=score_from_leaves(per_leaf, num_clusters),
        per_leaf=per_leaf,
        num_clusters=num_clusters,
        num_leaves=len(per_leaf),
        min_leaf_used=tree.min_leaf,
        tree=tree,
    )


def evaluate_clustering(
    ds: Dataset, ca: ClusterAssignment, min_leaf: Optional[int] = None
) -> TreeIndexReport:
    """Label, grow, score.

    ``min_leaf`` defaults to :func:`min_leaf_size` of the record count.
    """
    lds = label_with_clustering(ds, ca)
    leaf_min = min_leaf_size(ds.n) if min_leaf is None else min_leaf
    tree = build_tree(lds, leaf_min)
    return tree_index_of_tree(tree, ca.declared_k)


def average_runs(scores: Iterable[float]) -> float:
    """Mean of per-run scores; a single ``inf`` makes the mean ``inf``."""
    values = list(scores)
    if not values:
        raise ValueError("cannot average an empty list of scores")
    if any(math.isinf(v) for v in values):
        return INFINITY
    return math.fsum(values) / len(values)
