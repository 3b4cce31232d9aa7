"""Cluster validation with the Tree Index and conventional baselines."""

from .clusterers import (
    KMeansConfig,
    degenerate_one_vs_rest,
    kmeans,
    kmeans_pp_seed,
    random_k,
    run_clusterer,
)
from .dataset import (
    ClusterAssignment,
    Dataset,
    LabeledDataset,
    label_with_clustering,
    load_csv,
    min_leaf_size,
    min_max_normalize,
)
from .decision_tree import DecisionTree, build_tree, leaves
from .tree_index import INFINITY, TreeIndexReport, average_runs, evaluate_clustering, tree_index_of_tree

__all__ = [
    "INFINITY",
    "ClusterAssignment",
    "Dataset",
    "DecisionTree",
    "KMeansConfig",
    "LabeledDataset",
    "TreeIndexReport",
    "average_runs",
    "build_tree",
    "degenerate_one_vs_rest",
    "evaluate_clustering",
    "kmeans",
    "kmeans_pp_seed",
    "label_with_clustering",
    "leaves",
    "load_csv",
    "min_leaf_size",
    "min_max_normalize",
    "random_k",
    "run_clusterer",
    "tree_index_of_tree",
]
