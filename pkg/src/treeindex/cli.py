"""Command-line front end.

Subcommands: ``extract``, ``cluster``, ``evaluate``, ``bench``, ``plot-export``.
Exit codes: 0 success, 1 runtime failure, 2 usage or contract violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from typing import Optional, Sequence

from . import baseline_indexes
from .baseline_indexes import MissingClassesError
from .bench import (
    TREE_INDEX,
    BenchError,
    RunSpec,
    audit_report,
    direction,
    known_indexes,
    run_bench,
)
from .clusterers import CLUSTERERS, ClusteringError, run_clusterer
from .dataset import (
    Dataset,
    DatasetError,
    load_assignment,
    load_csv,
    min_max_normalize,
    write_assignment,
    write_csv,
)
from .decision_tree import dump_tree
from .eeg_features import EEGError, dataset_from_manifest
from .tree_index import evaluate_clustering, format_score, score_to_json

log = logging.getLogger("treeindex")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _read_dataset(args) -> Dataset:
    class_col = args.class_column
    header: list[str] = []
    if not args.no_header:
        with open(args.dataset, newline="") as fh:
            header = [h.strip() for h in next(csv.reader(fh), [])]
    if class_col is None:
        if "class" in header:
            class_col = "class"
    elif class_col.isdigit():
        class_col = int(class_col)
    elif class_col not in header:
        raise UsageError(f"class column {class_col!r} not found in {args.dataset} (columns: {header})")
    ds = load_csv(args.dataset, has_header=not args.no_header, class_column=class_col)
    return min_max_normalize(ds) if args.normalize else ds


def _parse_indexes(text: Optional[str], ds: Dataset) -> list[str]:
    if text is None:
        names = [TREE_INDEX, "silhouette", "db", "xb", "sse"]
        if ds.true_classes is not None:
            names[1:1] = ["f_measure", "purity", "entropy_ext"]
        return names
    names = [t.strip() for t in text.split(",") if t.strip()]
    unknown = [n for n in names if n not in known_indexes()]
    if unknown:
        raise UsageError(f"unknown index {unknown}; choose from {known_indexes()}")
    external = [n for n in names if n in baseline_indexes.INDEXES and baseline_indexes.INDEXES[n].external]
    if external and ds.true_classes is None:
        raise UsageError(
            f"{', '.join(external)} need a true-class column, but {ds.name!r} has none "
            "(pass --class-column NAME, or add a 'class' column)"
        )
    return names


def _parse_k(text: Optional[str]):
    if text is None or text == "random":
        return text
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--k must be an integer or 'random', got {text!r}") from None


def cmd_extract(args) -> int:
    ds = dataset_from_manifest(args.manifest, bins=args.bins)
    write_csv(ds, args.out)
    seizures = sum(1 for c in ds.true_classes if c == "seizure")
    print(f"records={ds.n} attributes={ds.d} seizure={seizures} non_seizure={ds.n - seizures}")
    return EXIT_OK


def cmd_cluster(args) -> int:
    ds = _read_dataset(args)
    k = _parse_k(args.k)
    try:
        res = run_clusterer(args.clusterer, ds, k, seed=args.seed, isolate=args.isolate)
    except ClusteringError as exc:
        raise UsageError(str(exc)) from None
    write_assignment(res.assignment, args.out)
    sse = baseline_indexes.sse(ds, res.assignment)
    line = f"declared_k={res.assignment.declared_k} sse={format_score(sse)}"
    if res.trace is not None:
        line += f" k={res.k_requested} iterations={res.trace.iterations_run} converged={res.trace.converged}"
        if args.trace:
            with open(args.trace, "w") as fh:
                fh.write(res.trace.to_csv())
    print(line)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ds = _read_dataset(args)
    names = _parse_indexes(args.indexes, ds)
    ca = load_assignment(args.assignment, ds.n)
    results = []
    for name in names:
        if name == TREE_INDEX:
            report = evaluate_clustering(ds, ca, args.min_leaf_override)
            print(f"{report.summary()} direction=lower")
            if args.leaves:
                sys.stdout.write(report.leaf_table())
            if args.dump_tree:
                sys.stdout.write(dump_tree(report.tree))
            results.append((name, report.score, report.to_dict()))
        else:
            try:
                value = baseline_indexes.compute(name, ds, ca)
            except MissingClassesError as exc:
                raise UsageError(str(exc)) from None
            print(f"{name}={format_score(value)} direction={direction(name)}")
            results.append((name, value, None))
    if args.out:
        _write_eval(args.out, results)
    return EXIT_OK


def _write_eval(path: str, results) -> None:
    if path.endswith(".json"):
        doc = {}
        for name, value, extra in results:
            entry = {"value": score_to_json(value), "direction": direction(name)}
            if extra:
                entry.update({k: v for k, v in extra.items() if k != TREE_INDEX})
            doc[name] = entry
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "value", "direction"])
        for name, value, _ in results:
            w.writerow([name, format_score(value), direction(name)])


def cmd_bench(args) -> int:
    ds = _read_dataset(args)
    names = _parse_indexes(args.indexes, ds)
    try:
        spec = RunSpec(
            dataset=args.dataset,
            clusterer=args.clusterer,
            k=_parse_k(args.k),
            seed=args.seed,
            repetitions=args.reps,
            indexes=tuple(names),
            normalize=args.normalize,
            min_leaf_override=args.min_leaf_override,
            isolate=args.isolate,
            output=args.out,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_bench(spec, ds, workers=args.workers)
    text = report.to_json() if args.out.endswith(".json") else report.to_csv()
    with open(args.out, "w", newline="") as fh:
        fh.write(text)
    for name in spec.indexes:
        print(f"average {name}={format_score(report.averages[name])} direction={direction(name)}")
    if args.audit:
        problems = audit_report(args.out, spec.repetitions)
        for p in problems:
            print(f"audit: {p}", file=sys.stderr)
        if problems:
            return EXIT_RUNTIME
        print("audit: ok")
    return EXIT_OK


def cmd_plot_export(args) -> int:
    attrs = [a.strip() for a in args.attrs.split(",") if a.strip()]
    if len(attrs) != 3:
        raise UsageError(f"--attrs needs exactly 3 attribute names, got {len(attrs)}")
    ds = _read_dataset(args)
    missing = [a for a in attrs if a not in ds.attributes]
    if missing:
        raise UsageError(f"unknown attributes {missing}; dataset has {list(ds.attributes)}")
    ca = load_assignment(args.assignment, ds.n)
    cols = [ds.column(a) for a in attrs]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = [*attrs, "cluster_id"]
        if ds.true_classes is not None:
            header.append("class")
        w.writerow(header)
        for i in range(ds.n):
            row = [repr(float(c[i])) for c in cols] + [int(ca.labels[i])]
            if ds.true_classes is not None:
                row.append(ds.true_classes[i])
            w.writerow(row)
    print(f"rows={ds.n} attrs={','.join(attrs)}")
    return EXIT_OK


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, help="numeric CSV, header row expected")
    p.add_argument("--class-column", help="true-class column name or 0-based index (default: 'class' if present)")
    p.add_argument("--no-header", action="store_true", help="the CSV has no header row")
    p.add_argument("--normalize", action="store_true", help="min-max scale every attribute to [0, 1] first")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treeindex", description="Tree Index cluster evaluation toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="EEG manifest -> 9-feature epoch dataset CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bins", type=int, help="entropy histogram bins (default ceil(sqrt(epoch samples)))")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("cluster", help="run a clusterer and write an assignment CSV")
    _add_dataset_args(p)
    p.add_argument("--clusterer", choices=CLUSTERERS, default="kmeans")
    p.add_argument("--k", help="cluster count or 'random' for a draw from [2, sqrt(n)]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--isolate", type=int, default=0, help="record isolated by the degenerate clusterer")
    p.add_argument("--trace", help="write the per-iteration k-means trace CSV here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("evaluate", help="score an assignment with Tree Index and baselines")
    _add_dataset_args(p)
    p.add_argument("--assignment", required=True)
    p.add_argument("--indexes", help=f"comma list from {known_indexes()}")
    p.add_argument("--min-leaf-override", type=int)
    p.add_argument("--leaves", action="store_true", help="print the per-leaf table")
    p.add_argument("--dump-tree", action="store_true", help="print the induced tree")
    p.add_argument("--out", help="write results (.json for structured output, else CSV)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="repeat a clusterer and average its scores")
    _add_dataset_args(p)
    p.add_argument("--clusterer", choices=CLUSTERERS, default="kmeans")
    p.add_argument("--k", default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--isolate", type=int, default=0)
    p.add_argument("--indexes")
    p.add_argument("--min-leaf-override", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--audit", action="store_true", help="re-read the report and verify its average row")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot-export", help="write a 3-attribute projection for external plotting")
    _add_dataset_args(p)
    p.add_argument("--assignment", required=True)
    p.add_argument("--attrs", required=True, help="exactly three attribute names, comma separated")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot_export)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"treeindex {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, EEGError, BenchError, ClusteringError, OSError, ValueError) as exc:
        print(f"treeindex {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
