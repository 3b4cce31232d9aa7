"""Repeated-run benchmark protocol.

A bench runs one clusterer ``repetitions`` times with seeds ``seed + i``,
scores every run with the requested indexes, and appends an average row.
The Tree Index average is ``inf`` as soon as one run is ``inf``; the same
holds for any other index that degenerates to ``inf``.

Runs may execute on a thread pool; rows are always assembled in run order
and every run owns its own generator, so the report does not depend on the
worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

from . import baseline_indexes
from .clusterers import run_clusterer
from .dataset import Dataset
from .tree_index import average_runs, evaluate_clustering

TREE_INDEX = "tree_index"


class BenchError(RuntimeError):
    pass


def known_indexes() -> list[str]:
    return [TREE_INDEX, *baseline_indexes.INDEXES]


def direction(index: str) -> str:
    if index == TREE_INDEX:
        return baseline_indexes.LOWER
    return baseline_indexes.INDEXES[index].direction


@dataclass(frozen=True)
class RunSpec:
    dataset: str
    clusterer: str
    k: Union[int, str, None] = None
    seed: int = 0
    repetitions: int = 20
    indexes: tuple[str, ...] = (TREE_INDEX,)
    normalize: bool = False
    min_leaf_override: Optional[int] = None
    isolate: int = 0
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        unknown = [i for i in self.indexes if i not in known_indexes()]
        if unknown:
            raise ValueError(f"unknown indexes {unknown}; choose from {known_indexes()}")
        if not self.indexes:
            raise ValueError("at least one index is required")


@dataclass
class RunRow:
    run: int
    seed: int
    k: Optional[int]
    clusters: int
    values: dict[str, float]


@dataclass
class BenchReport:
    spec: RunSpec
    rows: list[RunRow]
    averages: dict[str, float] = field(default_factory=dict)

    @property
    def seeds(self) -> list[int]:
        return [r.seed for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        idx = list(self.spec.indexes)
        w.writerow(["run", "seed", "k", "clusters", *idx])
        for r in self.rows:
            k = "" if r.k is None else r.k
            w.writerow([r.run, r.seed, k, r.clusters, *(_num(r.values[i]) for i in idx)])
        w.writerow(["average", "", "", "", *(_num(self.averages[i]) for i in idx)])
        return buf.getvalue()

    def to_json(self) -> str:
        spec = asdict(self.spec)
        spec["indexes"] = list(self.spec.indexes)
        doc = {
            "spec": spec,
            "seeds": self.seeds,
            "directions": {i: direction(i) for i in self.spec.indexes},
            "runs": [
                {
                    "run": r.run,
                    "seed": r.seed,
                    "k": r.k,
                    "clusters": r.clusters,
                    "values": {i: _json_num(v) for i, v in r.values.items()},
                }
                for r in self.rows
            ],
            "average": {i: _json_num(v) for i, v in self.averages.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _num(v: float) -> str:
    # repr round-trips exactly, which keeps the audit exact
    return repr(float(v))


def _json_num(v: float):
    if math.isinf(v) or math.isnan(v):
        return repr(float(v))
    return v


def average(index: str, values: Sequence[float]) -> float:
    if index == TREE_INDEX:
        return average_runs(values)
    if any(math.isnan(v) for v in values):
        return math.nan
    if any(math.isinf(v) for v in values):
        return math.inf
    return math.fsum(values) / len(values)


def score_run(ds: Dataset, assignment, indexes: Sequence[str], min_leaf: Optional[int]) -> dict[str, float]:
    out = {}
    for name in indexes:
        if name == TREE_INDEX:
            out[name] = evaluate_clustering(ds, assignment, min_leaf).score
        else:
            out[name] = baseline_indexes.compute(name, ds, assignment)
    return out


def run_bench(spec: RunSpec, ds: Dataset, workers: int = 1) -> BenchReport:
    """Execute ``spec`` on an already loaded (and normalised) dataset."""

    def one(i: int) -> RunRow:
        seed = spec.seed + i
        try:
            res = run_clusterer(spec.clusterer, ds, spec.k, seed=seed, isolate=spec.isolate)
            values = score_run(ds, res.assignment, spec.indexes, spec.min_leaf_override)
        except Exception as exc:
            raise BenchError(f"run {i} with seed {seed} failed: {exc}") from exc
        return RunRow(i, seed, res.k_requested, res.assignment.declared_k, values)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(spec.repetitions)))
    else:
        rows = [one(i) for i in range(spec.repetitions)]
    averages = {i: average(i, [r.values[i] for r in rows]) for i in spec.indexes}
    return BenchReport(spec, rows, averages)


def _same(a: float, b: float) -> bool:
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    if math.isinf(a) or math.isinf(b):
        return a == b
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def audit_csv(text: str, repetitions: Optional[int] = None) -> list[str]:
    """Check that a CSV report's average row follows from its run rows.

    Returns a list of problems; empty means the report is consistent.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 3:
        return ["report needs a header, at least one run row and an average row"]
    header, body, avg = rows[0], rows[1:-1], rows[-1]
    problems = []
    if avg[0] != "average":
        problems.append("last row is not the average row")
    if repetitions is not None and len(body) != repetitions:
        problems.append(f"{len(body)} run rows, expected {repetitions}")
    seeds = [int(r[1]) for r in body]
    if seeds != list(range(seeds[0], seeds[0] + len(seeds))):
        problems.append(f"seeds are not consecutive: {seeds}")
    for col, name in enumerate(header[4:], start=4):
        values = [float(r[col]) for r in body]
        expected = average(name, values)
        if not _same(expected, float(avg[col])):
            problems.append(f"{name}: average {avg[col]} but runs give {expected!r}")
    return problems


def audit_json(text: str) -> list[str]:
    doc = json.loads(text)
    problems = []
    reps = doc["spec"]["repetitions"]
    if len(doc["seeds"]) != reps or len(doc["runs"]) != reps:
        problems.append(f"expected {reps} seeds and runs")
    for name, avg in doc["average"].items():
        values = [float(r["values"][name]) for r in doc["runs"]]
        if not _same(average(name, values), float(avg)):
            problems.append(f"{name}: average {avg} not recomputable from runs")
    return problems


def audit_report(path: str, repetitions: Optional[int] = None) -> list[str]:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        return audit_json(text)
    return audit_csv(text, repetitions)
