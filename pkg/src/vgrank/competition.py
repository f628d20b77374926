"""Competition results: per-task tool outcomes, scoring, and ground-truth rankings."""
from __future__ import annotations

import csv
import json
import logging
import os
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

ANSWERS = ("TRUE", "FALSE", "UNKNOWN")
VERDICTS = ("TRUE", "FALSE")
OUTCOME_HEADER = ("task", "tool", "time_s", "answer", "expected")


@dataclass(frozen=True)
class TaskOutcome:
    task: str
    tool: str
    time: float
    answer: str
    expected: str

    def __post_init__(self):
        if self.time < 0:
            raise ValueError(f"{self.task}/{self.tool}: negative time {self.time}")
        if self.answer not in ANSWERS:
            raise ValueError(f"{self.task}/{self.tool}: bad answer {self.answer!r}")
        if self.expected not in VERDICTS:
            raise ValueError(f"{self.task}/{self.tool}: bad expected verdict {self.expected!r}")

    @property
    def correct(self) -> bool:
        return self.answer == self.expected


@dataclass(frozen=True)
class ScoringSchema:
    """Points per outcome class.

    The defaults are placeholders for local experiments, not official
    competition values.
    """

    correct_true: int = 2
    correct_false: int = 1
    incorrect_true: int = -8
    incorrect_false: int = -4
    unknown: int = 0

    def check(self) -> None:
        if min(self.correct_true, self.correct_false) < 0 or max(
            self.incorrect_true, self.incorrect_false
        ) > 0:
            raise ValueError("expected correct points >= 0 >= incorrect points")

    @classmethod
    def from_dict(cls, obj: dict, *, sanity_check: bool = True) -> "ScoringSchema":
        fields = ("correct_true", "correct_false", "incorrect_true", "incorrect_false", "unknown")
        missing = [f for f in fields if f not in obj]
        if missing or set(obj) - set(fields):
            raise ValueError(f"schema must have exactly the fields {fields}")
        for f in fields:
            if isinstance(obj[f], bool) or not isinstance(obj[f], int):
                raise ValueError(f"schema field {f!r} must be an integer")
        schema = cls(**{f: obj[f] for f in fields})
        if sanity_check:
            schema.check()
        return schema

    @classmethod
    def load(cls, path, *, sanity_check: bool = True) -> "ScoringSchema":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), sanity_check=sanity_check)

    def to_dict(self) -> dict:
        return asdict(self)


def score(outcome: TaskOutcome, schema: ScoringSchema) -> int:
    if outcome.answer == "UNKNOWN":
        return schema.unknown
    if outcome.answer == "TRUE":
        return schema.correct_true if outcome.expected == "TRUE" else schema.incorrect_true
    return schema.correct_false if outcome.expected == "FALSE" else schema.incorrect_false


def rank_tools(
    outcomes: Iterable[TaskOutcome], schema: ScoringSchema, tools: Sequence[str]
) -> tuple[np.ndarray, list[str]]:
    """Rank ``tools`` on one aggregation unit (normally a single task).

    Order: total score descending, then total time of correct runs
    ascending, then tool name. Returns the positions (aligned with
    ``tools``) and the tools that had no record for some task in the unit;
    those count as UNKNOWN with zero time.
    """
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("cannot rank tools on an empty unit")
    tasks = sorted({o.task for o in outcomes})
    seen = {(o.task, o.tool) for o in outcomes}
    missing = sorted({t for t in tools for task in tasks if (task, t) not in seen})
    total = {t: 0 for t in tools}
    time = {t: 0.0 for t in tools}
    for o in outcomes:
        if o.tool not in total:
            continue
        total[o.tool] += score(o, schema)
        if o.correct:
            time[o.tool] += o.time
    for t in missing:
        total[t] += schema.unknown * sum((task, t) not in seen for task in tasks)
    order = sorted(tools, key=lambda t: (-total[t], time[t], t))
    position = {t: k + 1 for k, t in enumerate(order)}
    return np.array([position[t] for t in tools], dtype=int), missing


def read_outcomes(path) -> list[TaskOutcome]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != OUTCOME_HEADER:
            raise ValueError(f"outcomes CSV header must be {','.join(OUTCOME_HEADER)}")
        out = []
        seen = set()
        for row in reader:
            rec = TaskOutcome(row["task"], row["tool"], float(row["time_s"]),
                              row["answer"].strip().upper(), row["expected"].strip().upper())
            if (rec.task, rec.tool) in seen:
                raise ValueError(f"duplicate record for task {rec.task!r}, tool {rec.tool!r}")
            seen.add((rec.task, rec.tool))
            out.append(rec)
    return out


def write_outcomes(outcomes: Iterable[TaskOutcome], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(OUTCOME_HEADER)
        for o in outcomes:
            w.writerow([o.task, o.tool, repr(float(o.time)), o.answer, o.expected])


@dataclass
class Dataset:
    """Tasks aligned with their graph files and ground-truth rankings."""

    tasks: list[str]
    graphs: list[str]
    rankings: np.ndarray
    tools: list[str]

    def to_dict(self, base=None) -> dict:
        def rel(g):
            return os.path.relpath(g, base) if base is not None else g

        return {
            "tools": list(self.tools),
            "tasks": [
                {"id": t, "graph": rel(g), "ranking": r.tolist()}
                for t, g, r in zip(self.tasks, self.graphs, self.rankings)
            ],
        }

    def save(self, path) -> None:
        """Write the manifest; graph paths are stored relative to it."""
        base = Path(path).resolve().parent
        graphs = [str(Path(g).resolve()) for g in self.graphs]
        obj = Dataset(self.tasks, graphs, self.rankings, self.tools).to_dict(base)
        Path(path).write_text(json.dumps(obj, indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "Dataset":
        base = Path(path).parent
        obj = json.loads(Path(path).read_text())
        tasks = [t["id"] for t in obj["tasks"]]
        graphs = [str((base / t["graph"]) if not Path(t["graph"]).is_absolute() else t["graph"])
                  for t in obj["tasks"]]
        rankings = np.array([t["ranking"] for t in obj["tasks"]], dtype=int)
        return cls(tasks, graphs, rankings, list(obj["tools"]))


def assemble_dataset(
    graphs_dir,
    outcomes: Sequence[TaskOutcome],
    schema: ScoringSchema,
    filter_tools: bool = True,
) -> Dataset:
    """Align graph files ``<graphs_dir>/<task>.json`` with per-task rankings.

    With ``filter_tools`` only tools with at least one correct outcome in
    the whole data set are kept. Tools are ordered by name.
    """
    graphs_dir = Path(graphs_dir)
    by_task: dict[str, list[TaskOutcome]] = {}
    for o in outcomes:
        by_task.setdefault(o.task, []).append(o)
    graph_files = {p.stem: p for p in sorted(graphs_dir.glob("*.json"))}
    no_graph = sorted(set(by_task) - set(graph_files))
    no_outcomes = sorted(set(graph_files) - set(by_task))
    if no_graph or no_outcomes:
        raise ValueError(
            "graph/outcome mismatch: tasks without graph file "
            f"{no_graph}; graph files without outcomes {no_outcomes}"
        )
    tools = sorted({o.tool for o in outcomes})
    if filter_tools:
        dropped = [t for t in tools if not any(o.correct for o in outcomes if o.tool == t)]
        if dropped:
            log.info("dropping tools without a correct outcome: %s", dropped)
        tools = [t for t in tools if t not in dropped]
    if len(tools) < 2:
        raise ValueError(f"need at least two tools, have {tools}")
    tasks = sorted(by_task)
    rankings = []
    for task in tasks:
        pi, missing = rank_tools(by_task[task], schema, tools)
        if missing:
            warnings.warn(f"task {task}: no record for {missing}; counted as UNKNOWN")
        rankings.append(pi)
    return Dataset(tasks, [str(graph_files[t]) for t in tasks], np.array(rankings), tools)
