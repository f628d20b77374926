"""Synthetic mini-C corpus with family-determined tool rankings.

Two structural families: ``loop`` programs iterate up to an input-dependent
bound, ``straight`` programs are straight-line code. Four made-up tools
perform in opposite orders on the two families, so that with balanced
families the consensus ranking carries almost no information.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .competition import ScoringSchema, TaskOutcome, assemble_dataset, write_outcomes
from .frontend import extract
from .graph import write_graph

FAMILIES = ("loop", "straight")
TOOLS = ("alpha", "beta", "delta", "gamma")
# best to worst per family
FAMILY_ORDER = {
    "loop": ("alpha", "beta", "gamma", "delta"),
    "straight": ("delta", "gamma", "beta", "alpha"),
}
_OPS = ("+", "-", "*")
_CMP = ("<", "<=", ">", ">=", "==", "!=")


def _literal(rng) -> str:
    return str(int(rng.choice([rng.integers(0, 11), rng.integers(11, 101), rng.integers(101, 5000)],
                              p=[0.6, 0.3, 0.1])))


def _expr(rng, names, depth=0) -> str:
    if depth >= 2 or rng.random() < 0.4:
        return rng.choice(names) if rng.random() < 0.7 else _literal(rng)
    return f"{_expr(rng, names, depth + 1)} {rng.choice(_OPS)} {_expr(rng, names, depth + 1)}"


def _assignments(rng, names, count, indent="") -> list[str]:
    return [f"{indent}{rng.choice(names)} = {_expr(rng, names)};" for _ in range(count)]


def generate_program(family: str, rng: np.random.Generator) -> str:
    """Random program of the given family."""
    n_vars = int(rng.integers(2, 5))
    names = [f"v{k}" for k in range(n_vars)]
    lines = ["int bound;", "int i;"] + [f"int {v};" for v in names]
    lines.append("bound = input();")
    lines += [f"{v} = {_literal(rng)};" for v in names]
    lines += _assignments(rng, names, int(rng.integers(0, 3)))
    if family == "loop":
        lines.append("i = 0;")
        lines.append("while (i < bound) {")
        lines += _assignments(rng, names, int(rng.integers(1, 4)), "    ")
        lines.append("    i = i + 1;")
        lines.append("}")
    elif family == "straight":
        lines.append("i = bound;")
        lines += _assignments(rng, names + ["i"], int(rng.integers(2, 6)))
    else:
        raise ValueError(f"unknown family {family!r}")
    lines += _assignments(rng, names, int(rng.integers(0, 3)))
    lines.append(f"assert({rng.choice(names)} {rng.choice(_CMP)} {_expr(rng, names)});")
    return "\n".join(lines) + "\n"


def family_outcomes(task: str, family: str, rng: np.random.Generator) -> list[TaskOutcome]:
    """Outcomes whose ranking under the default schema is ``FAMILY_ORDER[family]``."""
    best, second, third, worst = FAMILY_ORDER[family]
    return [
        TaskOutcome(task, best, round(float(rng.uniform(0.5, 2.0)), 3), "TRUE", "TRUE"),
        TaskOutcome(task, second, round(float(rng.uniform(3.0, 9.0)), 3), "TRUE", "TRUE"),
        TaskOutcome(task, third, round(float(rng.uniform(10.0, 900.0)), 3), "UNKNOWN", "TRUE"),
        TaskOutcome(task, worst, round(float(rng.uniform(0.5, 20.0)), 3), "FALSE", "TRUE"),
    ]


def make_corpus(out_dir, n_programs: int = 200, seed: int = 0) -> Path:
    """Write programs, graphs, outcomes, schema and dataset manifest.

    Families alternate so that they are balanced. Returns the manifest path.
    """
    out = Path(out_dir)
    (out / "programs").mkdir(parents=True, exist_ok=True)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    width = len(str(n_programs - 1))
    outcomes = []
    for k in range(n_programs):
        family = FAMILIES[k % 2]
        task = f"{family}_{k:0{width}d}"
        source = generate_program(family, rng)
        (out / "programs" / f"{task}.c").write_text(source)
        write_graph(extract(source), out / "graphs" / f"{task}.json")
        outcomes += sorted(family_outcomes(task, family, rng), key=lambda o: o.tool)
    write_outcomes(outcomes, out / "outcomes.csv")
    schema = ScoringSchema()
    (out / "schema.json").write_text(json.dumps(schema.to_dict(), indent=1) + "\n")
    dataset = assemble_dataset(out / "graphs", outcomes, schema)
    manifest = out / "manifest.json"
    dataset.save(manifest)
    return manifest
