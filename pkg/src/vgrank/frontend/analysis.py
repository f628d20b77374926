"""Statement-level control flow graph and the dependence analyses over it."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from . import ast


@dataclass
class Cfg:
    """Control flow graph over statement indices.

    Statements are nodes ``0..n-1``; ``entry == n`` and ``exit == n + 1``.
    Each successor is ``(target, branch)`` where ``branch`` is ``"T"``/``"F"``
    on the two out-edges of a branch statement and ``None`` otherwise.
    """

    n_statements: int
    succ: dict[int, list[tuple[int, Optional[str]]]] = field(default_factory=dict)

    @property
    def entry(self) -> int:
        return self.n_statements

    @property
    def exit(self) -> int:
        return self.n_statements + 1

    def nodes(self) -> range:
        return range(self.n_statements + 2)

    def successors(self, node: int) -> list[int]:
        return [t for t, _ in self.succ.get(node, [])]

    def predecessors(self) -> dict[int, list[int]]:
        preds: dict[int, list[int]] = {v: [] for v in self.nodes()}
        for src, outs in self.succ.items():
            for dst, _ in outs:
                preds[dst].append(src)
        return preds


def build_cfg(program: ast.Program) -> Cfg:
    cfg = Cfg(len(program.statements))

    def link(stmts: list[ast.Stmt], follow: int) -> int:
        # Builds back to front; returns the block's first node.
        nxt = follow
        for s in reversed(stmts):
            k = s.index
            if isinstance(s, ast.If):
                then_entry = link(s.then, nxt)
                else_entry = link(s.orelse, nxt)
                cfg.succ[k] = [(then_entry, "T"), (else_entry, "F")]
            elif isinstance(s, ast.While):
                body_entry = link(s.body, k)
                cfg.succ[k] = [(body_entry, "T"), (nxt, "F")]
            elif isinstance(s, ast.Return):
                cfg.succ[k] = [(cfg.exit, None)]
            else:
                cfg.succ[k] = [(nxt, None)]
            nxt = k
        return nxt

    cfg.succ[cfg.entry] = [(link(program.body, cfg.exit), None)]
    cfg.succ[cfg.exit] = []
    return cfg


def defined_var(s: ast.Stmt) -> Optional[str]:
    """Variable a statement (re)defines, if any."""
    if isinstance(s, ast.Assign) or isinstance(s, ast.IncDec):
        return s.target
    if isinstance(s, ast.Decl) and s.init is not None:
        return s.name
    return None


def used_vars(s: ast.Stmt) -> list[str]:
    """Variables read by a statement's own expressions (not nested statements)."""
    if isinstance(s, ast.Decl):
        return ast.expr_vars(s.init)
    if isinstance(s, ast.Assign):
        return ast.expr_vars(s.value)
    if isinstance(s, ast.IncDec):
        return [s.target]
    if isinstance(s, (ast.If, ast.While, ast.Assert)):
        return ast.expr_vars(s.cond)
    if isinstance(s, ast.CallStmt):
        return ast.expr_vars(s.call)
    if isinstance(s, ast.Return):
        return ast.expr_vars(s.value)
    return []


ReachingDefs = dict[tuple[int, str], frozenset[int]]


def reaching_definitions(program: ast.Program, cfg: Cfg) -> ReachingDefs:
    """Definitions reaching the entry of each statement, keyed by (statement, var).

    Forward may-analysis solved with a worklist; only non-empty sets are kept.
    """
    stmts = program.statements
    defs_of: dict[str, set[int]] = {}
    for s in stmts:
        v = defined_var(s)
        if v is not None:
            defs_of.setdefault(v, set()).add(s.index)

    def transfer(node: int, facts: frozenset) -> frozenset:
        if node >= len(stmts):
            return facts
        v = defined_var(stmts[node])
        if v is None:
            return facts
        return frozenset(f for f in facts if f[0] != v) | {(v, node)}

    preds = cfg.predecessors()
    in_: dict[int, frozenset] = {v: frozenset() for v in cfg.nodes()}
    out: dict[int, frozenset] = {v: frozenset() for v in cfg.nodes()}
    work = deque(cfg.nodes())
    queued = set(work)
    while work:
        node = work.popleft()
        queued.discard(node)
        facts = frozenset().union(*(out[p] for p in preds[node]))
        in_[node] = facts
        new_out = transfer(node, facts)
        if new_out != out[node]:
            out[node] = new_out
            for succ in cfg.successors(node):
                if succ not in queued:
                    work.append(succ)
                    queued.add(succ)

    result: ReachingDefs = {}
    for k in range(len(stmts)):
        by_var: dict[str, set[int]] = {}
        for var, d in in_[k]:
            by_var.setdefault(var, set()).add(d)
        for var, ds in by_var.items():
            result[(k, var)] = frozenset(ds)
    return result


def control_dependencies(program: ast.Program) -> set[tuple[int, int, bool]]:
    """``(controller, dependent, valuation)`` triples.

    Syntax-directed: every statement directly inside a loop body or an if
    branch depends on that loop/if condition with the branch's valuation.
    On this structured subset this matches the post-dominator construction
    (``return`` inside a branch aside).
    """
    deps: set[tuple[int, int, bool]] = set()
    for s in program.statements:
        if isinstance(s, ast.While):
            deps.update((s.index, c.index, True) for c in s.body)
        elif isinstance(s, ast.If):
            deps.update((s.index, c.index, True) for c in s.then)
            deps.update((s.index, c.index, False) for c in s.orelse)
    return deps
