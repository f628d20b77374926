"""AST node classes for the mini-C subset."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass
class IntLiteral:
    value: int
    pos: tuple[int, int]


@dataclass
class Var:
    name: str
    pos: tuple[int, int]


@dataclass
class Unary:
    op: str  # "!" or "-"
    operand: "Expr"
    pos: tuple[int, int]


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: tuple[int, int]


@dataclass
class Call:
    """Call expression.

    ``known`` is true for calls to declared prototypes or the defined
    function; ``input()`` and undeclared externals are not known.
    """

    name: str
    args: list["Expr"]
    known: bool
    pos: tuple[int, int]


Expr = Union[IntLiteral, Var, Unary, Binary, Call]


@dataclass
class Stmt:
    pos: tuple[int, int] = field(default=(0, 0), kw_only=True)
    #: index in source order, assigned once the whole program is parsed
    index: int = field(default=-1, kw_only=True)


@dataclass
class Decl(Stmt):
    name: str
    init: Optional[Expr] = None


@dataclass
class Assign(Stmt):
    target: str
    value: Expr


@dataclass
class IncDec(Stmt):
    target: str
    delta: int  # +1 or -1


@dataclass
class If(Stmt):
    cond: Expr
    then: list[Stmt]
    orelse: list[Stmt]


@dataclass
class While(Stmt):
    cond: Expr
    body: list[Stmt]


@dataclass
class Assert(Stmt):
    cond: Expr


@dataclass
class CallStmt(Stmt):
    call: Call


@dataclass
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass
class Program:
    """A parsed translation unit.

    ``body`` holds top-level statements followed by the body of the single
    defined function, if any. ``statements`` lists every statement in source
    order (nested ones included) so that ``statements[s.index] is s``.
    """

    body: list[Stmt]
    statements: list[Stmt]
    function: Optional[str] = None
    params: list[str] = field(default_factory=list)
    prototypes: list[str] = field(default_factory=list)


def walk_statements(stmts: list[Stmt]):
    """Yield statements in source (pre)order, descending into blocks."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_statements(s.then)
            yield from walk_statements(s.orelse)
        elif isinstance(s, While):
            yield from walk_statements(s.body)


def expr_vars(e: Optional[Expr]) -> list[str]:
    """Variable names read by an expression, in evaluation order."""
    if e is None:
        return []
    if isinstance(e, Var):
        return [e.name]
    if isinstance(e, Unary):
        return expr_vars(e.operand)
    if isinstance(e, Binary):
        return expr_vars(e.left) + expr_vars(e.right)
    if isinstance(e, Call):
        out: list[str] = []
        for a in e.args:
            out.extend(expr_vars(a))
        return out
    return []
