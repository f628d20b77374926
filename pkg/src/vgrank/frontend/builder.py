"""Assemble a verification graph from a parsed program and its analyses."""
from __future__ import annotations

from . import ast
from .analysis import Cfg, ReachingDefs, build_cfg, control_dependencies, reaching_definitions
from .analysis import used_vars
from .parser import parse
from ..graph import Edge, Node, VerificationGraph

BINOP_LABELS = {
    "+": "BinOp_Add",
    "-": "BinOp_Sub",
    "*": "BinOp_Mul",
    "/": "BinOp_Div",
    "%": "BinOp_Mod",
    "<": "BinOp_Less",
    "<=": "BinOp_LessEq",
    ">": "BinOp_Greater",
    ">=": "BinOp_GreaterEq",
    "==": "BinOp_Eq",
    "!=": "BinOp_NotEq",
    "&&": "BoolOp_And",
    "||": "BoolOp_Or",
}
UNOP_LABELS = {"!": "UnOp_Not", "-": "UnOp_Neg"}


def literal_label(value: int) -> str:
    """Bucket an integer literal by absolute value: <=10, <=100, larger."""
    v = abs(value)
    if v <= 10:
        return "Int_Literal_Small"
    if v <= 100:
        return "Int_Literal_Medium"
    return "Int_Literal_Large"


def _expr_tree(e: ast.Expr) -> tuple[str, list]:
    if isinstance(e, ast.IntLiteral):
        return literal_label(e.value), []
    if isinstance(e, ast.Var):
        return "Ref", []
    if isinstance(e, ast.Unary):
        return UNOP_LABELS[e.op], [_expr_tree(e.operand)]
    if isinstance(e, ast.Binary):
        return BINOP_LABELS[e.op], [_expr_tree(e.left), _expr_tree(e.right)]
    if isinstance(e, ast.Call):
        label = "Function_Call" if e.known else "Input"
        return label, [_expr_tree(a) for a in e.args]
    raise TypeError(f"not an expression: {e!r}")


def statement_tree(s: ast.Stmt) -> tuple[str, list]:
    """Abstract syntax tree of one statement as nested ``(label, children)``.

    Nested statements of loops and branches are not part of the tree; they
    are separate roots.
    """
    if isinstance(s, ast.Decl):
        return "Decl", [] if s.init is None else [_expr_tree(s.init)]
    if isinstance(s, ast.Assign):
        return "Assign", [("Ref", []), _expr_tree(s.value)]
    if isinstance(s, ast.IncDec):
        return ("Incr" if s.delta > 0 else "Decr"), [("Ref", [])]
    if isinstance(s, ast.If):
        return "If", [_expr_tree(s.cond)]
    if isinstance(s, ast.While):
        return "Loop", [_expr_tree(s.cond)]
    if isinstance(s, ast.Assert):
        return "Assert", [_expr_tree(s.cond)]
    if isinstance(s, ast.CallStmt):
        return _expr_tree(s.call)
    if isinstance(s, ast.Return):
        return "Function_Return", [] if s.value is None else [_expr_tree(s.value)]
    raise TypeError(f"not a statement: {s!r}")


def build_verification_graph(
    program: ast.Program,
    cfg: Cfg,
    rd: ReachingDefs,
    cd: set[tuple[int, int, bool]],
) -> VerificationGraph:
    """Node ids: statements in source order, each followed by its AST in preorder.

    Edge ids: SD edges first (in node order), then CF, CD and DD edges, each
    group sorted by (source statement, target statement).
    """
    nodes: list[Node] = []
    sd: list[tuple[int, int]] = []
    root_of: list[int] = []

    def emit(tree: tuple[str, list], depth: int) -> int:
        nid = len(nodes)
        nodes.append(Node(nid, tree[0], depth))
        for child in tree[1]:
            cid = emit(child, depth + 1)
            sd.append((nid, cid))
        return nid

    for s in program.statements:
        root_of.append(emit(statement_tree(s), 0))

    edges: list[Edge] = []

    def add(src: int, dst: int, kind: str, cond: bool = True) -> None:
        edges.append(Edge(len(edges), src, dst, kind, cond))

    for p, c in sorted(sd):
        add(p, c, "SD")
    n = len(program.statements)
    cf = sorted({(s, t) for s in range(n) for t, _ in cfg.succ.get(s, []) if t < n})
    for s, t in cf:
        add(root_of[s], root_of[t], "CF")
    for ctrl, dep, val in sorted(cd):
        add(root_of[ctrl], root_of[dep], "CD", val)
    dd = set()
    for s in program.statements:
        for var in set(used_vars(s)):
            for d in rd.get((s.index, var), ()):
                dd.add((d, s.index))
    for d, u in sorted(dd):
        add(root_of[d], root_of[u], "DD")
    return VerificationGraph(tuple(nodes), tuple(edges))


def extract(source: str) -> VerificationGraph:
    """Source text to verification graph in one call."""
    program = parse(source)
    cfg = build_cfg(program)
    return build_verification_graph(
        program, cfg, reaching_definitions(program, cfg), control_dependencies(program)
    )
