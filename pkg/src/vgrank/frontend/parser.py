"""Lexer and recursive-descent parser for the mini-C subset.

See ``docs/grammar.md`` for the accepted language.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import ast


class ParseError(SyntaxError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class UnsupportedConstructError(ParseError):
    """The input uses C outside the supported subset."""


class UndeclaredVariableError(ParseError):
    pass


@dataclass
class Token:
    kind: str  # "int", "ident", "op", "eof"
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<pp>\#[^\n]*)
  | (?P<int>0[xX][0-9a-fA-F]+|\d+)[uUlL]*
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<op>\+\+|--|\+=|-=|\*=|/=|%=|==|!=|<=|>=|&&|\|\||->|<<|>>|[-+*/%<>=!(){};,&|^~?:\[\].])
    """,
    re.VERBOSE | re.DOTALL,
)

KEYWORDS = {"int", "void", "if", "else", "while", "return", "assert"}

# C keywords outside the subset, rejected with a dedicated message
UNSUPPORTED_KEYWORDS = {
    "struct": "structs",
    "union": "unions",
    "enum": "enums",
    "goto": "goto",
    "switch": "switch statements",
    "case": "switch statements",
    "default": "switch statements",
    "for": "for loops",
    "do": "do-while loops",
    "break": "break",
    "continue": "continue",
    "typedef": "typedef",
    "char": "non-int types",
    "short": "non-int types",
    "long": "non-int types",
    "unsigned": "non-int types",
    "signed": "non-int types",
    "float": "non-int types",
    "double": "non-int types",
    "_Bool": "non-int types",
    "static": "storage classes",
    "extern": "storage classes",
    "const": "type qualifiers",
    "volatile": "type qualifiers",
    "sizeof": "sizeof",
}

UNSUPPORTED_OPS = {
    "[": "arrays",
    "]": "arrays",
    "->": "pointers",
    ".": "structs",
    "&": "pointers / bitwise operators",
    "|": "bitwise operators",
    "^": "bitwise operators",
    "~": "bitwise operators",
    "<<": "shift operators",
    ">>": "shift operators",
    "?": "conditional expressions",
    ":": "labels / conditional expressions",
}

INPUT_INTRINSIC = "input"


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group(0)
        if kind == "pp":
            raise UnsupportedConstructError("preprocessor directives are not supported", line, col)
        if kind == "int":
            tokens.append(Token("int", m.group("int"), line, col))
        elif kind in ("ident", "op"):
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0
        self.scopes: list[set[str]] = [set()]
        self.all_vars: set[str] = set()
        self.prototypes: set[str] = set()
        self.function: str | None = None
        self.params: list[str] = []

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def error(self, message: str, tok: Token | None = None):
        t = tok or self.tok
        self._reject_unsupported(t)
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{message}, found {found}", t.line, t.col)

    def _reject_unsupported(self, t: Token) -> None:
        if t.kind == "ident" and t.text in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstructError(
                f"unsupported construct: {UNSUPPORTED_KEYWORDS[t.text]} ({t.text!r})",
                t.line,
                t.col,
            )
        if t.kind == "op" and t.text in UNSUPPORTED_OPS:
            raise UnsupportedConstructError(
                f"unsupported construct: {UNSUPPORTED_OPS[t.text]} ({t.text!r})", t.line, t.col
            )

    def ident(self) -> Token:
        t = self.tok
        self._reject_unsupported(t)
        if t.kind != "ident" or t.text in KEYWORDS:
            self.error("expected identifier")
        return self.advance()

    # -- scopes ----------------------------------------------------------
    def declare(self, tok: Token) -> None:
        name = tok.text
        if name in self.all_vars or name in self.prototypes or name == self.function:
            raise ParseError(
                f"redeclaration of {name!r} (shadowing is not supported)", tok.line, tok.col
            )
        self.scopes[-1].add(name)
        self.all_vars.add(name)

    def use(self, tok: Token) -> None:
        if not any(tok.text in s for s in self.scopes):
            raise UndeclaredVariableError(f"variable {tok.text!r} used before declaration",
                                          tok.line, tok.col)

    # -- translation unit --------------------------------------------------
    def parse_program(self) -> ast.Program:
        top: list[ast.Stmt] = []
        func_body: list[ast.Stmt] | None = None
        while self.tok.kind != "eof":
            if self.at("void") or (self.at("int") and self._is_function_header()):
                body = self.function_or_prototype()
                if body is not None:
                    if func_body is not None:
                        raise UnsupportedConstructError(
                            "unsupported construct: more than one function definition",
                            self.tok.line, self.tok.col)
                    func_body = body
            else:
                if func_body is not None:
                    self.error("statements after the function definition are not supported")
                top.extend(self.statement())
        body = top + (func_body or [])
        statements = list(ast.walk_statements(body))
        for k, s in enumerate(statements):
            s.index = k
        return ast.Program(body, statements, self.function, self.params, sorted(self.prototypes))

    def _is_function_header(self) -> bool:
        return self.peek().kind == "ident" and self.peek(2).text == "("

    def function_or_prototype(self) -> list[ast.Stmt] | None:
        self.advance()  # return type
        if self.at("*"):
            raise UnsupportedConstructError("unsupported construct: pointers ('*')",
                                            self.tok.line, self.tok.col)
        name_tok = self.ident()
        self.expect("(")
        params: list[Token] = []
        if self.at("void") and self.peek().text == ")":
            self.advance()
        elif not self.at(")"):
            while True:
                if not self.at("int"):
                    self.error("expected 'int' parameter type")
                self.advance()
                if self.at("*"):
                    raise UnsupportedConstructError("unsupported construct: pointers ('*')",
                                                    self.tok.line, self.tok.col)
                params.append(self.ident())
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        if self.at(";"):
            self.advance()
            self.prototypes.add(name_tok.text)
            return None
        if name_tok.text in self.all_vars:
            raise ParseError(f"{name_tok.text!r} already declared", name_tok.line, name_tok.col)
        self.function = name_tok.text
        self.scopes.append(set())
        for p in params:
            self.declare(p)
            self.params.append(p.text)
        body = self.block()
        self.scopes.pop()
        return body

    # -- statements --------------------------------------------------------
    def block(self) -> list[ast.Stmt]:
        self.expect("{")
        self.scopes.append(set())
        out: list[ast.Stmt] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            out.extend(self.statement())
        self.advance()
        self.scopes.pop()
        return out

    def body(self) -> list[ast.Stmt]:
        """Branch or loop body: a block or a single statement."""
        if self.at("{"):
            return self.block()
        self.scopes.append(set())
        out = self.statement()
        self.scopes.pop()
        return out

    def statement(self) -> list[ast.Stmt]:
        t = self.tok
        pos = (t.line, t.col)
        self._reject_unsupported(t)
        if t.kind == "op" and t.text == ";":
            self.advance()
            return []
        if t.kind == "op" and t.text == "{":
            return self.block()
        if t.kind == "op" and t.text in ("++", "--"):
            self.advance()
            name = self.ident()
            self.use(name)
            self.expect(";")
            return [ast.IncDec(name.text, 1 if t.text == "++" else -1, pos=pos)]
        if t.kind == "op" and t.text == "*":
            raise UnsupportedConstructError("unsupported construct: pointers ('*')", t.line, t.col)
        if t.kind != "ident":
            self.error("expected statement")
        if t.text == "int":
            return self.declaration()
        if t.text == "void":
            self.error("unexpected 'void'")
        if t.text == "if":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.body()
            orelse: list[ast.Stmt] = []
            if self.at("else"):
                self.advance()
                orelse = self.body()
            return [ast.If(cond, then, orelse, pos=pos)]
        if t.text == "while":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            return [ast.While(cond, self.body(), pos=pos)]
        if t.text == "assert":
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            self.expect(";")
            return [ast.Assert(cond, pos=pos)]
        if t.text == "return":
            self.advance()
            value = None if self.at(";") else self.expression()
            self.expect(";")
            return [ast.Return(value, pos=pos)]
        # identifier-led: call, assignment or increment
        name = self.ident()
        if self.at("("):
            call = self.call_rest(name)
            self.expect(";")
            return [ast.CallStmt(call, pos=pos)]
        self.use(name)
        op = self.tok
        if op.kind == "op" and op.text in ("++", "--"):
            self.advance()
            self.expect(";")
            return [ast.IncDec(name.text, 1 if op.text == "++" else -1, pos=pos)]
        if op.kind == "op" and op.text in ("=", "+=", "-=", "*=", "/=", "%="):
            self.advance()
            value = self.expression()
            self.expect(";")
            if op.text != "=":
                value = ast.Binary(op.text[0], ast.Var(name.text, (name.line, name.col)), value,
                                   (op.line, op.col))
            return [ast.Assign(name.text, value, pos=pos)]
        self.error("expected assignment, increment or call")

    def declaration(self) -> list[ast.Stmt]:
        self.advance()  # int
        out: list[ast.Stmt] = []
        while True:
            t = self.tok
            if self.at("*"):
                raise UnsupportedConstructError("unsupported construct: pointers ('*')",
                                                t.line, t.col)
            name = self.ident()
            if self.at("["):
                self._reject_unsupported(self.tok)
            init = None
            if self.at("="):
                self.advance()
                init = self.expression()
            # declared after the initializer is parsed: `int x = x;` is an error
            self.declare(name)
            out.append(ast.Decl(name.text, init, pos=(t.line, t.col)))
            if not self.at(","):
                break
            self.advance()
        self.expect(";")
        return out

    # -- expressions ---------------------------------------------------------
    def expression(self, level: int = 0) -> ast.Expr:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.expression(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_LEVELS[level]:
            op = self.advance()
            right = self.expression(level + 1)
            left = ast.Binary(op.text, left, right, (op.line, op.col))
        return left

    def unary(self) -> ast.Expr:
        t = self.tok
        if t.kind == "op" and t.text in ("!", "-", "+"):
            self.advance()
            operand = self.unary()
            if t.text == "+":
                return operand
            if t.text == "-" and isinstance(operand, ast.IntLiteral):
                return ast.IntLiteral(-operand.value, (t.line, t.col))
            return ast.Unary(t.text, operand, (t.line, t.col))
        if t.kind == "op" and t.text in ("*", "&"):
            raise UnsupportedConstructError("unsupported construct: pointers", t.line, t.col)
        return self.primary()

    def primary(self) -> ast.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return ast.IntLiteral(_int_value(t.text), (t.line, t.col))
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expression()
            self.expect(")")
            return e
        name = self.ident()
        if self.at("("):
            return self.call_rest(name)
        self.use(name)
        return ast.Var(name.text, (name.line, name.col))

    def call_rest(self, name: Token) -> ast.Call:
        self.expect("(")
        args: list[ast.Expr] = []
        if not self.at(")"):
            while True:
                args.append(self.expression())
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        known = name.text != INPUT_INTRINSIC and (
            name.text in self.prototypes or name.text == self.function
        )
        if any(name.text in s for s in self.scopes):
            raise ParseError(f"{name.text!r} is a variable, not a function", name.line, name.col)
        return ast.Call(name.text, args, known, (name.line, name.col))


def _int_value(text: str) -> int:
    if text[:2].lower() == "0x":
        return int(text, 16)
    if len(text) > 1 and text[0] == "0":
        return int(text, 8)
    return int(text)


def parse(source: str) -> ast.Program:
    """Parse mini-C source into a :class:`~vgrank.frontend.ast.Program`."""
    return Parser(source).parse_program()
