"""MiniLang: a tiny structured imperative language over integers.

A program declares its inputs and outputs and then lists statements::

    input a, b;
    output c;
    a := a + 2;
    if (a > b) { c := a; } else { c := b; }
    while (a < 10) { a := a + 1; }

Every statement gets an integer id in textual (pre-)order, starting at 1.
Those ids are the components that the diagnosis engine reasons about.
Booleans are integers: 0 is false, anything else is true.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Union

from .errors import DivisionByZero, IntegerOverflow, LoopLimitExceeded, ParseError, SemanticError

__all__ = [
    "Const", "Var", "Unary", "Binary", "Expr",
    "Assign", "If", "While", "Stmt", "Program", "Limits",
    "parse", "parse_file", "pretty", "run", "check",
    "expr_vars", "apply_binary", "apply_unary", "roman",
    "ARITHMETIC_OPS", "RELATIONAL_OPS", "LOGICAL_OPS", "BINARY_OPS",
]

ARITHMETIC_OPS = ("+", "-", "*", "/")
RELATIONAL_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGICAL_OPS = ("and", "or")
BINARY_OPS = ARITHMETIC_OPS + RELATIONAL_OPS + LOGICAL_OPS

# binding strength, higher binds tighter; all binary operators are left-associative
PRECEDENCE = {
    "or": 1,
    "and": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6,
}
UNARY_PRECEDENCE = 7

KEYWORDS = frozenset({"input", "output", "if", "else", "while", "and", "or", "not"})


# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Unary, Binary]


# `line` is the source line of the statement; it is display-only and not part
# of structural equality, so a re-parsed pretty print compares equal.
@dataclass(frozen=True)
class Assign:
    id: int
    target: str
    rhs: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    id: int
    cond: Expr
    then_body: tuple["Stmt", ...]
    else_body: tuple["Stmt", ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    id: int
    cond: Expr
    body: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)


Stmt = Union[Assign, If, While]


def _walk(body: tuple[Stmt, ...]) -> Iterator[Stmt]:
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            yield from _walk(stmt.then_body)
            yield from _walk(stmt.else_body)
        elif isinstance(stmt, While):
            yield from _walk(stmt.body)


def assigned_in(body: tuple[Stmt, ...]) -> frozenset[str]:
    """Variables assigned anywhere inside ``body``, nested blocks included."""
    return frozenset(s.target for s in _walk(body) if isinstance(s, Assign))


@dataclass(frozen=True)
class Program:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    body: tuple[Stmt, ...]

    def statements(self) -> Iterator[Stmt]:
        """All statements in id order."""
        return _walk(self.body)

    def statement(self, sid: int) -> Stmt:
        for stmt in self.statements():
            if stmt.id == sid:
                return stmt
        raise KeyError(sid)

    def assignments(self) -> list[Assign]:
        return [s for s in self.statements() if isinstance(s, Assign)]

    def assignment_ids(self) -> frozenset[int]:
        return frozenset(s.id for s in self.assignments())

    def assigned_variables(self) -> frozenset[str]:
        return assigned_in(self.body)

    def variables(self) -> frozenset[str]:
        names = set(self.inputs) | set(self.outputs)
        for stmt in self.statements():
            if isinstance(stmt, Assign):
                names.add(stmt.target)
                names |= expr_vars(stmt.rhs)
            else:
                names |= expr_vars(stmt.cond)
        return frozenset(names)

    def definers(self, var: str) -> frozenset[int]:
        return frozenset(s.id for s in self.assignments() if s.target == var)

    def __len__(self) -> int:
        return sum(1 for _ in self.statements())


def expr_vars(expr: Expr) -> frozenset[str]:
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    if isinstance(expr, Const):
        return frozenset()
    if isinstance(expr, Unary):
        return expr_vars(expr.operand)
    return expr_vars(expr.left) | expr_vars(expr.right)


def renumber(body: tuple[Stmt, ...], start: int = 1) -> tuple[tuple[Stmt, ...], int]:
    """Reassign ids in textual order; returns the new body and the next free id."""
    out = []
    next_id = start
    for stmt in body:
        sid = next_id
        next_id += 1
        if isinstance(stmt, Assign):
            out.append(replace(stmt, id=sid))
        elif isinstance(stmt, If):
            then_body, next_id = renumber(stmt.then_body, next_id)
            else_body, next_id = renumber(stmt.else_body, next_id)
            out.append(replace(stmt, id=sid, then_body=then_body, else_body=else_body))
        else:
            inner, next_id = renumber(stmt.body, next_id)
            out.append(replace(stmt, id=sid, body=inner))
    return tuple(out), next_id


def replace_statement(program: Program, new: Stmt) -> Program:
    """Return ``program`` with the statement carrying ``new.id`` swapped for ``new``."""

    def sub(body: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
        out = []
        for stmt in body:
            if stmt.id == new.id:
                out.append(new)
            elif isinstance(stmt, If):
                out.append(replace(stmt, then_body=sub(stmt.then_body), else_body=sub(stmt.else_body)))
            elif isinstance(stmt, While):
                out.append(replace(stmt, body=sub(stmt.body)))
            else:
                out.append(stmt)
        return tuple(out)

    return replace(program, body=sub(program.body))


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)
  | (?P<op>:=|==|!=|<=|>=|[-+*/<>(){};,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'int', 'ident', 'kw', 'op', 'eof'
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            word = m.group()
            tokens.append(Token("kw" if word in KEYWORDS else "ident", word, line, col))
        elif kind in ("int", "op"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.next_id = 1

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, expected: tuple[str, ...]):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"unexpected {found}", tok.line, tok.column, expected)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error((repr(text),))
        tok = self.tok
        self.pos += 1
        return tok

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error(("identifier",))
        name = self.tok.text
        self.pos += 1
        return name

    def program(self) -> Program:
        inputs: tuple[str, ...] = ()
        outputs: tuple[str, ...] = ()
        if self.at("input"):
            inputs = self.decl("input")
        if self.at("output"):
            outputs = self.decl("output")
        body = self.statements(until="eof")
        return Program(inputs, outputs, body)

    def decl(self, keyword: str) -> tuple[str, ...]:
        kw = self.expect(keyword)
        names: list[str] = []
        if not self.at(";"):
            names.append(self.ident())
            while self.at(","):
                self.pos += 1
                names.append(self.ident())
        self.expect(";")
        seen = set()
        for name in names:
            if name in seen:
                raise SemanticError(f"line {kw.line}: duplicate {keyword} declaration of {name!r}")
            seen.add(name)
        return tuple(names)

    def statements(self, until: str) -> tuple[Stmt, ...]:
        body = []
        while not (self.tok.kind == "eof" if until == "eof" else self.at(until)):
            if self.tok.kind == "eof":
                self.error((repr(until),))
            body.append(self.statement())
        return tuple(body)

    def block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        body = self.statements(until="}")
        self.expect("}")
        return body

    def statement(self) -> Stmt:
        tok = self.tok
        sid = self.next_id
        if self.at("if"):
            self.next_id += 1
            self.pos += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then_body = self.block()
            else_body: tuple[Stmt, ...] = ()
            if self.at("else"):
                self.pos += 1
                else_body = self.block()
            return If(sid, cond, then_body, else_body, line=tok.line)
        if self.at("while"):
            self.next_id += 1
            self.pos += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(sid, cond, self.block(), line=tok.line)
        if tok.kind != "ident":
            self.error(("identifier", "'if'", "'while'"))
        self.next_id += 1
        target = self.ident()
        self.expect(":=")
        rhs = self.expr()
        self.expect(";")
        return Assign(sid, target, rhs, line=tok.line)

    def expr(self, min_prec: int = 1) -> Expr:
        left = self.unary()
        while True:
            tok = self.tok
            op = tok.text if tok.kind in ("op", "kw") else None
            prec = PRECEDENCE.get(op, 0)
            if prec < min_prec:
                return left
            self.pos += 1
            right = self.expr(prec + 1)
            left = Binary(op, left, right)

    def unary(self) -> Expr:
        if self.at("not"):
            self.pos += 1
            return Unary("not", self.unary())
        if self.at("-") and self.tokens[self.pos + 1].kind == "int":
            self.pos += 1
            return Const(-self.integer())
        return self.primary()

    def integer(self) -> int:
        value = int(self.tok.text)
        self.pos += 1
        return value

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            return Const(self.integer())
        if tok.kind == "ident":
            self.pos += 1
            return Var(tok.text)
        if self.at("("):
            self.pos += 1
            inner = self.expr()
            self.expect(")")
            return inner
        self.error(("integer", "identifier", "'('", "'not'"))


def parse(text: str, *, validate: bool = True) -> Program:
    """Parse MiniLang source into a :class:`Program`.

    Raises :class:`ParseError` on malformed input and :class:`SemanticError`
    when a variable may be read before it is assigned, or an output is not
    definitely assigned at the end.
    """
    if text.startswith("﻿"):
        text = text[1:]
    program = _Parser(text).program()
    if validate:
        check(program)
    return program


def parse_file(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def check(program: Program) -> None:
    """Static definite-assignment check; raises :class:`SemanticError`."""

    def need(expr: Expr, assigned: set[str], stmt: Stmt) -> None:
        missing = sorted(expr_vars(expr) - assigned)
        if missing:
            where = f"line {stmt.line}, " if stmt.line else ""
            raise SemanticError(
                f"{where}statement {stmt.id}: {', '.join(missing)} may be read before assignment"
            )

    def walk(body: tuple[Stmt, ...], assigned: set[str]) -> set[str]:
        for stmt in body:
            if isinstance(stmt, Assign):
                need(stmt.rhs, assigned, stmt)
                assigned = assigned | {stmt.target}
            elif isinstance(stmt, If):
                need(stmt.cond, assigned, stmt)
                assigned = walk(stmt.then_body, assigned) & walk(stmt.else_body, assigned)
            else:
                need(stmt.cond, assigned, stmt)
                walk(stmt.body, assigned)
        return assigned

    final = walk(program.body, set(program.inputs))
    missing = [v for v in program.outputs if v not in final]
    if missing:
        raise SemanticError(f"output {', '.join(missing)} not assigned on every path")
    seen = set()
    for stmt in program.statements():
        if stmt.id in seen:
            raise SemanticError(f"duplicate statement id {stmt.id}")
        seen.add(stmt.id)
    if sorted(seen) != list(range(1, len(seen) + 1)):
        raise SemanticError("statement ids are not contiguous from 1")


# ---------------------------------------------------------------------------
# Pretty printer


def pretty_expr(expr: Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Unary):
        text = f"not {pretty_expr(expr.operand, UNARY_PRECEDENCE)}"
        return f"({text})" if parent_prec > UNARY_PRECEDENCE else text
    prec = PRECEDENCE[expr.op]
    text = f"{pretty_expr(expr.left, prec)} {expr.op} {pretty_expr(expr.right, prec, True)}"
    if prec < parent_prec or (prec == parent_prec and right_side):
        return f"({text})"
    return text


def pretty_stmt(stmt: Stmt, indent: int = 0) -> list[str]:
    pad = "    " * indent
    if isinstance(stmt, Assign):
        return [f"{pad}{stmt.target} := {pretty_expr(stmt.rhs)};"]
    if isinstance(stmt, If):
        lines = [f"{pad}if ({pretty_expr(stmt.cond)}) {{"]
        for inner in stmt.then_body:
            lines += pretty_stmt(inner, indent + 1)
        if stmt.else_body:
            lines.append(f"{pad}}} else {{")
            for inner in stmt.else_body:
                lines += pretty_stmt(inner, indent + 1)
        lines.append(f"{pad}}}")
        return lines
    lines = [f"{pad}while ({pretty_expr(stmt.cond)}) {{"]
    for inner in stmt.body:
        lines += pretty_stmt(inner, indent + 1)
    lines.append(f"{pad}}}")
    return lines


def header(stmt: Stmt) -> str:
    """One-line rendering of a statement (block bodies elided)."""
    if isinstance(stmt, Assign):
        return pretty_stmt(stmt)[0]
    keyword = "if" if isinstance(stmt, If) else "while"
    return f"{keyword} ({pretty_expr(stmt.cond)}) {{ ... }}"


def pretty(program: Program) -> str:
    def decl(keyword: str, names: tuple[str, ...]) -> str:
        return f"{keyword} {', '.join(names)};" if names else f"{keyword};"

    lines = [decl("input", program.inputs), decl("output", program.outputs)]
    for stmt in program.body:
        lines += pretty_stmt(stmt)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Concrete semantics


@dataclass(frozen=True)
class Limits:
    """Evaluation bounds.

    ``max_int_bits`` caps the magnitude of any intermediate result; without it
    a mutant that squares a variable inside a loop can take practically forever.
    """

    max_loop_iterations: int = 10_000
    max_int_bits: int = 1024

    def __post_init__(self):
        if self.max_loop_iterations < 1:
            raise ValueError("max_loop_iterations must be >= 1")
        if self.max_int_bits < 8:
            raise ValueError("max_int_bits must be >= 8")


def _div(a: int, b: int) -> int:
    # truncates toward zero, as in C
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def apply_binary(op: str, a: int, b: int, max_bits: int | None = None) -> int:
    """Apply a binary operator.

    Raises ZeroDivisionError for ``/`` by zero and OverflowError when an
    arithmetic result needs more than ``max_bits`` bits.
    """
    if op in ("+", "-", "*"):
        value = a + b if op == "+" else a - b if op == "-" else a * b
        if max_bits is not None and value.bit_length() > max_bits:
            raise OverflowError
        return value
    if op == "/":
        if b == 0:
            raise ZeroDivisionError
        return _div(a, b)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "and":
        return int(bool(a) and bool(b))
    if op == "or":
        return int(bool(a) or bool(b))
    raise ValueError(f"unknown operator {op!r}")


def apply_unary(op: str, a: int) -> int:
    if op == "not":
        return int(not a)
    raise ValueError(f"unknown operator {op!r}")


def evaluate(expr: Expr, env: Mapping[str, int], sid: int | None = None,
             limits: Limits = Limits()) -> int:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, Unary):
        return apply_unary(expr.op, evaluate(expr.operand, env, sid, limits))
    # eager: both operands are always evaluated
    left = evaluate(expr.left, env, sid, limits)
    right = evaluate(expr.right, env, sid, limits)
    try:
        return apply_binary(expr.op, left, right, limits.max_int_bits)
    except ZeroDivisionError:
        raise DivisionByZero(sid) from None
    except OverflowError:
        raise IntegerOverflow(sid, limits.max_int_bits) from None


def run(program: Program, inputs: Mapping[str, int], limits: Limits = Limits()) -> dict[str, int]:
    """Execute ``program`` and return the final values of all variables."""
    if set(inputs) != set(program.inputs):
        raise ValueError(
            f"inputs must cover exactly {sorted(program.inputs)}, got {sorted(inputs)}"
        )
    env = {name: int(inputs[name]) for name in program.inputs}

    def exec_body(body: tuple[Stmt, ...]) -> None:
        for stmt in body:
            if isinstance(stmt, Assign):
                env[stmt.target] = evaluate(stmt.rhs, env, stmt.id, limits)
            elif isinstance(stmt, If):
                exec_body(stmt.then_body if evaluate(stmt.cond, env, stmt.id, limits) else stmt.else_body)
            else:
                count = 0
                while evaluate(stmt.cond, env, stmt.id, limits):
                    count += 1
                    if count > limits.max_loop_iterations:
                        raise LoopLimitExceeded(stmt.id, limits.max_loop_iterations)
                    exec_body(stmt.body)

    exec_body(program.body)
    return env


_ROMAN = ((1000, "M"), (900, "CM"), (500, "D"), (400, "CD"), (100, "C"), (90, "XC"),
          (50, "L"), (40, "XL"), (10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I"))


def roman(n: int) -> str:
    """Roman numeral label for a statement id (display only)."""
    if n < 1:
        raise ValueError(n)
    out = []
    for value, numeral in _ROMAN:
        count, n = divmod(n, value)
        out.append(numeral * count)
    return "".join(out)
