"""Value-based model: forward evaluation over known/unknown integers.

Each value remembers the statements it was computed from (its provenance).
Assuming a statement abnormal makes its target :data:`UNKNOWN`, and unknown
is strict through every operator.  When an expected output comes out wrong,
the normal statements in its provenance form a conflict.

Provenance also records control influence: a value assigned under a
condition, or one that a branch or loop *could* have overwritten, carries the
provenance of that condition.  Without this, a fault that steers control
flow would go unblamed.

Only forward simulation is done; observations are never propagated backwards.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import InexplicableMismatch, LoopLimitExceeded
from .minilang import (
    Assign, Binary, Const, Expr, If, Limits, Program, Stmt, Unary, Var,
    apply_binary, apply_unary, assigned_in,
)

__all__ = [
    "PartialValue", "UNKNOWN", "DivisionByZeroWarning", "IntegerOverflowWarning", "TestCase",
    "evaluate_partial", "value_conflict", "parse_test", "format_test", "read_test", "value_oracle",
]


class DivisionByZeroWarning(RuntimeWarning):
    """A normal statement divided by zero; its value became unknown."""


class IntegerOverflowWarning(RuntimeWarning):
    """A result exceeded ``Limits.max_int_bits``; it became unknown."""


class _Unknown:
    __slots__ = ()

    def __repr__(self) -> str:
        return "UNKNOWN"

    def __reduce__(self):
        return "UNKNOWN"


UNKNOWN = _Unknown()


@dataclass(frozen=True)
class PartialValue:
    value: int | _Unknown
    provenance: frozenset[int] = frozenset()

    @property
    def known(self) -> bool:
        return self.value is not UNKNOWN

    def __repr__(self) -> str:
        shown = "Unknown" if not self.known else f"Known {self.value}"
        return f"<{shown} prov={sorted(self.provenance)}>"


@dataclass(frozen=True)
class TestCase:
    inputs: Mapping[str, int]
    expected: Mapping[str, int]
    name: str = ""

    __test__ = False  # keep pytest from collecting this class

    def validate(self, program: Program) -> None:
        if set(self.inputs) != set(program.inputs):
            raise ValueError(
                f"test {self.name or '?'}: inputs {sorted(self.inputs)} do not match "
                f"program inputs {sorted(program.inputs)}"
            )
        if not self.expected:
            raise ValueError(f"test {self.name or '?'}: no expected values")
        extra = set(self.expected) - set(program.outputs)
        if extra:
            raise ValueError(f"test {self.name or '?'}: {sorted(extra)} are not outputs")


PartialEnv = dict[str, PartialValue]


class _Evaluator:
    def __init__(self, abnormal: frozenset[int], limits: Limits):
        self.abnormal = abnormal
        self.limits = limits

    def expr(self, expr: Expr, env: PartialEnv, sid: int) -> PartialValue:
        if isinstance(expr, Const):
            return PartialValue(expr.value)
        if isinstance(expr, Var):
            return env[expr.name]
        if isinstance(expr, Unary):
            inner = self.expr(expr.operand, env, sid)
            if not inner.known:
                return inner
            return PartialValue(apply_unary(expr.op, inner.value), inner.provenance)
        left = self.expr(expr.left, env, sid)
        right = self.expr(expr.right, env, sid)
        prov = left.provenance | right.provenance
        if not (left.known and right.known):
            return PartialValue(UNKNOWN, prov)
        try:
            value = apply_binary(expr.op, left.value, right.value, self.limits.max_int_bits)
            return PartialValue(value, prov)
        except ZeroDivisionError:
            warnings.warn(f"division by zero in statement {sid}; result treated as unknown",
                          DivisionByZeroWarning, stacklevel=2)
        except OverflowError:
            warnings.warn(f"statement {sid} exceeds {self.limits.max_int_bits} bits; "
                          "result treated as unknown", IntegerOverflowWarning, stacklevel=2)
        return PartialValue(UNKNOWN, prov | {sid})

    def body(self, body: tuple[Stmt, ...], env: PartialEnv, ctrl: frozenset[int],
             speculative: bool) -> PartialEnv:
        for stmt in body:
            if isinstance(stmt, Assign):
                self.assign(stmt, env, ctrl)
            elif isinstance(stmt, If):
                env = self.branch(stmt, env, ctrl, speculative)
            else:
                env = self.loop(stmt, env, ctrl, speculative)
        return env

    def assign(self, stmt: Assign, env: PartialEnv, ctrl: frozenset[int]) -> None:
        if stmt.id in self.abnormal:
            env[stmt.target] = PartialValue(UNKNOWN, frozenset((stmt.id,)))
            return
        val = self.expr(stmt.rhs, env, stmt.id)
        env[stmt.target] = PartialValue(val.value, val.provenance | ctrl | {stmt.id})

    @staticmethod
    def _taint(env: PartialEnv, names: Iterable[str], prov: frozenset[int]) -> None:
        for name in names:
            if name in env:
                old = env[name]
                env[name] = PartialValue(old.value, old.provenance | prov)

    def branch(self, stmt: If, env: PartialEnv, ctrl: frozenset[int], speculative: bool) -> PartialEnv:
        cond = self.expr(stmt.cond, env, stmt.id)
        inner = ctrl | cond.provenance
        if cond.known:
            taken, skipped = (
                (stmt.then_body, stmt.else_body) if cond.value else (stmt.else_body, stmt.then_body)
            )
            env = self.body(taken, env, inner, speculative)
            # values the other branch would have overwritten depend on the condition
            self._taint(env, assigned_in(skipped), inner)
            return env
        then_env = self.body(stmt.then_body, dict(env), inner, True)
        else_env = self.body(stmt.else_body, dict(env), inner, True)
        touched = assigned_in(stmt.then_body) | assigned_in(stmt.else_body)
        merged = dict(env)
        for name in touched:
            a, b = then_env.get(name), else_env.get(name)
            if a is None and b is None:
                continue
            prov = inner | (a.provenance if a else frozenset()) | (b.provenance if b else frozenset())
            if a is not None and b is not None and a.known and b.known and a.value == b.value:
                merged[name] = PartialValue(a.value, prov)
            else:
                merged[name] = PartialValue(UNKNOWN, prov)
        return merged

    def loop(self, stmt: While, env: PartialEnv, ctrl: frozenset[int], speculative: bool) -> PartialEnv:
        assigned = assigned_in(stmt.body)
        count = 0
        while True:
            cond = self.expr(stmt.cond, env, stmt.id)
            inner = ctrl | cond.provenance
            # the iteration count, and so every value the body writes, hangs on the condition
            self._taint(env, assigned, inner)
            if cond.known and not cond.value:
                return env
            if cond.known and count >= self.limits.max_loop_iterations:
                if not speculative:
                    raise LoopLimitExceeded(stmt.id, self.limits.max_loop_iterations)
                # a branch that may never run is allowed to diverge
                cond = PartialValue(UNKNOWN, cond.provenance)
            if not cond.known:
                definers = frozenset(
                    s.id for s in _assignments(stmt.body)
                )
                prov = inner | definers
                for name in assigned:
                    old = env.get(name)
                    env[name] = PartialValue(UNKNOWN, prov | (old.provenance if old else frozenset()))
                return env
            count += 1
            env = self.body(stmt.body, env, inner, speculative)


def _assignments(body: tuple[Stmt, ...]) -> list[Assign]:
    out = []
    for stmt in body:
        if isinstance(stmt, Assign):
            out.append(stmt)
        elif isinstance(stmt, If):
            out += _assignments(stmt.then_body) + _assignments(stmt.else_body)
        else:
            out += _assignments(stmt.body)
    return out


def _check_assumptions(program: Program, assumptions: Iterable[int]) -> frozenset[int]:
    assumptions = frozenset(assumptions)
    unknown = assumptions - program.assignment_ids()
    if unknown:
        raise ValueError(f"assumptions name no assignment statement: {sorted(unknown)}")
    return assumptions


def evaluate_partial(
    program: Program,
    test: TestCase,
    assumptions: Iterable[int] = (),
    limits: Limits = Limits(),
) -> PartialEnv:
    """Evaluate ``program`` on ``test.inputs`` with ``assumptions`` abnormal."""
    abnormal = _check_assumptions(program, assumptions)
    if set(test.inputs) != set(program.inputs):
        raise ValueError(
            f"inputs must cover exactly {sorted(program.inputs)}, got {sorted(test.inputs)}"
        )
    env = {name: PartialValue(int(test.inputs[name])) for name in program.inputs}
    return _Evaluator(abnormal, limits).body(program.body, env, frozenset(), False)


def value_conflict(
    program: Program,
    test: TestCase,
    assumptions: Iterable[int] = (),
    limits: Limits = Limits(),
) -> frozenset[int] | None:
    """Conflict for ``test`` under ``assumptions``, or None when consistent.

    An unknown value is consistent with any expectation.  A wrong known value
    contributes the normal statements of its provenance.
    """
    abnormal = _check_assumptions(program, assumptions)
    env = evaluate_partial(program, test, abnormal, limits)
    conflict: set[int] = set()
    for name in sorted(test.expected):
        got = env.get(name)
        if got is None or not got.known or got.value == test.expected[name]:
            continue
        blame = got.provenance - abnormal
        if not blame:
            raise InexplicableMismatch(
                f"{name} = {got.value} contradicts expected {test.expected[name]} "
                f"and no normal statement computed it",
                (name, got.value, test.expected[name]),
            )
        conflict |= blame
    return frozenset(conflict) if conflict else None


# ---------------------------------------------------------------------------
# .test files


def parse_test(text: str, name: str = "") -> TestCase:
    """Parse ``in <var> = <int>`` / ``expect <var> = <int>`` lines."""
    inputs: dict[str, int] = {}
    expected: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            keyword, rest = line.split(None, 1)
            var, value = (part.strip() for part in rest.split("=", 1))
            number = int(value)
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from None
        if keyword == "in":
            table = inputs
        elif keyword == "expect":
            table = expected
        else:
            raise ValueError(f"line {lineno}: unknown keyword {keyword!r}")
        if var in table:
            raise ValueError(f"line {lineno}: {var} given twice")
        table[var] = number
    return TestCase(inputs, expected, name)


def format_test(test: TestCase) -> str:
    lines = [f"in {k} = {v}" for k, v in test.inputs.items()]
    lines += [f"expect {k} = {v}" for k, v in test.expected.items()]
    return "\n".join(lines) + "\n"


def read_test(path) -> TestCase:
    with open(path, encoding="utf-8") as fh:
        return parse_test(fh.read(), name=str(path))


def value_oracle(program: Program, tests: Iterable[TestCase], limits: Limits = Limits()):
    """Oracle over a pool of test cases: the first test (in order) that conflicts wins."""
    tests = list(tests)
    for test in tests:
        test.validate(program)

    def oracle(assumptions: frozenset[int]) -> frozenset[int] | None:
        for test in tests:
            conflict = value_conflict(program, test, assumptions, limits)
            if conflict is not None:
                return conflict
        return None

    return oracle
