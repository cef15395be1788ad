from __future__ import annotations

import warnings

import pytest
from hypothesis import strategies as st

from mbdebug.depmodel import DependenceSet, Granularity, compute_dependences
from mbdebug.minilang import (
    BINARY_OPS, Assign, Binary, Const, If, Program, Unary, Var, While, parse, renumber,
)
from mbdebug.valuemodel import DivisionByZeroWarning, IntegerOverflowWarning, TestCase

VALUE_BUGGY = "input a, b; output c; a := a + 2; b := b + a; c := a + a;"
VALUE_CORRECT = "input a, b; output c; a := a + 2; b := b + a; c := a + b;"
DEP_BUGGY = "input b, c; output a, b, c; a := b; b := c; c := a + c;"
DEP_CORRECT = "input b, c; output a, b, c; a := b; b := c; c := a + b;"
LOOP = "input n; output s; s := 0; i := 0; while (i < n) { s := s + i; i := i + 1; }"

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE: list[str] = []


@pytest.fixture(autouse=True)
def _quiet_division_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivisionByZeroWarning)
        warnings.simplefilter("ignore", IntegerOverflowWarning)
        yield


@pytest.fixture
def value_prog():
    return parse(VALUE_BUGGY)


@pytest.fixture
def value_test():
    return TestCase({"a": 2, "b": 2}, {"c": 10})


@pytest.fixture
def dep_prog():
    return parse(DEP_BUGGY)


@pytest.fixture
def dep_spec():
    return DependenceSet(compute_dependences(parse(DEP_CORRECT), Granularity.LOCAL).pairs)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# Hypothesis strategies: syntactic programs (no definite-assignment guarantee)

names = st.sampled_from(["a", "b", "c", "x", "y1", "n_2", "name.first", "name.last"])

exprs = st.recursive(
    st.one_of(st.builds(Const, st.integers(-50, 50)), st.builds(Var, names)),
    lambda inner: st.one_of(
        st.builds(Unary, st.just("not"), inner),
        st.builds(Binary, st.sampled_from(BINARY_OPS), inner, inner),
    ),
    max_leaves=8,
)


def _stmts(depth: int):
    assign = st.builds(Assign, st.just(0), names, exprs)
    if depth == 0:
        return assign
    block = st.lists(_stmts(depth - 1), max_size=3).map(tuple)
    return st.one_of(
        assign,
        st.builds(If, st.just(0), exprs, block, block),
        st.builds(While, st.just(0), exprs, block),
    )


@st.composite
def syntactic_programs(draw):
    body = tuple(draw(st.lists(_stmts(2), max_size=5)))
    numbered, _ = renumber(body)
    inputs = tuple(draw(st.lists(names, unique=True, max_size=3)))
    outputs = tuple(draw(st.lists(names, unique=True, max_size=3)))
    return Program(inputs, outputs, numbered)
