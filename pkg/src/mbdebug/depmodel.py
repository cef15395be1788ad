"""Abstract dependences and the dependence-based (verification) model.

A pair ``(x, y)`` states that a new value of ``y`` may produce a new value of
``x``.  The model computes these pairs for a program, compares them with a
developer-written specification and blames statements for every mismatch.

Two granularities are offered:

``LOCAL``
    per definition: ``x := e`` yields ``(x, v)`` for each variable ``v`` of
    ``e`` and of every enclosing condition.
``GLOBAL``
    end to end: final values against initial values, obtained by a monotone
    fixpoint over sets of source variables.

A statement assumed abnormal contributes *Top* for its target instead of
pairs: its target then satisfies any specified pair and produces no spurious
ones.  Under ``GLOBAL`` the Top propagates to everything computed from it.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import InexplicableMismatch
from .minilang import Assign, If, Program, Stmt, While, expr_vars

logger = logging.getLogger(__name__)

Pair = tuple[str, str]


class Granularity(enum.Enum):
    LOCAL = "local"
    GLOBAL = "global"


@dataclass(frozen=True)
class DependenceSet:
    """Dependence pairs plus, for each pair, the statements blamed for it.

    ``top`` lists targets whose dependences are unconstrained because an
    abnormal statement defines them.
    """

    pairs: frozenset[Pair] = frozenset()
    provenance: Mapping[Pair, frozenset[int]] = field(default_factory=dict, compare=False)
    top: frozenset[str] = frozenset()

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def targets(self) -> frozenset[str]:
        return frozenset(t for t, _ in self.pairs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair]) -> "DependenceSet":
        """Specification constructor; duplicate pairs are dropped with a warning."""
        seen: set[Pair] = set()
        for pair in pairs:
            pair = (pair[0], pair[1])
            if pair in seen:
                logger.warning("duplicate dependence pair %s ignored", pair)
            seen.add(pair)
        return cls(frozenset(seen))


@dataclass(frozen=True)
class Comparison:
    missing: frozenset[Pair]
    spurious: frozenset[Pair]

    @property
    def consistent(self) -> bool:
        return not self.missing and not self.spurious


def _check_assumptions(program: Program, assumptions: Iterable[int]) -> frozenset[int]:
    assumptions = frozenset(assumptions)
    unknown = assumptions - program.assignment_ids()
    if unknown:
        raise ValueError(f"assumptions name no assignment statement: {sorted(unknown)}")
    return assumptions


# ---------------------------------------------------------------------------
# Local granularity


def _local(program: Program, abnormal: frozenset[int]) -> DependenceSet:
    prov: dict[Pair, set[int]] = {}
    top: set[str] = set()

    def walk(body: tuple[Stmt, ...], ctrl: frozenset[str]) -> None:
        for stmt in body:
            if isinstance(stmt, Assign):
                if stmt.id in abnormal:
                    top.add(stmt.target)
                    continue
                for v in expr_vars(stmt.rhs) | ctrl:
                    prov.setdefault((stmt.target, v), set()).add(stmt.id)
            elif isinstance(stmt, If):
                inner = ctrl | expr_vars(stmt.cond)
                walk(stmt.then_body, inner)
                walk(stmt.else_body, inner)
            else:
                walk(stmt.body, ctrl | expr_vars(stmt.cond))

    walk(program.body, frozenset())
    return DependenceSet(
        frozenset(prov), {k: frozenset(v) for k, v in prov.items()}, frozenset(top)
    )


# ---------------------------------------------------------------------------
# Global granularity

TOP = None  # marker for an unconstrained dependence set


@dataclass
class GlobalState:
    """Abstract state of the global analysis.

    ``deps[x]`` is the set of input variables whose initial values may reach
    the current value of ``x`` (``TOP`` when unconstrained); ``slice[x]`` is
    the set of assignment statements that value flows through.
    """

    deps: dict[str, frozenset[str] | None]
    slice: dict[str, frozenset[int]]

    def copy(self) -> "GlobalState":
        return GlobalState(dict(self.deps), dict(self.slice))

    def join(self, other: "GlobalState") -> "GlobalState":
        deps = {}
        for var in self.deps.keys() | other.deps.keys():
            a, b = self.deps.get(var, frozenset()), other.deps.get(var, frozenset())
            deps[var] = TOP if a is TOP or b is TOP else a | b
        slices = {
            var: self.slice.get(var, frozenset()) | other.slice.get(var, frozenset())
            for var in self.slice.keys() | other.slice.keys()
        }
        return GlobalState(deps, slices)

    def __eq__(self, other) -> bool:
        return self.deps == other.deps and self.slice == other.slice


@dataclass
class GlobalResult:
    state: GlobalState
    loop_iterations: dict[int, int]


def global_analysis(program: Program, assumptions: Iterable[int] = ()) -> GlobalResult:
    """Run the end-to-end fixpoint; also reports the iteration count per loop."""
    abnormal = _check_assumptions(program, assumptions)
    iterations: dict[int, int] = {}

    def read(state: GlobalState, names: frozenset[str]):
        deps: frozenset[str] | None = frozenset()
        stmts: frozenset[int] = frozenset()
        for name in names:
            d = state.deps[name]
            deps = TOP if deps is TOP or d is TOP else deps | d
            stmts |= state.slice[name]
        return deps, stmts

    def walk(body: tuple[Stmt, ...], state: GlobalState, ctrl) -> GlobalState:
        for stmt in body:
            if isinstance(stmt, Assign):
                state = state.copy()
                if stmt.id in abnormal:
                    deps, stmts = TOP, frozenset()
                else:
                    deps, stmts = read(state, expr_vars(stmt.rhs))
                    cdeps, cstmts = ctrl
                    deps = TOP if deps is TOP or cdeps is TOP else deps | cdeps
                    stmts |= cstmts
                state.deps[stmt.target] = deps
                state.slice[stmt.target] = stmts | {stmt.id}
            elif isinstance(stmt, If):
                inner = _join_ctrl(ctrl, read(state, expr_vars(stmt.cond)))
                state = walk(stmt.then_body, state, inner).join(walk(stmt.else_body, state, inner))
            else:
                count = 0
                while True:
                    count += 1
                    inner = _join_ctrl(ctrl, read(state, expr_vars(stmt.cond)))
                    nxt = state.join(walk(stmt.body, state, inner))
                    if nxt == state:
                        break
                    state = nxt
                iterations[stmt.id] = max(iterations.get(stmt.id, 0), count)
        return state

    init = GlobalState(
        {v: frozenset((v,)) for v in program.inputs},
        {v: frozenset() for v in program.inputs},
    )
    final = walk(program.body, init, (frozenset(), frozenset()))
    return GlobalResult(final, iterations)


def _join_ctrl(a, b):
    deps = TOP if a[0] is TOP or b[0] is TOP else a[0] | b[0]
    return deps, a[1] | b[1]


def _global(program: Program, abnormal: frozenset[int]) -> DependenceSet:
    state = global_analysis(program, abnormal).state
    pairs: dict[Pair, frozenset[int]] = {}
    top = set()
    for var in program.assigned_variables():
        deps = state.deps[var]
        if deps is TOP:
            top.add(var)
            continue
        # a value is blamed on every statement it flows through: making any of
        # them abnormal turns the whole value into Top
        for src in deps:
            pairs[(var, src)] = state.slice[var]
    return DependenceSet(frozenset(pairs), pairs, frozenset(top))


# ---------------------------------------------------------------------------
# Public operations


def compute_dependences(
    program: Program,
    granularity: Granularity = Granularity.LOCAL,
    assumptions: Iterable[int] = (),
) -> DependenceSet:
    """Dependences of ``program`` with the statements in ``assumptions`` abnormal."""
    abnormal = _check_assumptions(program, assumptions)
    if Granularity(granularity) is Granularity.LOCAL:
        return _local(program, abnormal)
    return _global(program, abnormal)


def compare_dependences(computed: DependenceSet, specified: DependenceSet) -> Comparison:
    missing = frozenset(
        pair for pair in specified.pairs - computed.pairs if pair[0] not in computed.top
    )
    return Comparison(missing, computed.pairs - specified.pairs)


def blame_set(program: Program, var: str, granularity: Granularity) -> frozenset[int]:
    """Statements whose abnormality would free ``var`` from its dependences."""
    if Granularity(granularity) is Granularity.LOCAL:
        return program.definers(var)
    state = global_analysis(program).state
    return state.slice.get(var, frozenset())


def dep_conflicts(
    program: Program,
    specified: DependenceSet,
    granularity: Granularity = Granularity.LOCAL,
    assumptions: Iterable[int] = (),
) -> list[frozenset[int]]:
    """One conflict per discrepancy: missing pairs first, then spurious, each sorted.

    Raises :class:`InexplicableMismatch` when a discrepancy has no normal
    statement to blame, e.g. a specified target that is never assigned.
    """
    abnormal = _check_assumptions(program, assumptions)
    computed = compute_dependences(program, granularity, abnormal)
    diff = compare_dependences(computed, specified)
    conflicts = []
    for pair in sorted(diff.missing):
        conflict = blame_set(program, pair[0], granularity) - abnormal
        if not conflict:
            raise InexplicableMismatch(
                f"specified dependence {pair[0]} <- {pair[1]} is missing and no normal "
                f"statement defines {pair[0]}",
                ("missing", pair),
            )
        conflicts.append(conflict)
    for pair in sorted(diff.spurious):
        conflict = computed.provenance[pair] - abnormal
        if not conflict:
            raise InexplicableMismatch(
                f"computed dependence {pair[0]} <- {pair[1]} is unspecified and has no "
                f"normal statement to blame",
                ("spurious", pair),
            )
        conflicts.append(conflict)
    return conflicts


# ---------------------------------------------------------------------------
# .deps files


def parse_deps(text: str) -> DependenceSet:
    """Parse ``target <- source1, source2`` lines; ``#`` starts a comment.

    A line ``target <-`` with no sources is accepted and declares nothing.
    """
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "<-" not in line:
            raise ValueError(f"line {lineno}: expected 'target <- sources', got {raw!r}")
        target, sources = (part.strip() for part in line.split("<-", 1))
        if not target or " " in target:
            raise ValueError(f"line {lineno}: bad target {target!r}")
        for src in sources.split(","):
            src = src.strip()
            if src:
                pairs.append((target, src))
    return DependenceSet.from_pairs(pairs)


def format_deps(deps: DependenceSet) -> str:
    by_target: dict[str, list[str]] = {}
    for target, src in sorted(deps.pairs):
        by_target.setdefault(target, []).append(src)
    return "".join(f"{t} <- {', '.join(srcs)}\n" for t, srcs in by_target.items())


def read_deps(path) -> DependenceSet:
    with open(path, encoding="utf-8") as fh:
        return parse_deps(fh.read())


def dep_oracle(
    program: Program,
    specified: DependenceSet,
    granularity: Granularity = Granularity.LOCAL,
):
    """Oracle returning the smallest conflict (ties broken lexicographically)."""

    def oracle(assumptions: frozenset[int]) -> frozenset[int] | None:
        conflicts = dep_conflicts(program, specified, granularity, assumptions)
        if not conflicts:
            return None
        return min(conflicts, key=lambda c: (len(c), sorted(c)))

    return oracle
