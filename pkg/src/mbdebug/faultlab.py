"""Single-statement fault injection and the two-model comparison benchmark.

Mutation operators (all applied to one assignment statement):

===================  ===========================================  ==========
kind                 example                                      fault side
===================  ===========================================  ==========
``OPERATOR``         ``c := a + b``  ->  ``c := a - b``           Operator
``RHS_VAR``          ``c := a + b``  ->  ``c := a + a``           RHS
``LHS_VAR``          ``c := a + b``  ->  ``d := a + b``           LHS
``CONST``            ``i := i + 1``  ->  ``i := i + 2``           Const
===================  ===========================================  ==========

``RHS_VAR`` is the classic "read the wrong field" mistake
(``name.firstname`` instead of ``name.lastname``).
"""

from __future__ import annotations

import enum
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .depmodel import DependenceSet, Granularity, compute_dependences, dep_oracle, read_deps
from .diagnosis import DEFAULT_MAX_CARDINALITY, diagnose
from .errors import (
    CorpusInconsistent, IntegerOverflow, LoopLimitExceeded, MiniLangError, NotApplicable, OracleError,
    SemanticError,
)
from .minilang import (
    ARITHMETIC_OPS, LOGICAL_OPS, RELATIONAL_OPS, Assign, Binary, Const, Expr, If, Limits,
    Program, Stmt, Unary, Var, While, check, header, parse_file, replace_statement, run,
)
from .valuemodel import TestCase, read_test, value_oracle


class MutationKind(enum.Enum):
    OPERATOR = "operator"
    RHS_VAR = "rhs-var"
    LHS_VAR = "lhs-var"
    CONST = "const"

    @property
    def side(self) -> str:
        return _SIDES[self]


_SIDES = {
    MutationKind.OPERATOR: "Operator",
    MutationKind.RHS_VAR: "RHS",
    MutationKind.LHS_VAR: "LHS",
    MutationKind.CONST: "Const",
}

ALL_KINDS = tuple(MutationKind)
MODELS = ("value", "dep")


@dataclass(frozen=True)
class Mutation:
    statement_id: int
    kind: MutationKind
    site: int  # preorder index of the rewritten node in the right-hand side; 0 for LHS
    before: str
    after: str
    original_text: str = ""
    mutated_text: str = ""

    @property
    def fault_side(self) -> str:
        return self.kind.side

    def describe(self) -> str:
        return (f"statement {self.statement_id} [{self.kind.value}] {self.before} -> {self.after}: "
                f"{self.original_text.strip()}  =>  {self.mutated_text.strip()}")

    def to_dict(self) -> dict:
        return {
            "statement": self.statement_id,
            "kind": self.kind.value,
            "site": self.site,
            "before": self.before,
            "after": self.after,
            "original": self.original_text.strip(),
            "mutated": self.mutated_text.strip(),
        }


# ---------------------------------------------------------------------------
# Expression rewriting by preorder position


def _nodes(expr: Expr) -> list[Expr]:
    out = [expr]
    if isinstance(expr, Unary):
        out += _nodes(expr.operand)
    elif isinstance(expr, Binary):
        out += _nodes(expr.left) + _nodes(expr.right)
    return out


def _rewrite(expr: Expr, index: int, new: Expr) -> Expr:
    """Replace the node at preorder ``index`` with ``new``."""
    counter = [0]

    def go(node: Expr) -> Expr:
        here = counter[0]
        counter[0] += 1
        if here == index:
            # skip the replaced subtree's nodes so later indices stay aligned
            counter[0] += len(_nodes(node)) - 1
            return new
        if isinstance(node, Unary):
            return Unary(node.op, go(node.operand))
        if isinstance(node, Binary):
            left = go(node.left)
            return Binary(node.op, left, go(node.right))
        return node

    return go(expr)


def _op_alternatives(op: str) -> tuple[str, ...]:
    for group in (ARITHMETIC_OPS, RELATIONAL_OPS, LOGICAL_OPS):
        if op in group:
            return tuple(o for o in group if o != op)
    return ()


def _visible(program: Program) -> dict[int, frozenset[str]]:
    """Variables definitely assigned just before each assignment statement."""
    out: dict[int, frozenset[str]] = {}

    def walk(body: tuple[Stmt, ...], assigned: frozenset[str]) -> frozenset[str]:
        for stmt in body:
            if isinstance(stmt, Assign):
                out[stmt.id] = assigned
                assigned = assigned | {stmt.target}
            elif isinstance(stmt, If):
                assigned = walk(stmt.then_body, assigned) & walk(stmt.else_body, assigned)
            else:
                walk(stmt.body, assigned)
        return assigned

    walk(program.body, frozenset(program.inputs))
    return out


def _candidates(program: Program, stmt: Assign, kind: MutationKind, visible) -> list[tuple]:
    """(site, before, after, new statement) tuples, before well-formedness filtering."""
    out = []
    nodes = _nodes(stmt.rhs)
    if kind is MutationKind.OPERATOR:
        for i, node in enumerate(nodes):
            if isinstance(node, Binary):
                for alt in _op_alternatives(node.op):
                    new = _rewrite(stmt.rhs, i, Binary(alt, node.left, node.right))
                    out.append((i, node.op, alt, replace(stmt, rhs=new)))
    elif kind is MutationKind.RHS_VAR:
        for i, node in enumerate(nodes):
            if isinstance(node, Var):
                for alt in sorted(visible[stmt.id] - {node.name}):
                    out.append((i, node.name, alt, replace(stmt, rhs=_rewrite(stmt.rhs, i, Var(alt)))))
    elif kind is MutationKind.LHS_VAR:
        names = set(program.inputs) | program.assigned_variables()
        for alt in sorted(names - {stmt.target}):
            out.append((0, stmt.target, alt, replace(stmt, target=alt)))
    elif kind is MutationKind.CONST:
        for i, node in enumerate(nodes):
            if isinstance(node, Const):
                for alt in (node.value + 1, node.value - 1):
                    out.append((i, str(node.value), str(alt),
                                replace(stmt, rhs=_rewrite(stmt.rhs, i, Const(alt)))))
    return out


def mutation_sites(program: Program, kind: MutationKind) -> list[tuple[Program, Mutation]]:
    """Every well-formed single-statement mutant of ``kind``, in canonical order."""
    kind = MutationKind(kind)
    visible = _visible(program)
    out = []
    for stmt in program.assignments():
        for site, before, after, new_stmt in _candidates(program, stmt, kind, visible):
            mutant = replace_statement(program, new_stmt)
            try:
                check(mutant)
            except SemanticError:
                continue
            mutation = Mutation(
                stmt.id, kind, site, before, after, header(stmt), header(new_stmt)
            )
            out.append((mutant, mutation))
    return out


def apply_mutation(program: Program, statement_id: int, kind: MutationKind,
                   before: str, after: str, site: int | None = None) -> tuple[Program, Mutation]:
    """Apply one specific mutation, e.g. ``RHS_VAR`` ``b -> a`` at statement 3."""
    for mutant, mutation in mutation_sites(program, kind):
        if (mutation.statement_id == statement_id and mutation.before == before
                and mutation.after == after and (site is None or mutation.site == site)):
            return mutant, mutation
    raise NotApplicable(f"no {MutationKind(kind).value} site {before} -> {after} at statement {statement_id}")


def inject_mutation(program: Program, seed: int, kind: MutationKind) -> tuple[Program, Mutation]:
    """Pick one mutant of ``kind`` deterministically from ``seed``."""
    sites = mutation_sites(program, kind)
    if not sites:
        raise NotApplicable(f"no site admits a {MutationKind(kind).value} mutation")
    return random.Random(seed).choice(sites)


# ---------------------------------------------------------------------------
# Corpus


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    program: Program
    tests: tuple[TestCase, ...]
    spec: DependenceSet

    def check_consistent(self, limits: Limits = Limits()) -> None:
        """Raise :class:`CorpusInconsistent` unless the program passes its own tests and spec."""
        for test in self.tests:
            try:
                test.validate(self.program)
                result = run(self.program, test.inputs, limits)
            except (ValueError, MiniLangError) as exc:
                raise CorpusInconsistent(self.name, str(exc)) from exc
            for var, want in test.expected.items():
                if result.get(var) != want:
                    raise CorpusInconsistent(
                        self.name, f"test {test.name}: {var} = {result.get(var)}, expected {want}"
                    )
        computed = compute_dependences(self.program, Granularity.LOCAL)
        if computed.pairs != self.spec.pairs:
            missing = sorted(self.spec.pairs - computed.pairs)
            extra = sorted(computed.pairs - self.spec.pairs)
            raise CorpusInconsistent(self.name, f"spec mismatch: missing {missing}, spurious {extra}")


def load_manifest(path) -> list[CorpusEntry]:
    """Read a manifest: one entry per line, ``program.mini test.test... spec.deps``.

    Paths are relative to the manifest; ``#`` starts a comment.
    """
    path = Path(path)
    entries = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ValueError(f"{path}:{lineno}: need a program, at least one test and a spec")
        prog_path, *test_paths, spec_path = (path.parent / p for p in parts)
        entries.append(CorpusEntry(
            prog_path.stem,
            parse_file(prog_path),
            tuple(read_test(p) for p in test_paths),
            read_deps(spec_path),
        ))
    return entries


CORPUS_DIR = Path(__file__).parent / "corpus"


def bundled_corpus() -> list[CorpusEntry]:
    """The ten bundled programs (five straight-line, three branching, two looping)."""
    return load_manifest(CORPUS_DIR / "manifest.txt")


# ---------------------------------------------------------------------------
# Benchmark


@dataclass(frozen=True)
class TrialResult:
    entry: str
    mutation: Mutation
    model: str
    detected: bool
    localized: bool
    diagnoses: tuple[tuple[int, ...], ...]
    fault_side: str
    error: str = ""

    @property
    def diagnosis_count(self) -> int:
        return len(self.diagnoses) if self.detected else 0

    def to_dict(self) -> dict:
        return {
            "entry": self.entry,
            "mutation": self.mutation.to_dict(),
            "model": self.model,
            "detected": self.detected,
            "localized": self.localized,
            "diagnoses": [list(d) for d in self.diagnoses],
            "fault_side": self.fault_side,
            "error": self.error,
        }


def model_oracle(model: str, program: Program, entry: CorpusEntry, limits: Limits):
    if model == "value":
        return value_oracle(program, entry.tests, limits)
    if model == "dep":
        return dep_oracle(program, entry.spec, Granularity.LOCAL)
    raise ValueError(f"unknown model {model!r}")


def run_trial(entry: CorpusEntry, mutant: Program, mutation: Mutation, model: str,
              limits: Limits = Limits(), max_cardinality: int = DEFAULT_MAX_CARDINALITY) -> TrialResult:
    oracle = model_oracle(model, mutant, entry, limits)
    try:
        report = diagnose(oracle, mutant.assignment_ids(), max_cardinality)
    except OracleError as exc:
        # the model sees an anomaly it cannot pin on any statement
        return TrialResult(entry.name, mutation, model, True, False, (), mutation.fault_side,
                           f"{type(exc.cause).__name__}: {exc.cause}")
    detected = bool(report.conflicts_used)
    diagnoses = tuple(tuple(sorted(d)) for d in report.diagnoses)
    localized = detected and (mutation.statement_id,) in diagnoses
    return TrialResult(entry.name, mutation, model, detected, localized, diagnoses, mutation.fault_side)


@dataclass(frozen=True)
class _Job:
    entry: CorpusEntry
    mutant: Program
    mutation: Mutation
    limits: Limits
    max_cardinality: int


def _run_job(job: _Job) -> tuple[TrialResult, ...]:
    return tuple(run_trial(job.entry, job.mutant, job.mutation, model, job.limits, job.max_cardinality)
                 for model in MODELS)


@dataclass(frozen=True)
class Rates:
    trials: int
    detected: int
    localized: int
    diagnoses_when_detected: int

    @property
    def detection_rate(self) -> float:
        return self.detected / self.trials if self.trials else 0.0

    @property
    def localization_rate(self) -> float:
        return self.localized / self.trials if self.trials else 0.0

    @property
    def mean_diagnosis_count(self) -> float:
        return self.diagnoses_when_detected / self.detected if self.detected else 0.0

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "detected": self.detected,
            "localized": self.localized,
            "detection_rate": round(self.detection_rate, 6),
            "localization_rate": round(self.localization_rate, 6),
            "mean_diagnosis_count": round(self.mean_diagnosis_count, 6),
        }


def _rates(trials: Iterable[TrialResult]) -> Rates:
    trials = list(trials)
    return Rates(
        len(trials),
        sum(t.detected for t in trials),
        sum(t.localized for t in trials),
        sum(t.diagnosis_count for t in trials),
    )


@dataclass
class BenchmarkReport:
    trials: list[TrialResult]
    skipped: list[dict] = field(default_factory=list)

    def by(self, model: str, *, kind: MutationKind | None = None, side: str | None = None) -> Rates:
        return _rates(
            t for t in self.trials
            if t.model == model
            and (kind is None or t.mutation.kind is kind)
            and (side is None or t.fault_side == side)
        )

    @property
    def mutants(self) -> int:
        return len(self.trials) // len(MODELS)

    def equivalent_mutants(self) -> list[tuple[str, Mutation]]:
        """Mutants that neither model flags; counted as undetected, never as misses."""
        flagged: dict[tuple, bool] = {}
        for t in self.trials:
            key = (t.entry, t.mutation)
            flagged[key] = flagged.get(key, False) or t.detected
        return [key for key, hit in flagged.items() if not hit]

    def consistent(self) -> bool:
        return all(t.detected or not t.localized for t in self.trials)

    def lhs_claim_verdict(self) -> dict:
        """Measure the claim that only the value model finds left-hand-side faults."""
        val_lhs, dep_lhs = self.by("value", side="LHS"), self.by("dep", side="LHS")
        dep_rhs = _rates(t for t in self.trials if t.model == "dep" and t.fault_side != "LHS")
        if not val_lhs.trials:
            verdict = "untested"
        elif (dep_lhs.localized == 0 and dep_rhs.localized > 0 and val_lhs.localized > 0):
            verdict = "confirmed"
        else:
            verdict = "refuted"
        return {
            "claim": "dependence model localizes only right-hand-side faults; value model both sides",
            "value_lhs_localization_rate": round(val_lhs.localization_rate, 6),
            "dep_lhs_localization_rate": round(dep_lhs.localization_rate, 6),
            "dep_rhs_localization_rate": round(dep_rhs.localization_rate, 6),
            "value_lhs_detection_rate": round(val_lhs.detection_rate, 6),
            "dep_lhs_detection_rate": round(dep_lhs.detection_rate, 6),
            "verdict": verdict,
        }

    def to_dict(self) -> dict:
        per_kind = []
        for model in MODELS:
            for kind in ALL_KINDS:
                rates = self.by(model, kind=kind)
                if rates.trials:
                    per_kind.append({"model": model, "kind": kind.value, **rates.to_dict()})
        per_side = []
        for model in MODELS:
            for side in ("LHS", "RHS", "Operator", "Const"):
                rates = self.by(model, side=side)
                if rates.trials:
                    per_side.append({"model": model, "side": side, **rates.to_dict()})
        return {
            "version": __version__,
            "mutants": self.mutants,
            "trials": len(self.trials),
            "equivalent_mutants": len(self.equivalent_mutants()),
            "skipped": self.skipped,
            "per_kind": per_kind,
            "per_side": per_side,
            "overall": {m: self.by(m).to_dict() for m in MODELS},
            "lhs_claim": self.lhs_claim_verdict(),
            "internally_consistent": self.consistent(),
            "details": [t.to_dict() for t in self.trials],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def table(self) -> str:
        """Aligned text rendering with a side-by-side comparison of the two models."""
        lines = [f"mutants: {self.mutants}   equivalent (no model flags them): "
                 f"{len(self.equivalent_mutants())}   skipped: {len(self.skipped)}", ""]
        head = f"{'model':<6} {'kind':<9} {'trials':>6} {'detect':>7} {'localize':>9} {'mean #diag':>10}"
        lines += [head, "-" * len(head)]
        for model in MODELS:
            for kind in ALL_KINDS:
                r = self.by(model, kind=kind)
                if r.trials:
                    lines.append(f"{model:<6} {kind.value:<9} {r.trials:>6} {r.detection_rate:>7.2f} "
                                 f"{r.localization_rate:>9.2f} {r.mean_diagnosis_count:>10.2f}")
        v, d = self.by("value"), self.by("dep")
        vl, dl = self.by("value", side="LHS"), self.by("dep", side="LHS")
        vr = _rates(t for t in self.trials if t.model == "value" and t.fault_side != "LHS")
        dr = _rates(t for t in self.trials if t.model == "dep" and t.fault_side != "LHS")
        verdict = self.lhs_claim_verdict()["verdict"]
        rows = [
            ("", "value-based", "dependence-based"),
            ("statements", "assignments, if, while", "assignments, if, while"),
            ("LHS faults detected", f"{vl.detection_rate:.2f}", f"{dl.detection_rate:.2f}"),
            ("LHS faults localized", f"{vl.localization_rate:.2f}", f"{dl.localization_rate:.2f}"),
            ("RHS faults detected", f"{vr.detection_rate:.2f}", f"{dr.detection_rate:.2f}"),
            ("RHS faults localized", f"{vr.localization_rate:.2f}", f"{dr.localization_rate:.2f}"),
            ("specification", "expected output values", "variable dependences"),
            ("diagnosis", "hitting-set tree", "hitting-set tree"),
            ("overall localized", f"{v.localization_rate:.2f}", f"{d.localization_rate:.2f}"),
        ]
        w0 = max(len(r[0]) for r in rows)
        w1 = max(len(r[1]) for r in rows)
        lines += ["", "side-by-side"]
        for a, b, c in rows:
            lines.append(f"  {a:<{w0}}  {b:<{w1}}  {c}")
        lines += ["", f"claim 'dependence model finds only RHS faults': {verdict}"]
        return "\n".join(lines) + "\n"


def _runaway(program: Program, tests: Iterable[TestCase], limits: Limits) -> str:
    """Why ``program`` blows an evaluation limit on some test, or ``""``."""
    for test in tests:
        try:
            run(program, test.inputs, limits)
        except LoopLimitExceeded:
            return "mutant exceeds loop limit"
        except IntegerOverflow:
            return "mutant exceeds integer limit"
        except MiniLangError:
            pass  # a crash is a failure the models may still explain
    return ""


def run_benchmark(
    corpus: Sequence[CorpusEntry],
    seeds: Sequence[int],
    kinds: Sequence[MutationKind] = ALL_KINDS,
    *,
    limits: Limits = Limits(),
    max_cardinality: int = DEFAULT_MAX_CARDINALITY,
    jobs: int = 1,
) -> BenchmarkReport:
    """Mutate every entry once per (kind, seed) and diagnose each mutant with both models.

    Mutants that exceed the loop or integer limit on a bundled test are
    skipped and listed in the report rather than diagnosed.
    """
    for entry in corpus:
        entry.check_consistent(limits)
    work: list[_Job] = []
    skipped: list[dict] = []
    for entry in corpus:
        for kind in kinds:
            kind = MutationKind(kind)
            for seed in seeds:
                try:
                    mutant, mutation = inject_mutation(entry.program, seed, kind)
                except NotApplicable:
                    skipped.append({"entry": entry.name, "kind": kind.value, "seed": seed,
                                    "reason": "not applicable"})
                    continue
                reason = _runaway(mutant, entry.tests, limits)
                if reason:
                    skipped.append({"entry": entry.name, "kind": kind.value, "seed": seed,
                                    "reason": reason})
                    continue
                work.append(_Job(entry, mutant, mutation, limits, max_cardinality))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_job, work, chunksize=4))
    else:
        results = [_run_job(job) for job in work]
    trials = [t for group in results for t in group]
    return BenchmarkReport(trials, skipped)


# ---------------------------------------------------------------------------
# Random programs (fuzzing and oracle-agreement checks)


def random_program(rng: random.Random, max_statements: int = 8, n_inputs: int = 3) -> Program:
    """A well-formed random program with at most ``max_statements`` statements.

    Loops always have the shape ``k := 0; while (k < N) { ...; k := k + 1; }``
    with a dedicated counter, so the unmutated program terminates.
    """
    from .minilang import renumber

    inputs = tuple(f"x{i}" for i in range(n_inputs))
    ops = ("+", "-", "*", "+", "-")
    fresh = iter(f"v{i}" for i in range(1000))
    counters = iter(f"k{i}" for i in range(1000))

    def expr(names: Sequence[str], depth: int = 0) -> Expr:
        roll = rng.random()
        if depth >= 2 or roll < 0.3:
            if rng.random() < 0.25:
                return Const(rng.randint(0, 5))
            return Var(rng.choice(sorted(names)))
        return Binary(rng.choice(ops), expr(names, depth + 1), expr(names, depth + 1))

    def cond(names: Sequence[str]) -> Expr:
        return Binary(rng.choice(RELATIONAL_OPS), Var(rng.choice(sorted(names))), expr(names, 1))

    def block(budget: int, names: frozenset[str], depth: int) -> tuple[list[Stmt], frozenset[str], int]:
        body: list[Stmt] = []
        used = 0
        while used < budget:
            roll = rng.random()
            if depth < 2 and budget - used >= 3 and roll < 0.2:
                inner_budget = rng.randint(1, min(2, budget - used - 2))
                then_body, t_names, t_used = block(inner_budget, names, depth + 1)
                else_body, e_names, e_used = block(rng.randint(0, min(2, budget - used - 1 - t_used)),
                                                   names, depth + 1)
                body.append(If(0, cond(sorted(names)), tuple(then_body), tuple(else_body)))
                used += 1 + t_used + e_used
                names = t_names & e_names if else_body else names
            elif depth < 2 and budget - used >= 4 and roll < 0.35:
                k = next(counters)
                body.append(Assign(0, k, Const(0)))
                inner_budget = rng.randint(1, min(2, budget - used - 3))
                loop_names = names | {k}
                inner, _, i_used = block(inner_budget, loop_names, depth + 1)
                inner.append(Assign(0, k, Binary("+", Var(k), Const(1))))
                body.append(While(0, Binary("<", Var(k), Const(rng.randint(1, 3))), tuple(inner)))
                used += 3 + i_used
                names = loop_names
            else:
                pool = sorted(n for n in names if not n.startswith("k"))
                if rng.random() < 0.5 or not pool:
                    target = next(fresh)
                else:
                    target = rng.choice(pool)
                body.append(Assign(0, target, expr(sorted(names))))
                names = names | {target}
                used += 1
        return body, names, used

    body, names, _ = block(rng.randint(2, max_statements), frozenset(inputs), 0)
    numbered, _ = renumber(tuple(body))
    assigned = sorted(n for n in names - set(inputs) if not n.startswith("k"))
    outputs = tuple(assigned[-2:]) if assigned else inputs[:1]
    program = Program(inputs, outputs, numbered)
    check(program)
    return program


def entry_from_program(name: str, program: Program, input_rows: Iterable[dict],
                       limits: Limits = Limits()) -> CorpusEntry:
    """Build a self-consistent corpus entry: expectations from running ``program``."""
    tests = []
    for i, inputs in enumerate(input_rows):
        result = run(program, inputs, limits)
        tests.append(TestCase(dict(inputs), {v: result[v] for v in program.outputs}, f"{name}#{i}"))
    spec = compute_dependences(program, Granularity.LOCAL)
    return CorpusEntry(name, program, tuple(tests), DependenceSet(spec.pairs))
