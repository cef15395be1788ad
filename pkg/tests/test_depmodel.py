import itertools
import logging
import random

import pytest

from mbdebug.depmodel import (
    DependenceSet, Granularity, compare_dependences, compute_dependences, dep_conflicts, dep_oracle,
    format_deps, global_analysis, parse_deps,
)
from mbdebug.errors import InexplicableMismatch, MiniLangError
from mbdebug.faultlab import bundled_corpus, random_program
from mbdebug.minilang import parse, run

from conftest import DEP_BUGGY, DEP_CORRECT, LOOP

LOCAL, GLOBAL = Granularity.LOCAL, Granularity.GLOBAL


def ds(*pairs):
    return DependenceSet.from_pairs(pairs)


class TestCompute:
    def test_local_dependence_example(self, dep_prog):
        deps = compute_dependences(dep_prog, LOCAL)
        assert deps.pairs == {("a", "b"), ("b", "c"), ("c", "a"), ("c", "c")}
        assert deps.provenance == {
            ("a", "b"): {1}, ("b", "c"): {2}, ("c", "a"): {3}, ("c", "c"): {3},
        }

    @pytest.mark.parametrize("g", [LOCAL, GLOBAL])
    def test_empty_program(self, g):
        assert compute_dependences(parse("input a; output a;"), g).pairs == frozenset()

    def test_global_loop(self):
        # s := 0 and i := 0 contribute nothing; the loop condition adds n
        deps = compute_dependences(parse(LOOP), GLOBAL)
        assert deps.pairs == {("s", "n"), ("i", "n")}

    def test_local_loop_includes_control(self):
        deps = compute_dependences(parse(LOOP), LOCAL)
        assert deps.pairs == {("s", "s"), ("s", "i"), ("s", "n"), ("i", "i"), ("i", "n")}

    def test_global_is_transitive(self):
        deps = compute_dependences(parse(DEP_CORRECT), GLOBAL)
        # a <- b, b <- c, c <- a + b = initial b + initial c
        assert deps.pairs == {("a", "b"), ("b", "c"), ("c", "b"), ("c", "c")}

    def test_abnormal_is_top(self, dep_prog):
        deps = compute_dependences(dep_prog, LOCAL, {3})
        assert deps.top == {"c"}
        assert ("c", "c") not in deps.pairs

    def test_global_top_propagates(self):
        deps = compute_dependences(parse(DEP_CORRECT), GLOBAL, {1})
        assert deps.top == {"a", "c"}
        assert deps.pairs == {("b", "c")}

    def test_unknown_assumption(self, dep_prog):
        with pytest.raises(ValueError):
            compute_dependences(dep_prog, LOCAL, {9})

    def test_conditions_are_not_components(self):
        p = parse("input n; output s; if (n > 0) { s := 1; } else { s := 2; }")
        with pytest.raises(ValueError):
            compute_dependences(p, LOCAL, {1})

    def test_local_provenance_is_defining_statement(self):
        for seed in range(60):
            p = random_program(random.Random(seed))
            deps = compute_dependences(p, LOCAL)
            for (target, _), prov in deps.provenance.items():
                assert prov and prov <= p.definers(target)
                # singleton whenever the target has a single definition
                if len(p.definers(target)) == 1:
                    assert len(prov) == 1


class TestGlobalAgainstExecution:
    def test_observed_dependences_are_reported(self):
        """Perturbing one input and seeing an output change must be predicted."""
        for seed in range(80):
            rng = random.Random(seed)
            p = random_program(rng)
            deps = compute_dependences(p, GLOBAL)
            for _ in range(6):
                base = {v: rng.randint(-4, 6) for v in p.inputs}
                try:
                    ref = run(p, base)
                except MiniLangError:
                    continue
                for src in p.inputs:
                    changed = dict(base, **{src: base[src] + rng.randint(1, 5)})
                    try:
                        out = run(p, changed)
                    except MiniLangError:
                        continue
                    for var in p.assigned_variables():
                        if var in ref and var in out and ref[var] != out[var]:
                            assert (var, src) in deps.pairs, (seed, var, src)

    def test_fixpoint_iteration_bound(self):
        programs = [e.program for e in bundled_corpus()]
        programs += [random_program(random.Random(s)) for s in range(100)]
        programs.append(parse(LOOP))
        for p in programs:
            bound = len(p.variables()) ** 2
            for count in global_analysis(p).loop_iterations.values():
                assert 1 <= count <= bound


class TestCompare:
    def test_dependence_example(self, dep_prog, dep_spec):
        diff = compare_dependences(compute_dependences(dep_prog), dep_spec)
        assert diff.missing == {("c", "b")}
        assert diff.spurious == {("c", "c")}

    def test_identity(self, dep_prog):
        deps = compute_dependences(dep_prog)
        assert compare_dependences(deps, deps).consistent

    def test_top_absorbs(self):
        computed = DependenceSet(frozenset(), {}, frozenset({"c"}))
        diff = compare_dependences(computed, ds(("c", "b")))
        assert diff.missing == frozenset() and diff.consistent


class TestConflicts:
    def test_dependence_example(self, dep_prog, dep_spec):
        assert dep_conflicts(dep_prog, dep_spec, LOCAL) == [{3}, {3}]

    def test_dependence_example_with_statement_three_abnormal(self, dep_prog, dep_spec):
        assert dep_conflicts(dep_prog, dep_spec, LOCAL, {3}) == []

    def test_missing_pair_blames_all_definers(self):
        p = parse("input a, b; output x; x := a; x := x + 1;")
        spec = ds(("x", "a"), ("x", "x"), ("x", "b"))
        assert dep_conflicts(p, spec) == [{1, 2}]

    def test_inexplicable(self):
        p = parse("input a; output b; b := a;")
        with pytest.raises(InexplicableMismatch):
            dep_conflicts(p, ds(("b", "a"), ("z", "a")))

    @pytest.mark.parametrize("g", [LOCAL, GLOBAL])
    def test_self_consistency(self, g):
        for seed in range(80):
            p = random_program(random.Random(seed))
            spec = DependenceSet(compute_dependences(p, g).pairs)
            assert dep_conflicts(p, spec, g) == []

    @pytest.mark.parametrize("g", [LOCAL, GLOBAL])
    def test_abnormal_ids_never_blamed(self, g):
        for seed in range(40):
            rng = random.Random(seed)
            p = random_program(rng)
            q = random_program(random.Random(seed + 1000))
            spec = DependenceSet(compute_dependences(q, g).pairs | compute_dependences(p, g).pairs)
            ids = sorted(p.assignment_ids())
            for k in range(3):
                for assumed in itertools.combinations(ids, k):
                    try:
                        conflicts = dep_conflicts(p, spec, g, assumed)
                    except InexplicableMismatch:
                        continue
                    for c in conflicts:
                        assert c and not (c & set(assumed))

    @pytest.mark.parametrize("g", [LOCAL, GLOBAL])
    def test_consistency_is_monotone(self, g):
        """Adding an assumption to a consistent set keeps it consistent."""
        for seed in range(40):
            rng = random.Random(seed)
            p = random_program(rng, 6)
            spec = DependenceSet(compute_dependences(random_program(rng, 6), g).pairs)
            oracle = dep_oracle(p, spec, g)
            ids = sorted(p.assignment_ids())
            for k in range(len(ids) + 1):
                for assumed in itertools.combinations(ids, k):
                    try:
                        if oracle(frozenset(assumed)) is not None:
                            continue
                    except InexplicableMismatch:
                        continue
                    for extra in ids:
                        assert oracle(frozenset(assumed) | {extra}) is None

    @pytest.mark.parametrize("g", [LOCAL, GLOBAL])
    def test_conflicts_are_sound(self, g):
        """Any assumption set disjoint from a returned conflict keeps a discrepancy."""
        for seed in range(40):
            rng = random.Random(seed)
            p = random_program(rng, 6)
            spec = DependenceSet(compute_dependences(random_program(rng, 6), g).pairs)
            ids = sorted(p.assignment_ids())
            try:
                conflicts = dep_conflicts(p, spec, g)
            except InexplicableMismatch:
                continue
            for c in conflicts:
                rest = [i for i in ids if i not in c]
                for k in range(len(rest) + 1):
                    for assumed in itertools.combinations(rest, k):
                        try:
                            assert dep_conflicts(p, spec, g, assumed)
                        except InexplicableMismatch:
                            pass


class TestDepsFile:
    def test_parse(self):
        text = "# spec\n\nc <- a, b  # comment\nname.last <- person.last\n"
        assert parse_deps(text).pairs == {("c", "a"), ("c", "b"), ("name.last", "person.last")}

    def test_duplicates_warn(self, caplog):
        # a garbled specification may list a pair twice
        with caplog.at_level(logging.WARNING):
            deps = parse_deps("a <- b, b, c\nb <- c\n")
        assert deps.pairs == {("a", "b"), ("a", "c"), ("b", "c")}
        assert "duplicate" in caplog.text

    def test_round_trip(self, dep_prog):
        deps = compute_dependences(dep_prog)
        assert parse_deps(format_deps(deps)).pairs == deps.pairs

    def test_bad_line(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_deps("a b c\n")
