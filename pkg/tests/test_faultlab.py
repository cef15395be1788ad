import random
from pathlib import Path

import pytest

from mbdebug.errors import CorpusInconsistent, NotApplicable
from mbdebug.faultlab import (
    ALL_KINDS, CORPUS_DIR, MutationKind, apply_mutation, bundled_corpus, entry_from_program,
    inject_mutation, load_manifest, mutation_sites, random_program, run_benchmark, run_trial,
)
from mbdebug.minilang import Limits, check, parse
from mbdebug.valuemodel import TestCase

from conftest import DEP_BUGGY, DEP_CORRECT, VALUE_BUGGY, VALUE_CORRECT


@pytest.fixture(scope="module")
def corpus():
    return bundled_corpus()


@pytest.fixture(scope="module")
def small_report(corpus):
    return run_benchmark(corpus, [0, 1])


class TestMutation:
    def test_value_example_is_a_rhs_mutant(self):
        mutant, m = apply_mutation(parse(VALUE_CORRECT), 3, MutationKind.RHS_VAR, "b", "a")
        assert mutant == parse(VALUE_BUGGY)
        assert m.fault_side == "RHS" and m.statement_id == 3

    def test_dependence_example_is_a_rhs_mutant(self):
        mutant, _ = apply_mutation(parse(DEP_CORRECT), 3, MutationKind.RHS_VAR, "b", "c")
        assert mutant == parse(DEP_BUGGY)

    def test_some_seed_reproduces_the_example(self):
        target = parse(DEP_BUGGY)
        hits = [s for s in range(50)
                if inject_mutation(parse(DEP_CORRECT), s, MutationKind.RHS_VAR)[0] == target]
        assert hits

    def test_no_variable_to_swap(self):
        with pytest.raises(NotApplicable):
            inject_mutation(parse("output x; x := 1;"), 0, MutationKind.RHS_VAR)

    def test_deterministic(self):
        p = parse(VALUE_CORRECT)
        for kind in ALL_KINDS:
            assert inject_mutation(p, 3, kind) == inject_mutation(p, 3, kind)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_single_statement_and_well_formed(self, kind, corpus):
        for entry in corpus:
            for mutant, m in mutation_sites(entry.program, kind):
                check(mutant)
                changed = [a.id for a, b in zip(entry.program.assignments(), mutant.assignments()) if a != b]
                assert changed == [m.statement_id]

    def test_operator_stays_in_group(self):
        sites = mutation_sites(parse("input a, b; output c; c := a < b;"), MutationKind.OPERATOR)
        assert {m.after for _, m in sites} == {"<=", ">", ">=", "==", "!="}

    def test_const_perturbation(self):
        sites = mutation_sites(parse("input a; output c; c := a + 1;"), MutationKind.CONST)
        assert [m.after for _, m in sites] == ["2", "0"]

    def test_lhs_rejects_unassigned_output(self):
        # renaming the only writer of c would leave the output unassigned
        assert mutation_sites(parse("input a; output c; c := a;"), MutationKind.LHS_VAR) == []


class TestCorpus:
    def test_bundled_corpus_is_consistent(self, corpus):
        assert len(corpus) == 10
        for entry in corpus:
            entry.check_consistent()

    def test_example_programs_shipped(self):
        shipped = CORPUS_DIR / "examples"
        assert parse(VALUE_BUGGY) == parse((shipped / "value_example.mini").read_text())
        assert parse(DEP_CORRECT) == parse((shipped / "dependence_example_correct.mini").read_text())

    def test_inconsistent_entry(self, corpus):
        entry = corpus[0]
        bad = TestCase(dict(entry.tests[0].inputs), {k: v + 1 for k, v in entry.tests[0].expected.items()})
        broken = type(entry)(entry.name, entry.program, (bad,), entry.spec)
        with pytest.raises(CorpusInconsistent):
            broken.check_consistent()
        with pytest.raises(CorpusInconsistent):
            run_benchmark([broken], [0])

    def test_manifest(self, tmp_path: Path):
        (tmp_path / "p.mini").write_text(VALUE_CORRECT)
        (tmp_path / "p.test").write_text("in a = 2\nin b = 2\nexpect c = 10\n")
        (tmp_path / "p.deps").write_text("a <- a\nb <- b, a\nc <- a, b\n")
        (tmp_path / "m.txt").write_text("# x\np.mini p.test p.deps\n")
        [entry] = load_manifest(tmp_path / "m.txt")
        entry.check_consistent()
        (tmp_path / "m.txt").write_text("p.mini p.deps\n")
        with pytest.raises(ValueError):
            load_manifest(tmp_path / "m.txt")


class TestBenchmark:
    def test_localized_implies_detected(self, small_report):
        assert small_report.consistent()
        assert all(t.detected for t in small_report.trials if t.localized)

    def test_both_models_per_mutant(self, small_report):
        assert len(small_report.trials) == 2 * small_report.mutants
        assert {t.model for t in small_report.trials} == {"value", "dep"}

    def test_equivalent_mutants_are_undetected_by_both(self, small_report):
        flagged = {(t.entry, t.mutation) for t in small_report.trials if t.detected}
        for key in small_report.equivalent_mutants():
            assert key not in flagged

    def test_reproducible(self, corpus):
        a = run_benchmark(corpus, [0, 1]).to_json()
        b = run_benchmark(corpus, [0, 1]).to_json()
        assert a == b

    def test_parallel_matches_serial(self, corpus, small_report):
        assert run_benchmark(corpus, [0, 1], jobs=2).to_json() == small_report.to_json()

    def test_report_shape(self, small_report):
        doc = small_report.to_dict()
        assert doc["internally_consistent"] is True
        assert doc["lhs_claim"]["verdict"] in {"confirmed", "refuted", "untested"}
        sides = {(r["model"], r["side"]) for r in doc["per_side"]}
        assert ("value", "LHS") in sides and ("dep", "RHS") in sides
        assert "side-by-side" in small_report.table()

    def test_value_model_localizes_rhs_faults(self, small_report):
        for trial in small_report.trials:
            if trial.model == "value" and trial.fault_side != "LHS" and trial.detected:
                assert trial.localized, trial.mutation.describe()

    def test_run_trial_reports_oracle_errors(self, corpus):
        power = next(e for e in corpus if e.name == "power")
        mutant, m = apply_mutation(power.program, 5, MutationKind.RHS_VAR, "k", "b")
        trial = run_trial(power, mutant, m, "value", Limits(100))
        assert trial.detected and not trial.localized
        assert trial.error.startswith("LoopLimitExceeded")

    def test_skips_non_terminating_mutants(self):
        p = parse("input n; output s; s := 0; i := 0; while (i < n) { s := s + i; i := i + 1; }")
        entry = entry_from_program("loop", p, [{"n": 3}])
        report = run_benchmark([entry], range(6), [MutationKind.CONST], limits=Limits(50))
        reasons = {s["reason"] for s in report.skipped}
        assert reasons <= {"mutant exceeds loop limit", "mutant exceeds integer limit", "not applicable"}
        assert report.mutants + len(report.skipped) == 6


def test_random_programs_are_well_formed():
    for seed in range(200):
        p = random_program(random.Random(seed))
        check(p)
        assert 1 <= len(p.assignment_ids()) and len(p) <= 8 + 3
