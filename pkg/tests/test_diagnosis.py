import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbdebug.depmodel import dep_oracle
from mbdebug.diagnosis import (
    brute_force_diagnose, canonical, diagnose, format_diagnoses, minimal_hitting_sets,
    minimize_conflict, parse_conflicts,
)
from mbdebug.errors import InexplicableMismatch, MBDebugError, OracleError, TooManyComponents
from mbdebug.valuemodel import value_oracle


def reference_mhs(conflicts, universe, max_card):
    """Plain enumeration: every subset that hits all conflicts and has no hitting proper subset."""
    hitting = [
        frozenset(c)
        for k in range(max_card + 1)
        for c in itertools.combinations(sorted(universe), k)
        if all(set(c) & conflict for conflict in conflicts)
    ]
    return canonical(h for h in hitting if not any(o < h for o in hitting))


def family_oracle(family):
    def oracle(assumptions):
        return next((c for c in family if not c & assumptions), None)
    return oracle


def random_family(rng, n=8):
    return [frozenset(rng.sample(range(1, n + 1), rng.randint(1, 4))) for _ in range(rng.randint(1, 6))]


class TestHittingSets:
    def test_examples(self):
        assert minimal_hitting_sets([{1, 2}, {2, 3}]) == [{2}, {1, 3}]
        assert minimal_hitting_sets([]) == [frozenset()]

    def test_cardinality_bound(self):
        family = [{1}, {2}, {3}, {4}]
        assert minimal_hitting_sets(family, 3) == []
        assert minimal_hitting_sets(family, 4) == [{1, 2, 3, 4}]

    def test_rejects_empty_conflict(self):
        with pytest.raises(ValueError):
            minimal_hitting_sets([{1}, set()])

    def test_matches_enumeration_on_random_families(self):
        rng = random.Random(11)
        for _ in range(60):
            family = random_family(rng)
            for card in (1, 2, 3):
                assert minimal_hitting_sets(family, card) == reference_mhs(family, range(1, 9), card)

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.frozensets(st.integers(1, 7), min_size=1, max_size=4), max_size=6))
    def test_hitting_and_minimal(self, family):
        for h in minimal_hitting_sets(family, 7):
            assert all(h & c for c in family)
            for m in h:
                assert not all((h - {m}) & c for c in family)


class TestDiagnose:
    def test_value_example(self, value_prog, value_test):
        report = diagnose(value_oracle(value_prog, [value_test]), value_prog.assignment_ids())
        assert report.diagnoses == [{1}, {3}]
        assert report.conflicts_used == [{1, 3}]

    def test_dependence_example(self, dep_prog, dep_spec):
        report = diagnose(dep_oracle(dep_prog, dep_spec), dep_prog.assignment_ids())
        assert report.diagnoses == [{3}]

    def test_consistent(self):
        report = diagnose(lambda a: None, {1, 2, 3})
        assert report.diagnoses == [frozenset()] and report.oracle_calls == 1

    def test_zero_cardinality(self):
        assert diagnose(lambda a: None, {1}, 0).diagnoses == [frozenset()]
        assert diagnose(family_oracle([frozenset({1})]), {1}, 0).diagnoses == []

    def test_matches_brute_force_and_enumeration(self):
        rng = random.Random(5)
        for _ in range(60):
            family = random_family(rng)
            oracle = family_oracle(family)
            expected = reference_mhs(family, range(1, 9), 3)
            assert diagnose(oracle, range(1, 9)).diagnoses == expected
            assert brute_force_diagnose(oracle, range(1, 9)) == expected

    def test_deterministic(self):
        rng = random.Random(8)
        family = random_family(rng)
        first = diagnose(family_oracle(family), range(1, 9))
        again = diagnose(family_oracle(family), range(1, 9))
        assert first == again

    def test_oracle_error_carries_assumptions(self):
        def oracle(assumptions):
            if assumptions == {2}:
                raise InexplicableMismatch("boom")
            return None if 1 in assumptions else frozenset({1, 2}) - assumptions
        with pytest.raises(OracleError) as info:
            diagnose(oracle, {1, 2})
        assert info.value.assumptions == {2}
        assert isinstance(info.value.cause, InexplicableMismatch)

    def test_misbehaving_oracle(self):
        with pytest.raises(MBDebugError, match="overlapping"):
            diagnose(lambda a: frozenset({1}), {1, 2})
        with pytest.raises(MBDebugError, match="unknown"):
            diagnose(lambda a: frozenset({9}), {1, 2})

    def test_brute_force_cap(self):
        with pytest.raises(TooManyComponents):
            brute_force_diagnose(lambda a: None, range(21))

    def test_minimize(self):
        # the oracle reports a padded conflict; the real one is {2, 3}
        def oracle(assumptions):
            if assumptions & {2, 3}:
                return None
            return frozenset({1, 2, 3, 4}) - assumptions
        plain = diagnose(oracle, {1, 2, 3, 4})
        small = diagnose(oracle, {1, 2, 3, 4}, minimize=True)
        assert plain.diagnoses == [{2}, {3}]
        assert small.diagnoses == [{2}, {3}]
        assert small.conflicts_used == [{2, 3}]
        assert small.oracle_calls > plain.oracle_calls

    def test_minimize_conflict(self):
        oracle = family_oracle([frozenset({2, 5})])
        assert minimize_conflict(oracle, frozenset({1, 2, 5, 7}), range(1, 9)) == {2, 5}


class TestFiles:
    def test_parse(self):
        text = "# conflicts\n1 2\n\n2 3  # second\n"
        assert parse_conflicts(text) == [{1, 2}, {2, 3}]

    def test_parse_error(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_conflicts("1 x\n")

    def test_format(self):
        assert format_diagnoses([{2}, {3, 1}]) == "2\n1 3\n"


def test_docstring_examples():
    import doctest

    import mbdebug.diagnosis

    assert doctest.testmod(mbdebug.diagnosis).failed == 0
