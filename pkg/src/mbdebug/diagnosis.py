"""Consistency-based diagnosis with a hitting-set tree.

An *oracle* maps a set of statements assumed abnormal to a conflict (a
nonempty frozenset of statement ids that cannot all be normal) or to ``None``
when the assumptions are consistent with the observations.

:func:`diagnose` grows Reiter's hitting-set tree breadth first, asking the
oracle for fresh conflicts on demand; :func:`brute_force_diagnose` enumerates
assumption sets directly and serves as the reference.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .errors import MBDebugError, OracleError, TooManyComponents

Conflict = frozenset
Oracle = Callable[[frozenset], Optional[frozenset]]

DEFAULT_MAX_CARDINALITY = 3
BRUTE_FORCE_CAP = 20


def canonical(sets: Iterable[Iterable[int]]) -> list[frozenset[int]]:
    """Deduplicate and sort by (cardinality, sorted members)."""
    unique = {frozenset(s) for s in sets}
    return sorted(unique, key=lambda s: (len(s), sorted(s)))


@dataclass
class DiagnosisReport:
    diagnoses: list[frozenset[int]]
    conflicts_used: list[frozenset[int]] = field(default_factory=list)
    oracle_calls: int = 0

    def as_lists(self) -> list[list[int]]:
        return [sorted(d) for d in self.diagnoses]


def _hs_tree(
    label: Callable[[frozenset[int]], Optional[frozenset[int]]],
    max_cardinality: int,
) -> tuple[list[frozenset[int]], list[frozenset[int]]]:
    """Breadth-first HS-tree.

    ``label(path)`` returns a conflict disjoint from ``path`` or None when the
    path is a hitting set.  Identical path sets are expanded once (node reuse),
    supersets of found diagnoses are closed, and known conflicts are reused
    before ``label`` is consulted.
    """
    conflicts: list[frozenset[int]] = []
    diagnoses: list[frozenset[int]] = []
    level: list[frozenset[int]] = [frozenset()]
    while level:
        next_level: dict[frozenset[int], None] = {}
        for path in level:
            if any(d <= path for d in diagnoses):
                continue
            conflict = next((c for c in conflicts if not c & path), None)
            if conflict is None:
                conflict = label(path)
                if conflict is None:
                    diagnoses.append(path)
                    continue
                if conflict & path:
                    raise MBDebugError(
                        f"oracle returned conflict {sorted(conflict)} overlapping its "
                        f"assumptions {sorted(path)}"
                    )
                if not conflict:
                    raise MBDebugError("oracle returned an empty conflict")
                conflicts.append(conflict)
            if len(path) >= max_cardinality:
                continue
            for member in sorted(conflict):
                next_level.setdefault(path | {member}, None)
        level = sorted(next_level, key=sorted)
    return canonical(diagnoses), conflicts


def minimal_hitting_sets(
    conflicts: Sequence[Iterable[int]], max_cardinality: int = DEFAULT_MAX_CARDINALITY
) -> list[frozenset[int]]:
    """Subset-minimal hitting sets of ``conflicts`` with at most ``max_cardinality`` members.

    >>> [sorted(h) for h in minimal_hitting_sets([{1, 2}, {2, 3}])]
    [[2], [1, 3]]
    >>> minimal_hitting_sets([])
    [frozenset()]
    """
    family = [frozenset(c) for c in conflicts]
    if any(not c for c in family):
        raise ValueError("conflicts must be nonempty")

    def label(path):
        return next((c for c in family if not c & path), None)

    return _hs_tree(label, max_cardinality)[0]


def _guarded(oracle: Oracle) -> Oracle:
    def call(assumptions):
        try:
            result = oracle(assumptions)
        except MBDebugError as exc:
            raise OracleError(assumptions, exc) from exc
        return frozenset(result) if result else None

    return call


def minimize_conflict(
    oracle: Oracle, conflict: frozenset[int], component_ids: Iterable[int]
) -> frozenset[int]:
    """Greedy deletion: drop each member whose removal still leaves a conflict.

    A candidate subset is tested by assuming every other component abnormal.
    """
    components = frozenset(component_ids)
    current = frozenset(conflict)
    for member in sorted(conflict):
        if member not in current:
            continue
        candidate = current - {member}
        if not candidate:
            continue
        result = oracle(components - candidate)
        if result is not None:
            current = frozenset(result) & candidate
    return current


def diagnose(
    oracle: Oracle,
    component_ids: Iterable[int],
    max_cardinality: int = DEFAULT_MAX_CARDINALITY,
    *,
    minimize: bool = False,
) -> DiagnosisReport:
    """Reiter's algorithm with conflicts generated on demand by ``oracle``.

    Oracle failures are re-raised as :class:`OracleError` carrying the
    assumption set that triggered them.
    """
    components = frozenset(component_ids)
    guarded = _guarded(oracle)
    calls = 0

    def label(path):
        nonlocal calls
        calls += 1
        conflict = guarded(path)
        if conflict is None:
            return None
        if not conflict <= components:
            raise MBDebugError(f"conflict {sorted(conflict)} names unknown components")
        if minimize:
            conflict = minimize_conflict(counted, conflict, components)
        return conflict

    def counted(assumptions):
        nonlocal calls
        calls += 1
        return guarded(assumptions)

    diagnoses, conflicts = _hs_tree(label, max_cardinality)
    return DiagnosisReport(diagnoses, conflicts, calls)


def brute_force_diagnose(
    oracle: Oracle,
    component_ids: Iterable[int],
    max_cardinality: int = DEFAULT_MAX_CARDINALITY,
) -> list[frozenset[int]]:
    """Reference enumeration of all minimal consistent assumption sets."""
    components = sorted(frozenset(component_ids))
    if len(components) > BRUTE_FORCE_CAP:
        raise TooManyComponents(
            f"{len(components)} components exceed the brute-force cap of {BRUTE_FORCE_CAP}"
        )
    guarded = _guarded(oracle)
    found: list[frozenset[int]] = []
    for size in range(0, min(max_cardinality, len(components)) + 1):
        for combo in itertools.combinations(components, size):
            candidate = frozenset(combo)
            if any(d <= candidate for d in found):
                continue
            if guarded(candidate) is None:
                found.append(candidate)
    return canonical(found)


def read_conflicts(path) -> list[frozenset[int]]:
    with open(path, encoding="utf-8") as fh:
        return parse_conflicts(fh.read())


def parse_conflicts(text: str) -> list[frozenset[int]]:
    """One conflict per line, space-separated integer ids; ``#`` comments."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            members = frozenset(int(tok) for tok in line.split())
        except ValueError:
            raise ValueError(f"line {lineno}: expected integers, got {raw!r}") from None
        out.append(members)
    return out


def format_diagnoses(diagnoses: Iterable[Iterable[int]]) -> str:
    return "".join(" ".join(str(m) for m in sorted(d)) + "\n" for d in diagnoses)
