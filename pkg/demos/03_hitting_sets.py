"""
Conflicts and minimal hitting sets
==================================

A diagnosis must contain at least one member of every conflict.  The
hitting-set tree finds the smallest such sets and asks the model for new
conflicts only when it needs them.
"""

from mbdebug import brute_force_diagnose, diagnose, minimal_hitting_sets

print(minimal_hitting_sets([{1, 2}, {2, 3}]))
print(minimal_hitting_sets([]))  # nothing to explain: the empty diagnosis

# an oracle that knows three conflicts and hands out the first one left open
family = [frozenset({1, 2, 5}), frozenset({2, 4}), frozenset({3, 5})]


def oracle(assumptions):
    return next((c for c in family if not c & assumptions), None)


report = diagnose(oracle, range(1, 6))
print("diagnoses:", report.as_lists())
print("oracle calls:", report.oracle_calls)

# the exhaustive reference agrees but asks far more often
calls = 0


def counting(assumptions):
    global calls
    calls += 1
    return oracle(assumptions)


print("brute force:", [sorted(d) for d in brute_force_diagnose(counting, range(1, 6))], "calls:", calls)
