"""
Locating a fault from a dependence specification
================================================

No expected values are needed when the intended data flow is known.  The
specification says ``c`` should depend on ``a`` and ``b``; the program makes
it depend on ``a`` and ``c``.
"""

from mbdebug import DependenceSet, Granularity, compare_dependences, compute_dependences
from mbdebug import diagnose, dep_oracle, parse
from mbdebug.depmodel import dep_conflicts, format_deps

correct = parse("input b, c; output a, b, c; a := b; b := c; c := a + b;")
buggy = parse("input b, c; output a, b, c; a := b; b := c; c := a + c;")

spec = DependenceSet(compute_dependences(correct).pairs)
print("specification:")
print(format_deps(spec))

computed = compute_dependences(buggy)
diff = compare_dependences(computed, spec)
print("missing:", sorted(diff.missing), "spurious:", sorted(diff.spurious))
print("conflicts:", [sorted(c) for c in dep_conflicts(buggy, spec)])

report = diagnose(dep_oracle(buggy, spec), buggy.assignment_ids())
print("diagnoses:", report.as_lists())

# %%
# Global granularity follows values end to end, through loops
# ------------------------------------------------------------

loop = parse("""
input n;
output s;
s := 0;
i := 0;
while (i < n) {
    s := s + i;
    i := i + 1;
}
""")
print("local: ", sorted(compute_dependences(loop, Granularity.LOCAL).pairs))
print("global:", sorted(compute_dependences(loop, Granularity.GLOBAL).pairs))
