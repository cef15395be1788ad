"""
Locating a fault from a wrong output value
==========================================

A three-line program adds instead of using ``b`` in its last statement.
One test case with a known expected output is enough to narrow the fault
down to two candidate statements.
"""

from mbdebug import TestCase, diagnose, evaluate_partial, parse, run, value_oracle
from mbdebug.minilang import header, roman

program = parse("""
input a, b;
output c;
a := a + 2;
b := b + a;
c := a + a;
""")

# the program runs fine, it just computes the wrong number
print("run:", run(program, {"a": 2, "b": 2}))

# every value remembers which statements produced it
test = TestCase({"a": 2, "b": 2}, {"c": 10})
for name, value in evaluate_partial(program, test).items():
    print(f"  {name} = {value}")

# assuming a statement abnormal turns its target unknown; an unknown output
# can no longer contradict the test
print("statement III abnormal:", evaluate_partial(program, test, {3})["c"])

report = diagnose(value_oracle(program, [test]), program.assignment_ids())
print("conflicts:", [sorted(c) for c in report.conflicts_used])
for d in report.diagnoses:
    for sid in sorted(d):
        stmt = program.statement(sid)
        print(f"  diagnosis {{{roman(sid)}}}  line {stmt.line}: {header(stmt)}")

# more tests would not separate the two: on every input, c is computed from
# statements I and III, so each failing test yields the same conflict
