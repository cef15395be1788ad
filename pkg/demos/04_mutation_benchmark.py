"""
Comparing the two models on injected faults
===========================================

Each bundled program is mutated once per fault kind and seed, and both
models try to find the mutated statement.  Left-hand-side faults (writing
the wrong variable) are where the models differ most.
"""

import warnings

from mbdebug.errors import NotApplicable
from mbdebug.faultlab import MutationKind, bundled_corpus, inject_mutation, run_benchmark

warnings.simplefilter("ignore", RuntimeWarning)

corpus = bundled_corpus()
entry = corpus[0]
for kind in MutationKind:
    try:
        _, mutation = inject_mutation(entry.program, 0, kind)
    except NotApplicable as exc:
        print(f"{kind.value}: {exc}")
        continue
    print(mutation.describe())

report = run_benchmark(corpus, range(4))
print()
print(report.table())

# which left-hand-side mutants escape the value model?
for t in report.trials:
    if t.model == "value" and t.fault_side == "LHS" and t.detected and not t.localized:
        print(f"{t.entry}: {t.mutation.describe()}  diagnoses={list(t.diagnoses)} {t.error}")
