"""Model-based fault localization for a small imperative language.

Two models locate faulty statements by consistency-based diagnosis:

* :mod:`mbdebug.valuemodel` compares computed output values with expected ones;
* :mod:`mbdebug.depmodel` compares computed variable dependences with a
  specification.

:mod:`mbdebug.diagnosis` turns the conflicts either model produces into
minimal diagnoses, and :mod:`mbdebug.faultlab` injects faults to compare them.
"""

__version__ = "0.1.0"

from .minilang import Limits, Program, parse, pretty, run  # noqa: E402
from .depmodel import (  # noqa: E402
    DependenceSet, Granularity, compare_dependences, compute_dependences, dep_conflicts, dep_oracle,
)
from .valuemodel import TestCase, evaluate_partial, value_conflict, value_oracle  # noqa: E402
from .diagnosis import (  # noqa: E402
    DiagnosisReport, brute_force_diagnose, diagnose, minimal_hitting_sets,
)

__all__ = [
    "Limits", "Program", "parse", "pretty", "run",
    "DependenceSet", "Granularity", "compare_dependences", "compute_dependences",
    "dep_conflicts", "dep_oracle",
    "TestCase", "evaluate_partial", "value_conflict", "value_oracle",
    "DiagnosisReport", "brute_force_diagnose", "diagnose", "minimal_hitting_sets",
]
