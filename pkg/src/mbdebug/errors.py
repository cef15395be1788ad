"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class MBDebugError(Exception):
    """Base class for every error raised by this package."""


class MiniLangError(MBDebugError):
    pass


class ParseError(MiniLangError):
    """Syntax error with a source position and the tokens that would have fit."""

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        detail = f"{line}:{column}: {message}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)


class SemanticError(MiniLangError):
    pass


class LoopLimitExceeded(MiniLangError):
    def __init__(self, statement_id: int, limit: int):
        self.statement_id = statement_id
        self.limit = limit
        super().__init__(f"while loop at statement {statement_id} exceeded {limit} iterations")


class DivisionByZero(MiniLangError):
    def __init__(self, statement_id: int | None):
        self.statement_id = statement_id
        super().__init__(f"division by zero in statement {statement_id}")


class IntegerOverflow(MiniLangError):
    def __init__(self, statement_id: int | None, bits: int):
        self.statement_id = statement_id
        self.bits = bits
        super().__init__(f"statement {statement_id}: result exceeds {bits} bits")


class InexplicableMismatch(MBDebugError):
    """A discrepancy that no normal statement can be blamed for."""

    def __init__(self, message: str, discrepancy=None):
        self.discrepancy = discrepancy
        super().__init__(message)


class OracleError(MBDebugError):
    """Wraps an exception raised by a conflict oracle, with the assumptions used."""

    def __init__(self, assumptions: frozenset[int], cause: BaseException):
        self.assumptions = assumptions
        self.cause = cause
        super().__init__(f"oracle failed under assumptions {sorted(assumptions)}: {cause}")


class TooManyComponents(MBDebugError):
    pass


class NotApplicable(MBDebugError):
    """No site in the program admits the requested mutation kind."""


class CorpusInconsistent(MBDebugError):
    def __init__(self, entry: str, reason: str):
        self.entry = entry
        self.reason = reason
        super().__init__(f"corpus entry {entry!r} is inconsistent: {reason}")
