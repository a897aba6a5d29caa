# csc/errors.py
# Exception hierarchy shared by the front end, the checker and the interpreter

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Span:
    """A source region: 1-based line and column plus a length in characters."""
    line: int
    column: int
    length: int = 1

    def __str__(self):
        return f"{self.line}:{self.column}"


class CscError(Exception):
    """Base class for every error raised by the csc package."""

    code = "Error"

    def __init__(self, message: str, span: Optional[Span] = None, code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.span = span
        if code is not None:
            self.code = code

    def to_diagnostic(self):
        from csc.surface import Diagnostic
        return Diagnostic(severity="error", code=self.code, message=self.message, span=self.span)


class LexError(CscError):
    code = "LexError"


class ParseError(CscError):
    code = "ParseError"


class DegreeContainsRoot(ParseError, ValueError):
    code = "DegreeContainsRoot"


class ScopeError(CscError):
    """UnboundName, RootInDegree, DuplicateName, NotFound or IllFormed."""
    code = "UnboundName"


class UnboundAtom(CscError):
    code = "UnboundAtom"


class TypeCheckError(CscError):
    """A failed typing premise.

    Args:
        code: one of the TypeError codes (NotSeparated, NotSubtype, ...)
        message: human readable explanation
        span: position of the offending term, when known
        ctx: the typing context the premise was checked under
        hint: optional suggestion printed under the message
    """

    code = "IllFormed"

    def __init__(self, code: str, message: str, span: Optional[Span] = None, ctx=None, hint: str = ""):
        super().__init__(message, span, code)
        self.ctx = ctx
        self.hint = hint


class RuntimeFault(CscError):
    code = "RuntimeFault"


class MissingVal(RuntimeFault):
    code = "MissingVal"


class MissingVar(RuntimeFault):
    code = "MissingVar"


class InvalidChoice(RuntimeFault):
    code = "InvalidChoice"


class RuleViolation(RuntimeFault):
    code = "RuleViolation"


class Stuck(RuntimeFault):
    code = "Stuck"

    def __init__(self, message: str, config=None):
        super().__init__(message)
        self.config = config


class StepLimit(RuntimeFault):
    code = "StepLimit"

    def __init__(self, message: str, config=None):
        super().__init__(message)
        self.config = config


class PreservationViolation(CscError):
    code = "PreservationViolation"

    def __init__(self, step: int, rule: str, diagnostic: str, schedule: str = ""):
        super().__init__(f"step {step} ({rule}) under {schedule or 'schedule'}: {diagnostic}")
        self.step = step
        self.rule = rule
        self.diagnostic = diagnostic
        self.schedule = schedule
