"""
Domain Layer - Error Hierarchy

All checker failures derive from CheckerError, which is a ValueError like the
validation errors raised by the entities themselves. An error knows where it
happened (an optional SourceSpan) and may carry a hint telling the user how to
repair the proof; `to_diagnostic()` turns it into a reportable Diagnostic.
"""

from typing import TYPE_CHECKING, FrozenSet, Iterable, Optional

if TYPE_CHECKING:
    from src.domain.entities.source import Diagnostic, SourceSpan


class CheckerError(ValueError):
    """Base class of every error reported against a proof document"""

    def __init__(
        self,
        message: str,
        span: Optional["SourceSpan"] = None,
        hint: Optional[str] = None
    ):
        super().__init__(message)
        self.message = message
        self.span = span
        self.hint = hint

    def with_span(self, span: Optional["SourceSpan"]) -> "CheckerError":
        """Attach a location if the error does not have one yet"""
        if self.span is None and span is not None:
            self.span = span
        return self

    def to_diagnostic(self) -> "Diagnostic":
        from src.domain.entities.source import Diagnostic, Severity

        return Diagnostic(
            severity=Severity.ERROR,
            message=self.message,
            span=self.span,
            hint=self.hint,
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.message!r}, span={self.span})"


class ParseError(CheckerError):
    """Syntax error, with the set of tokens that would have been accepted"""

    def __init__(
        self,
        message: str,
        span: Optional["SourceSpan"] = None,
        expected: Iterable[str] = (),
        hint: Optional[str] = None
    ):
        super().__init__(message, span, hint)
        self.expected: FrozenSet[str] = frozenset(expected)


class DefinitionError(CheckerError):
    """Unknown symbol, arity mismatch or recursive definition"""


class ElaborationError(CheckerError):
    """SSA renaming or label resolution failed"""


class LabelCycleError(ElaborationError):
    """Located expressions depend on each other cyclically"""

    def __init__(
        self,
        labels: Iterable[str],
        span: Optional["SourceSpan"] = None
    ):
        self.labels: FrozenSet[str] = frozenset(labels)
        names = ", ".join(sorted(self.labels))
        super().__init__(
            f"cyclic label references between {{{names}}}",
            span,
            hint="each located expression asks the other for its value; break the cycle",
        )


class ProofError(CheckerError):
    """An obligation or a structural proof rule failed"""


class UnsupportedTermError(CheckerError):
    """A term falls outside the supported arithmetic fragment"""


class RefinementError(CheckerError):
    """A strategy game does not refine the requested game"""


class SubstitutionCaptureError(CheckerError):
    """
    Internal invariant violation: a substitution would capture a bound
    variable. Elaboration keeps bound names fresh, so this indicates a bug.
    """


class DocumentNotFoundError(LookupError):
    """A proof document could not be loaded; reported as a usage error"""

    def __init__(self, name: str, reason: str = "no such file"):
        super().__init__(f"{name}: {reason}")
        self.name = name
        self.reason = reason
