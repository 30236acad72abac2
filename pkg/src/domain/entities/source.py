"""
Domain Layer - Source Locations and Diagnostics

Every AST node can carry a SourceSpan pointing back into the proof document
it was parsed from. Diagnostics pair a message with a span so that errors and
warnings are always reported against the offending source line.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional


class Severity(str, Enum):
    """How serious a diagnostic is"""
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    """
    Value Object: a contiguous region of a source file.

    Offsets are character offsets into the document text; line and column
    are 1-based and refer to the start of the region.
    """

    file: str
    start: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"Invalid span offsets {self.start}..{self.end}")
        if self.line < 1 or self.column < 1:
            raise ValueError("Span line and column are 1-based")

    def join(self, other: Optional["SourceSpan"]) -> "SourceSpan":
        """Smallest span covering both spans (other may be missing)"""
        if other is None:
            return self
        first = self if self.start <= other.start else other
        return SourceSpan(
            file=self.file,
            start=first.start,
            end=max(self.end, other.end),
            line=first.line,
            column=first.column,
        )

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class SourceFile:
    """A proof document's text, with line lookup for diagnostics"""

    def __init__(self, name: str, text: str):
        self.name = name
        self.text = text
        self._lines: List[str] = text.split("\n")

    def line_text(self, line: int) -> str:
        if 1 <= line <= len(self._lines):
            return self._lines[line - 1].rstrip("\r")
        return ""

    def span_at(self, offset: int) -> SourceSpan:
        """Zero-width span at a character offset"""
        offset = max(0, min(offset, len(self.text)))
        line = self.text.count("\n", 0, offset) + 1
        column = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return SourceSpan(self.name, offset, offset, line, column)

    def __repr__(self) -> str:
        return f"SourceFile(name={self.name}, lines={len(self._lines)})"


@dataclass(frozen=True)
class Diagnostic:
    """An error or warning attached to a source location"""

    severity: Severity
    message: str
    span: Optional[SourceSpan] = None
    hint: Optional[str] = None

    @property
    def is_error(self) -> bool:
        return self.severity == Severity.ERROR

    def render(self, source: Optional[SourceFile] = None) -> str:
        """
        Render as `file:line:col: severity: message`, followed by the
        offending source line with a caret and an optional hint.
        """
        location = str(self.span) if self.span else (source.name if source else "<input>")
        lines = [f"{location}: {self.severity.value}: {self.message}"]
        if self.span is not None and source is not None and self.span.file == source.name:
            text = source.line_text(self.span.line)
            if text:
                lines.append(text)
                lines.append(" " * (self.span.column - 1) + "^")
        if self.hint:
            lines.append(f"hint: {self.hint}")
        return "\n".join(lines)
