"""
Domain Layer - Document Report

Everything one checker run learned about one proof document: its
diagnostics, the obligations, what the document's commands printed, and
how long it took.

Key principles:
- A report exists even when parsing failed; `checked` is then None
- `ok` holds iff no diagnostic is an error
"""

from dataclasses import dataclass, field
from typing import List, Optional

from src.domain.entities.checked import CheckedDocument
from src.domain.entities.goal import Obligation
from src.domain.entities.refinement import ProvesOutcome
from src.domain.entities.source import Diagnostic, SourceFile
from src.domain.entities.theorem import Theorem


@dataclass
class DocumentReport:
    source: SourceFile
    checked: Optional[CheckedDocument] = None
    diagnostics: List[Diagnostic] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    theorem: Optional[Theorem] = None
    proves: List[ProvesOutcome] = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def name(self) -> str:
        return self.source.name

    @property
    def obligations(self) -> List[Obligation]:
        return list(self.checked.obligations) if self.checked is not None else []

    @property
    def errors(self) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]

    @property
    def ok(self) -> bool:
        return not self.errors

    def render_diagnostics(self) -> List[str]:
        return [d.render(self.source) for d in self.diagnostics]
