"""
Domain Layer - Checked Document

What checking an elaborated document produced: the final fact context, every
obligation with its verdict, structural errors, `print` output and the
variants that belong to forward ghosts.

Key principles:
- Failed obligations are not stored as diagnostics; they are derived from
  the obligation list, so a later solver run can upgrade an obligation and
  its diagnostic disappears with it
- The postcondition only mentions variants current at document exit
"""

from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence

from src.domain.entities.analysis import free_variables, map_variables
from src.domain.entities.context import Context, FactEntry, FactKind
from src.domain.entities.elaborated import ElaboratedDocument
from src.domain.entities.formula import Formula, conjoin
from src.domain.entities.goal import Obligation, Verdict
from src.domain.entities.node import GhostStatus
from src.domain.entities.source import Diagnostic, Severity
from src.domain.entities.term import Var
from src.domain.exceptions import ProofError


def _position(diagnostic: Diagnostic) -> tuple:
    span = diagnostic.span
    return (0, 0) if span is None else (span.line, span.column)


def obligation_diagnostic(obligation: Obligation) -> Diagnostic:
    certificate = obligation.certificate
    if certificate.outcome == Verdict.UNKNOWN:
        hint = "name more facts with `using`, or configure an external solver"
    else:
        hint = None
    return Diagnostic(
        severity=Severity.ERROR,
        message=f"cannot prove {obligation.name}: {certificate.describe()}",
        span=obligation.span,
        hint=hint,
    )


@dataclass
class CheckedDocument:
    """
    Entity: a document after proof checking.

    `ok` holds when no structural error was reported and every obligation
    is valid.
    """

    elaborated: ElaboratedDocument
    context: Context
    obligations: List[Obligation] = field(default_factory=list)
    errors: List[Diagnostic] = field(default_factory=list)
    prints: List[str] = field(default_factory=list)
    ghost_variants: FrozenSet[Var] = frozenset()

    @property
    def name(self) -> str:
        return self.elaborated.document.name

    @property
    def failed_obligations(self) -> List[Obligation]:
        return [o for o in self.obligations if not o.certificate.is_valid]

    def diagnostics(self) -> List[Diagnostic]:
        """Warnings, structural errors and failed obligations in source order"""
        found = list(self.elaborated.warnings) + list(self.errors)
        found.extend(obligation_diagnostic(o) for o in self.failed_obligations)
        return sorted(found, key=_position)

    @property
    def ok(self) -> bool:
        return not self.errors and not self.failed_obligations

    # ------------------------------------------------------------------
    # Postcondition
    # ------------------------------------------------------------------

    def _is_current(self, formula: Formula) -> bool:
        return all(
            v.index is None or self.elaborated.is_current(v)
            for v in free_variables(formula)
        )

    def fold(self, formula: Formula) -> Formula:
        """Rename current variants back to their program variables"""
        return map_variables(formula, lambda v: Var(v.name, span=v.span))

    def _latest(self, name: str) -> Optional[FactEntry]:
        try:
            return self.context.lookup(name)
        except ProofError:
            return None

    def exported_facts(self) -> List[FactEntry]:
        """Plain top-level assertions about the final state"""
        seen = set()
        result: List[FactEntry] = []
        for entry in self.context.root.entries:
            if entry.kind not in (FactKind.ASSERTION, FactKind.NOTE):
                continue
            if entry.status != GhostStatus.PLAIN or entry.name is None:
                continue
            if not entry.name.startswith("_") and self._latest(entry.name) is not entry:
                continue
            if entry.formula in seen or not self._is_current(entry.formula):
                continue
            seen.add(entry.formula)
            result.append(entry)
        return result

    def postcondition(self, selected: Optional[Sequence[str]] = None) -> Formula:
        if selected is None:
            return self.fold(conjoin(e.formula for e in self.exported_facts()))
        formulas: List[Formula] = []
        for name in selected:
            entry = self.context.lookup(name)
            if entry is None:
                raise ProofError(f"unknown fact {name} in conclusion")
            if entry.status != GhostStatus.PLAIN:
                raise ProofError(f"fact {name} is a ghost fact and cannot be concluded")
            if not self._is_current(entry.formula):
                raise ProofError(
                    f"fact {name} talks about an earlier state",
                    hint="conclude facts about the final state only",
                )
            formulas.append(entry.formula)
        return self.fold(conjoin(formulas))
