"""
Domain Layer - Arithmetic Goals and Verdicts

A Goal is what an assertion asks the arithmetic backend: named hypotheses,
always-available definitions (SSA assignments), and a conclusion. The backend
answers with a VerdictCertificate recording the outcome and the procedure
that decided it.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple

from src.domain.entities.formula import Formula
from src.domain.entities.source import SourceSpan
from src.domain.entities.statement import MethodKind
from src.domain.entities.term import Term, Var


class Verdict(str, Enum):
    VALID = "valid"
    COUNTEREXAMPLE = "counterexample"
    UNKNOWN = "unknown"


class Procedure(str, Enum):
    """Which decision procedure produced a verdict"""
    PROP = "prop"
    LINEAR = "linear"
    SUBSTITUTION_LINEAR = "substitution+linear"
    PRODUCTS = "products+linear"
    EXTERNAL = "external-export"


@dataclass(frozen=True)
class NamedFormula:
    name: str
    formula: Formula


@dataclass(frozen=True)
class Goal:
    """
    Value Object: one arithmetic obligation.

    After preprocessing the conclusion contains no modalities and no located
    expressions.
    """

    hypotheses: Tuple[NamedFormula, ...]
    conclusion: Formula
    method: MethodKind = MethodKind.AUTO
    delta: Optional[Term] = None
    definitions: Tuple[Tuple[Var, Term], ...] = ()
    label: str = ""
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def with_conclusion(self, conclusion: Formula) -> "Goal":
        return Goal(
            self.hypotheses, conclusion, self.method, self.delta,
            self.definitions, self.label, self.span,
        )

    def with_hypotheses(self, hypotheses: Tuple[NamedFormula, ...]) -> "Goal":
        return Goal(
            hypotheses, self.conclusion, self.method, self.delta,
            self.definitions, self.label, self.span,
        )


@dataclass(frozen=True)
class VerdictCertificate:
    """
    Value Object: outcome of checking a Goal.

    A counterexample falsifies the goal under exact rational evaluation; an
    unknown verdict may point to an exported solver file.
    """

    outcome: Verdict
    procedure: Procedure
    counterexample: Tuple[Tuple[Var, Fraction], ...] = ()
    export_path: Optional[str] = None
    detail: str = ""

    @property
    def is_valid(self) -> bool:
        return self.outcome == Verdict.VALID

    @classmethod
    def valid(cls, procedure: Procedure, detail: str = "") -> "VerdictCertificate":
        return cls(Verdict.VALID, procedure, detail=detail)

    @classmethod
    def unknown(cls, procedure: Procedure, detail: str = "") -> "VerdictCertificate":
        return cls(Verdict.UNKNOWN, procedure, detail=detail)

    def describe(self) -> str:
        if self.outcome == Verdict.COUNTEREXAMPLE:
            values = ", ".join(f"{v} = {value}" for v, value in self.counterexample)
            return f"counterexample: {values}"
        if self.outcome == Verdict.UNKNOWN:
            where = f"; obligation exported to {self.export_path}" if self.export_path else ""
            return f"unknown ({self.detail or self.procedure.value}){where}"
        return f"valid by {self.procedure.value}"


@dataclass
class Obligation:
    """
    Entity: one checked obligation of a document.

    Records what was asked, the verdict, and how long deciding it took. An
    unknown verdict keeps the SMT-LIB rendering so it can be exported and
    handed to an external solver later.
    """

    name: str
    goal: Goal
    certificate: VerdictCertificate
    kind: str = "assertion"
    elapsed_ms: float = 0.0
    smtlib: Optional[str] = None

    @property
    def span(self) -> Optional[SourceSpan]:
        return self.goal.span

    @property
    def location(self) -> str:
        return str(self.span) if self.span is not None else "<unknown>"

    def upgrade(self, certificate: VerdictCertificate) -> None:
        self.certificate = certificate
