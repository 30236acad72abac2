"""
Domain Layer - ODE Systems and Solution Tables

An OdeSystem is the checker's view of one elaborated ODE proof statement:
the equations over post-state variants, the domain clauses in source order
(ghost wrappers flattened into a status per clause) and the polarity.

Key principles:
- An ODE is Angelic iff its domain contains exactly one duration assignment
- Substituting duration 0 into a solution table gives back the pre variants
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

from src.domain.entities.game import OdeEquation
from src.domain.entities.node import GhostStatus
from src.domain.entities.statement import (
    Assert,
    Assume,
    ForwardGhost,
    InverseGhost,
    Modify,
    OdeProof,
    Statement,
)
from src.domain.entities.term import Num, Term, Var


class Polarity(str, Enum):
    DEMONIC = "demonic"
    ANGELIC = "angelic"


@dataclass(frozen=True)
class DomainClause:
    statement: Statement
    status: GhostStatus = GhostStatus.PLAIN


def _flatten(statements: Iterable[Statement], status: GhostStatus) -> List[DomainClause]:
    clauses: List[DomainClause] = []
    for stmt in statements:
        if isinstance(stmt, ForwardGhost):
            clauses.extend(_flatten(stmt.body, GhostStatus.FORWARD))
        elif isinstance(stmt, InverseGhost):
            clauses.extend(_flatten(stmt.body, GhostStatus.INVERSE))
        else:
            clauses.append(DomainClause(stmt, status))
    return clauses


@dataclass(frozen=True)
class OdeSystem:
    """Value Object: equations plus ordered domain clauses of one ODE proof"""

    proof: OdeProof
    clauses: Tuple[DomainClause, ...]

    @classmethod
    def from_proof(cls, proof: OdeProof) -> "OdeSystem":
        return cls(proof, tuple(_flatten(proof.domain, GhostStatus.PLAIN)))

    @property
    def equations(self) -> Tuple[OdeEquation, ...]:
        return self.proof.equations

    @property
    def duration(self) -> Optional[Var]:
        return self.proof.duration

    def pre_of(self, post: Var) -> Var:
        for eq, pre in zip(self.proof.equations, self.proof.pre):
            if eq.var == post:
                return pre
        raise KeyError(str(post))

    @property
    def posts(self) -> Tuple[Var, ...]:
        return tuple(eq.var for eq in self.proof.equations)

    def durations(self) -> List[DomainClause]:
        return [c for c in self.clauses if isinstance(c.statement, Modify)]

    @property
    def polarity(self) -> Polarity:
        return Polarity.ANGELIC if self.durations() else Polarity.DEMONIC

    def assumptions(self) -> List[DomainClause]:
        return [c for c in self.clauses if isinstance(c.statement, Assume)]

    def assertions(self) -> List[DomainClause]:
        return [c for c in self.clauses if isinstance(c.statement, Assert)]

    def clock_equations(self) -> List[OdeEquation]:
        return [
            eq for eq in self.proof.equations
            if isinstance(eq.rhs, Num) and eq.rhs.value == 1
        ]

    def field(self, include_inverse: bool = True) -> Dict[Var, Term]:
        """Map from post variant to right-hand side"""
        return {
            eq.var: eq.rhs for eq in self.proof.equations
            if include_inverse or eq.ghost != GhostStatus.INVERSE
        }


@dataclass(frozen=True)
class SolutionTable:
    """
    Closed-form solutions of the solvable part of a system: post variant
    mapped to a polynomial term over pre variants, constants and the
    duration variable.
    """

    duration: Var
    solutions: Dict[Var, Term] = field(default_factory=dict)
    complete: bool = False

    def covers(self, variables: Iterable[Var]) -> bool:
        return all(v in self.solutions for v in variables)

    def __contains__(self, var: Var) -> bool:
        return var in self.solutions
