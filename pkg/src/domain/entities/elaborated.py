"""
Domain Layer - Elaborated Document

The result of SSA elaboration: the statement tree over SSA variants with
every located expression resolved, the label registry, and what later
stages need from the source (top-level definitions for `proves` targets,
the variant of each variable current at document exit).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

from src.domain.entities.definitions import DefinitionRegistry
from src.domain.entities.document import ProofDocument
from src.domain.entities.formula import Formula
from src.domain.entities.source import Diagnostic
from src.domain.entities.ssa import LabelRegistry
from src.domain.entities.statement import Statement
from src.domain.entities.term import Term, Var


@dataclass(frozen=True)
class Resolution:
    """One located expression and what it resolved to"""

    source: Union[Term, Formula]
    result: Union[Term, Formula]


@dataclass
class ElaboratedDocument:
    document: ProofDocument
    statements: Tuple[Statement, ...]
    labels: LabelRegistry
    definitions: DefinitionRegistry
    final_state: Dict[str, int]
    warnings: List[Diagnostic] = field(default_factory=list)
    resolutions: List[Resolution] = field(default_factory=list)

    def current(self, name: str) -> Var:
        return Var(name, self.final_state.get(name, 0))

    def is_current(self, var: Var) -> bool:
        return var.index == self.final_state.get(var.name, 0)
