"""
Domain Layer - Fact Context

The checker's knowledge at a program point: facts (assumed or proved
formulas), definitions (deterministic SSA assignments), and the scoping
structure needed for disjunctive lookup after Demonic choices.

Key principles:
- A frame is one statement list; names declared twice directly in the same
  frame are an error, nested scopes may shadow
- Facts about old SSA variants stay true forever, nothing is ever removed
- After a choice, a name bound in every branch looks up as the disjunction
  of the branch formulas, in branch order
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from src.domain.entities.formula import Compare, CompareOp, Formula, conjoin, disjoin
from src.domain.entities.node import GhostStatus
from src.domain.entities.term import Term, Var
from src.domain.exceptions import ProofError


class FactKind(str, Enum):
    ASSUMPTION = "assumption"
    ASSERTION = "assertion"
    NOTE = "note"
    DEFINITION = "definition"
    JOIN = "join"
    PARTIAL = "partial"  # bound in only some branches of a choice


class FrameKind(str, Enum):
    ROOT = "root"
    BLOCK = "block"
    BRANCH = "branch"
    LOOP_BODY = "loop-body"
    FORWARD_GHOST = "forward-ghost"
    INVERSE_GHOST = "inverse-ghost"
    ODE_DOMAIN = "ode-domain"


@dataclass
class FactEntry:
    """One entry of the context"""

    name: Optional[str]
    formula: Formula
    kind: FactKind
    status: GhostStatus = GhostStatus.PLAIN
    definition: Optional[Tuple[Var, Term]] = None
    direct: bool = True  # declared by a statement of this frame
    rebound: bool = False

    @property
    def usable_in_plain_code(self) -> bool:
        return self.status != GhostStatus.INVERSE

    def __repr__(self) -> str:
        return f"FactEntry({self.name}, {self.kind.value}, {self.status.value})"


@dataclass
class Frame:
    kind: FrameKind
    parent: Optional["Frame"] = None
    entries: List[FactEntry] = field(default_factory=list)

    def direct_names(self) -> Dict[str, FactEntry]:
        return {e.name: e for e in self.entries if e.direct and e.name is not None}


def _strongest(statuses: Sequence[GhostStatus]) -> GhostStatus:
    if GhostStatus.INVERSE in statuses:
        return GhostStatus.INVERSE
    if GhostStatus.FORWARD in statuses:
        return GhostStatus.FORWARD
    return GhostStatus.PLAIN


class Context:
    """
    Entity: the checker's scoped fact store.

    The context is mutable while a document is checked; `enter` and `leave`
    bracket a nested statement list.
    """

    def __init__(self) -> None:
        self.root = Frame(FrameKind.ROOT)
        self.frame = self.root

    # ------------------------------------------------------------------
    # Scoping
    # ------------------------------------------------------------------

    def enter(self, kind: FrameKind) -> Frame:
        self.frame = Frame(kind, parent=self.frame)
        return self.frame

    def leave(self) -> Frame:
        finished = self.frame
        if finished.parent is None:
            raise ProofError("cannot leave the root scope")
        self.frame = finished.parent
        return finished

    def frames(self) -> Iterator[Frame]:
        frame: Optional[Frame] = self.frame
        while frame is not None:
            yield frame
            frame = frame.parent

    @property
    def inside_inverse_ghost(self) -> bool:
        return any(f.kind == FrameKind.INVERSE_GHOST for f in self.frames())

    @property
    def inside_forward_ghost(self) -> bool:
        return any(f.kind == FrameKind.FORWARD_GHOST for f in self.frames())

    @property
    def status(self) -> GhostStatus:
        """Ghost status of facts bound at the current point"""
        if self.inside_inverse_ghost:
            return GhostStatus.INVERSE
        if self.inside_forward_ghost:
            return GhostStatus.FORWARD
        return GhostStatus.PLAIN

    # ------------------------------------------------------------------
    # Binding
    # ------------------------------------------------------------------

    def bind(
        self,
        name: Optional[str],
        formula: Formula,
        kind: FactKind,
        status: Optional[GhostStatus] = None
    ) -> FactEntry:
        if name is not None and not name.startswith("_"):
            if name in self.frame.direct_names():
                raise ProofError(
                    f"fact name {name} is already bound in this scope",
                    hint="rename one of the facts",
                )
        entry = FactEntry(name, formula, kind, status or self.status)
        self.frame.entries.append(entry)
        return entry

    def define(self, var: Var, value: Term, status: Optional[GhostStatus] = None) -> FactEntry:
        entry = FactEntry(
            None,
            Compare(CompareOp.EQ, var, value),
            FactKind.DEFINITION,
            status or self.status,
            definition=(var, value),
        )
        self.frame.entries.append(entry)
        return entry

    def rebind(self, name: str, formula: Formula, status: Optional[GhostStatus] = None) -> FactEntry:
        """Make name refer to a new formula without counting as a redeclaration"""
        entry = FactEntry(name, formula, FactKind.ASSERTION, status or self.status,
                          direct=False, rebound=True)
        self.frame.entries.append(entry)
        return entry

    def export(self, entry: FactEntry) -> None:
        """Re-bind an entry of a finished nested frame into the current frame"""
        self.frame.entries.append(FactEntry(
            entry.name, entry.formula, entry.kind, entry.status,
            entry.definition, direct=False, rebound=entry.rebound,
        ))

    # ------------------------------------------------------------------
    # Lookup
    # ------------------------------------------------------------------

    def lookup(self, name: str) -> Optional[FactEntry]:
        for frame in self.frames():
            for entry in reversed(frame.entries):
                if entry.name == name and entry.kind != FactKind.DEFINITION:
                    if entry.kind == FactKind.PARTIAL:
                        raise ProofError(
                            f"fact {name} is bound in only some branches of a choice",
                            hint="bind it in every branch to use its disjunction",
                        )
                    return entry
        return None

    def visible(self) -> List[FactEntry]:
        """Every entry in scope, outermost first"""
        chain = list(self.frames())
        result: List[FactEntry] = []
        for frame in reversed(chain):
            result.extend(e for e in frame.entries if e.kind != FactKind.PARTIAL)
        return result

    def facts(self) -> List[FactEntry]:
        return [e for e in self.visible() if e.kind != FactKind.DEFINITION]

    def definitions(self) -> List[Tuple[Var, Term]]:
        """Definitions usable here; inverse-ghost ones only inside inverse ghosts"""
        inside = self.inside_inverse_ghost
        return [
            e.definition for e in self.visible()
            if e.definition is not None and (inside or e.status != GhostStatus.INVERSE)
        ]

    # ------------------------------------------------------------------
    # Joins
    # ------------------------------------------------------------------

    def join(self, branches: Sequence[Frame]) -> Optional[FactEntry]:
        """
        Merge the frames of a finished choice into the current frame.

        Names bound in every branch become disjunctions in branch order;
        names bound in some branches only become unusable. One anonymous
        join fact records the disjunction of what each branch established.
        """
        inside = self.inside_inverse_ghost
        per_branch: List[Dict[str, FactEntry]] = []
        for frame in branches:
            named: Dict[str, FactEntry] = {}
            for entry in frame.entries:
                if entry.name is not None and not entry.name.startswith("_") \
                        and entry.kind != FactKind.DEFINITION:
                    named[entry.name] = entry
            per_branch.append(named)

        ordered_names: List[str] = []
        for named in per_branch:
            for name in named:
                if name not in ordered_names:
                    ordered_names.append(name)
        for name in ordered_names:
            entries = [named.get(name) for named in per_branch]
            if all(e is not None for e in entries):
                present = [e for e in entries if e is not None]
                if any(e.kind == FactKind.PARTIAL for e in present):
                    self.frame.entries.append(FactEntry(name, present[0].formula, FactKind.PARTIAL, direct=False))
                    continue
                self.frame.entries.append(FactEntry(
                    name,
                    disjoin(e.formula for e in present),
                    present[0].kind,
                    _strongest([e.status for e in present]),
                    direct=False,
                ))
            else:
                placeholder = next(e for e in entries if e is not None)
                self.frame.entries.append(
                    FactEntry(name, placeholder.formula, FactKind.PARTIAL, direct=False)
                )

        disjuncts: List[Formula] = []
        statuses: List[GhostStatus] = []
        for frame in branches:
            parts = []
            for entry in frame.entries:
                if entry.kind == FactKind.PARTIAL:
                    continue
                if entry.status == GhostStatus.INVERSE and not inside:
                    continue
                parts.append(entry.formula)
                statuses.append(entry.status)
            disjuncts.append(conjoin(parts))
        if not disjuncts:
            return None
        entry = FactEntry(None, disjoin(disjuncts), FactKind.JOIN, _strongest(statuses), direct=False)
        self.frame.entries.append(entry)
        return entry

    def __repr__(self) -> str:
        depth = sum(1 for _ in self.frames())
        return f"Context(depth={depth}, entries={len(self.visible())})"


def conjunction_of(entries: Sequence[FactEntry]) -> Formula:
    return conjoin(e.formula for e in entries)

