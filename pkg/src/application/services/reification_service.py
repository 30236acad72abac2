"""
Application Layer - Reification Service

Reads off the game a checked strategy plays and the theorem it proves.

Key principles:
- Assumptions are Demon's tests, assertions are Angel's tests
- Forward ghosts, notes, definitions, labels and prints are proof-only and
  are erased; inverse ghosts belong to the game and are kept
- A Demonic ODE keeps its assumptions as domain, an Angelic ODE its
  assertions; domain clauses inside forward ghosts are erased
- SSA variants are folded back to program variables. A variant that is
  referenced after it stopped being current is kept in a snapshot variable
  (`x_0 := x`) written where it was current
"""

import logging
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from src.domain.entities import (
    Assert,
    Assign,
    Assume,
    Block,
    CheckedDocument,
    DemonicChoice,
    DemonicLoop,
    Dual,
    ForLoop,
    Formula,
    ForwardGhost,
    Game,
    GhostStatus,
    InverseGhost,
    LabelStmt,
    Let,
    Loop,
    Modify,
    Note,
    Ode,
    OdeEquation,
    OdeProof,
    OdeSystem,
    Polarity,
    Print,
    RandomAssign,
    Statement,
    Switch,
    Test,
    Theorem,
    Var,
)
from src.domain.entities.analysis import map_variables
from src.domain.entities.formula import TrueF, conjoin, conjuncts
from src.domain.entities.game import SKIP, Sequence as SequenceGame, choice, dual, sequence
from src.domain.entities.node import Node
from src.infrastructure.parsing import print_formula

logger = logging.getLogger(__name__)


def snapshot_of(var: Var) -> Var:
    """Program variable holding an SSA variant after it is overwritten"""
    return Var(str(var), span=var.span)


def dualize(game: Game) -> Game:
    """Push a dual through sequences; a deterministic assignment is its own dual"""
    if isinstance(game, SequenceGame):
        return sequence(dualize(item) for item in game.items)
    if isinstance(game, Assign):
        return game
    return dual(game)


class _Reifier:
    """
    One pass over the elaborated statements, tracking which variant of each
    variable is current. The first pass finds stale references; the second
    knows which snapshots to write.
    """

    def __init__(self, snapshots: FrozenSet[Var] = frozenset()):
        self.snapshots = snapshots
        self.current: Dict[str, int] = {}
        self.stale: Set[Var] = set()

    # ------------------------------------------------------------------
    # Variants
    # ------------------------------------------------------------------

    def fold(self, node: Node) -> Node:
        def rename(var: Var) -> Var:
            if var.index is None:
                return var
            if var.index == self.current.get(var.name, 0):
                return var.base
            self.stale.add(var)
            return snapshot_of(var)

        return map_variables(node, rename)

    def _formula(self, formula: Formula) -> Formula:
        return self.fold(formula)  # type: ignore[return-value]

    def becomes_current(self, var: Var) -> List[Game]:
        self.current[var.name] = var.index or 0
        if var in self.snapshots:
            return [Assign(snapshot_of(var), var.base)]
        return []

    def initial_snapshots(self) -> List[Game]:
        return [
            Assign(snapshot_of(v), v.base)
            for v in sorted(self.snapshots, key=str)
            if v.index == 0
        ]

    # ------------------------------------------------------------------
    # Statements
    # ------------------------------------------------------------------

    def statements(self, stmts: Sequence[Statement]) -> List[Game]:
        games: List[Game] = []
        for stmt in stmts:
            games.extend(self.statement(stmt))
        return games

    def statement(self, stmt: Statement) -> List[Game]:
        if isinstance(stmt, Assume):
            return [Test(self._formula(stmt.formula))]
        if isinstance(stmt, Assert):
            return [Dual(Test(self._formula(stmt.formula)))]
        if isinstance(stmt, Modify):
            return self._modify(stmt)
        if isinstance(stmt, Block):
            return self.statements(stmt.statements)
        if isinstance(stmt, InverseGhost):
            return self.statements(stmt.body)
        if isinstance(stmt, DemonicChoice):
            return [self._choice([b.statements for b in stmt.branches])]
        if isinstance(stmt, Switch):
            return [self._switch(stmt)]
        if isinstance(stmt, DemonicLoop):
            return self._loop(stmt)
        if isinstance(stmt, ForLoop):
            return self._for_loop(stmt)
        if isinstance(stmt, OdeProof):
            return self._ode(stmt)
        if isinstance(stmt, (ForwardGhost, Note, Let, LabelStmt, Print)):
            return []
        raise TypeError(f"cannot reify {type(stmt).__name__}")

    def _modify(self, stmt: Modify) -> List[Game]:
        if stmt.merge:
            return self.becomes_current(stmt.var)
        if stmt.value is None:
            game: Game = RandomAssign(stmt.var.base)
        else:
            game = Assign(stmt.var.base, self.fold(stmt.value))  # type: ignore[arg-type]
        return [game] + self.becomes_current(stmt.var)

    def _choice(self, bodies: Sequence[Sequence[Statement]]) -> Game:
        before = dict(self.current)
        branches: List[Game] = []
        for body in bodies:
            self.current = dict(before)
            branches.append(sequence(self.statements(body)))
        return choice(branches)

    def _switch(self, stmt: Switch) -> Game:
        before = dict(self.current)
        branches: List[Game] = []
        for case in stmt.cases:
            self.current = dict(before)
            test = [] if isinstance(case.guard, TrueF) else [Test(self._formula(case.guard))]
            body = dualize(sequence(self.statements(case.body)))
            branches.append(sequence(test + [body] if body != dual(SKIP) else test))
        return Dual(choice(branches))

    def _enter(self, entry) -> List[Game]:
        games: List[Game] = []
        for _, merged in entry:
            games.extend(self.becomes_current(merged))
        return games

    def _loop(self, stmt: DemonicLoop) -> List[Game]:
        head = self._enter(stmt.entry)
        body = self.statements(stmt.body)
        tail = self._enter(stmt.entry)
        return head + [Loop(sequence(body + tail))]

    def _for_loop(self, stmt: ForLoop) -> List[Game]:
        games = self._modify(stmt.init)
        games.append(Dual(Test(self._formula(stmt.invariant.formula))))
        games.extend(self._enter(stmt.entry))
        round_: List[Game] = [Test(self._formula(stmt.guard.formula))]
        round_.extend(self.statements(stmt.body))
        round_.extend(self._modify(stmt.increment))
        round_.extend(self._enter(stmt.entry))
        games.append(Dual(Loop(Dual(sequence(round_)))))
        return games

    def _ode(self, stmt: OdeProof) -> List[Game]:
        system = OdeSystem.from_proof(stmt)
        after: List[Game] = []
        for eq in stmt.equations:
            after.extend(self.becomes_current(eq.var))
        equations = tuple(
            OdeEquation(eq.var.base, self.fold(eq.rhs), span=eq.span)  # type: ignore[arg-type]
            for eq in stmt.equations
            if eq.ghost != GhostStatus.FORWARD
        )
        if system.polarity == Polarity.ANGELIC:
            clauses = system.assertions()
        else:
            clauses = system.assumptions()
        domain = conjoin(
            self._formula(c.statement.formula)  # type: ignore[attr-defined]
            for c in clauses
            if c.status != GhostStatus.FORWARD
        )
        if not equations:
            return after
        ode = Ode(equations, domain, span=stmt.span)
        game: Game = Dual(ode) if system.polarity == Polarity.ANGELIC else ode
        return [game] + after


def _run(checked: CheckedDocument, snapshots: FrozenSet[Var]) -> Tuple[Game, Set[Var]]:
    reifier = _Reifier(snapshots)
    games = reifier.initial_snapshots() + reifier.statements(checked.elaborated.statements)
    return sequence(games), reifier.stale


def _strip_concluded(game: Game, postcondition: Formula) -> Game:
    """Drop trailing Angel tests that the postcondition already states"""
    items = list(game.items) if isinstance(game, SequenceGame) else [game]
    stated = set(conjuncts(postcondition))
    while items and isinstance(items[-1], Dual) and isinstance(items[-1].body, Test):
        if not set(conjuncts(items[-1].body.condition)) <= stated:
            break
        items.pop()
    return sequence(items)


class ReificationService:
    """
    Service computing the theorem a checked document proves.

    Pure: the result depends only on the checked document and the selected
    fact names.
    """

    def reify(self, checked: CheckedDocument, selected: Optional[Sequence[str]] = None) -> Theorem:
        game, stale = _run(checked, frozenset())
        if stale:
            game, _ = _run(checked, frozenset(stale))
        postcondition = checked.postcondition(selected)
        theorem = Theorem(_strip_concluded(game, postcondition), postcondition)
        logger.debug("reified %s with %d snapshot(s)", checked.name, len(stale))
        return theorem

    @staticmethod
    def render(theorem: Theorem) -> str:
        return print_formula(theorem.formula)
