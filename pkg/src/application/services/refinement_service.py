"""
Application Layer - Refinement Service

Decides whether the game a strategy plays refines a target game, and answers
`proves` queries with it.

Key principles:
- Polarity-aware: under an even number of duals a node must satisfy
  [strategy]φ -> [target]φ, under an odd number <strategy>φ -> <target>φ
- A test owned by Angel may be dropped from the strategy, a test owned by
  Demon may be dropped from the target
- Tests and ODE domains compare by arithmetic implication: a Demon test of
  the target must imply the strategy's, an Angel test of the strategy must
  imply the target's. Unknown verdicts fail conservatively
- Algebraic rewrites (dual cancellation, dual distribution over sequences,
  factoring choices) are bounded per node pair by the rewrite budget
- Sequences of different shapes are aligned greedily by node kind, with one
  backtrack per chain
"""

import logging
from typing import FrozenSet, List, Optional, Sequence, Tuple

from src.application.services.arithmetic_service import ArithmeticService
from src.domain.entities import (
    Assign,
    Box,
    CheckedDocument,
    Choice,
    Compare,
    CompareOp,
    Dual,
    Formula,
    Game,
    Implies,
    Loop,
    Ode,
    Polarity,
    ProvesOutcome,
    RandomAssign,
    RefinementStep,
    RefinementTrace,
    StepKind,
    Term,
    Test,
    Theorem,
    TrueF,
    Var,
)
from src.domain.entities.analysis import expand_definitions
from src.domain.entities.game import Sequence as SequenceGame, choice, sequence
from src.domain.entities.node import Node, walk
from src.domain.exceptions import CheckerError, RefinementError
from src.infrastructure.config import CheckerSettings, get_settings
from src.infrastructure.parsing import print_formula, print_game, print_term

logger = logging.getLogger(__name__)


def flip(polarity: Polarity) -> Polarity:
    return Polarity.ANGELIC if polarity == Polarity.DEMONIC else Polarity.DEMONIC


def _describe(game: Game) -> str:
    text = print_game(game)
    return text if len(text) <= 60 else text[:57] + "..."


def _peel(game: Game, polarity: Polarity) -> Tuple[Game, Polarity]:
    while isinstance(game, Dual):
        game, polarity = game.body, flip(polarity)
    return game, polarity


def _kind(game: Game, polarity: Polarity) -> Tuple[str, Polarity]:
    inner, owner = _peel(game, polarity)
    if isinstance(inner, Assign):
        return ("Assign", Polarity.DEMONIC)
    return (type(inner).__name__, owner)


def _factor(game: Choice) -> Optional[Game]:
    """(a; b) ++ (a; c) as a; (b ++ c), or (a; c) ++ (b; c) as (a ++ b); c"""
    chains = [list(b.items) if isinstance(b, SequenceGame) else [b] for b in game.branches]
    if any(len(chain) < 2 for chain in chains):
        return None
    if all(chain[0] == chains[0][0] for chain in chains):
        return sequence([chains[0][0], choice(sequence(chain[1:]) for chain in chains)])
    if all(chain[-1] == chains[0][-1] for chain in chains):
        return sequence([choice(sequence(chain[:-1]) for chain in chains), chains[0][-1]])
    return None


def read_target(target: Formula) -> Box:
    """`A -> [α]φ` is read as `[?A; α]φ`"""
    if isinstance(target, Implies):
        inner = read_target(target.right)
        return Box(sequence([Test(target.left), inner.game]), inner.post, span=target.span)
    if isinstance(target, Box):
        return target
    raise RefinementError(
        "proves needs a target of the form [game] formula",
        target.span,
        hint="write the target as \"[α]φ\" or \"A -> [α]φ\"",
    )


class _Mismatch(Exception):
    def __init__(self, reason: str, game: Game, progress: int = 0):
        super().__init__(reason)
        self.reason = reason
        self.game = game
        self.progress = progress


class _Refiner:
    def __init__(self, arithmetic: ArithmeticService, budget: int, target_names: FrozenSet[str]):
        self.arithmetic = arithmetic
        self.budget = budget
        self.target_names = target_names
        self.steps: List[RefinementStep] = []

    def step(self, kind: StepKind, detail: str, game: Game) -> None:
        self.steps.append(RefinementStep(kind, detail, game.span))

    # ------------------------------------------------------------------
    # Arithmetic side conditions
    # ------------------------------------------------------------------

    def _implies(self, premise: Formula, conclusion: Formula) -> bool:
        if isinstance(conclusion, TrueF) or premise == conclusion:
            return True
        try:
            return self.arithmetic.decide([premise], conclusion).is_valid
        except CheckerError as exc:
            logger.debug("refinement side condition undecided: %s", exc)
            return False

    def _same_term(self, left: Term, right: Term) -> bool:
        return left == right or self._implies(TrueF(), Compare(CompareOp.EQ, left, right))

    def _test(self, mine: Formula, theirs: Formula, polarity: Polarity, game: Game) -> None:
        if mine == theirs:
            self.step(StepKind.MATCH, "test", game)
            return
        if polarity == Polarity.DEMONIC:
            premise, conclusion = theirs, mine
        else:
            premise, conclusion = mine, theirs
        if not self._implies(premise, conclusion):
            raise _Mismatch(
                f"{print_formula(premise)} does not imply {print_formula(conclusion)}", game
            )
        self.step(
            StepKind.TEST_STRENGTHEN,
            f"{print_formula(premise)} implies {print_formula(conclusion)}",
            game,
        )

    # ------------------------------------------------------------------
    # Sequences
    # ------------------------------------------------------------------

    def _items(self, game: Game) -> List[Game]:
        if not isinstance(game, SequenceGame):
            return [game]
        flat = sequence(game.items)
        items = list(flat.items) if isinstance(flat, SequenceGame) else [flat]
        if len(items) != len(game.items):
            self.step(StepKind.REASSOCIATE, "flatten nested sequence", game)
        return items

    def _strategy_droppable(self, game: Game, polarity: Polarity) -> Optional[StepKind]:
        inner, owner = _peel(game, polarity)
        if isinstance(inner, Test):
            if isinstance(inner.condition, TrueF) or owner == Polarity.ANGELIC:
                return StepKind.DROP_TEST
        if isinstance(inner, Assign) and inner.var.name not in self.target_names:
            return StepKind.GHOST_ERASE
        return None

    @staticmethod
    def _target_droppable(game: Game, polarity: Polarity) -> bool:
        inner, owner = _peel(game, polarity)
        return isinstance(inner, Test) and (
            isinstance(inner.condition, TrueF) or owner == Polarity.DEMONIC
        )

    def align(self, mine: Sequence[Game], theirs: Sequence[Game], polarity: Polarity) -> None:
        backtracks = [1]

        def options(i: int, j: int) -> List[str]:
            found: List[str] = []
            both = i < len(mine) and j < len(theirs)
            if both and _kind(mine[i], polarity) == _kind(theirs[j], polarity):
                found.append("match")
            if i < len(mine) and self._strategy_droppable(mine[i], polarity):
                found.append("drop-mine")
            if j < len(theirs) and self._target_droppable(theirs[j], polarity):
                found.append("drop-theirs")
            if both and "match" not in found:
                found.append("match")
            return found

        def go(i: int, j: int) -> None:
            if i == len(mine) and j == len(theirs):
                return
            choices = options(i, j)
            if not choices:
                if i < len(mine):
                    raise _Mismatch("strategy plays more than the target", mine[i], i + j)
                raise _Mismatch("target plays more than the strategy", theirs[j], i + j)
            worst: Optional[_Mismatch] = None
            for attempt, choice_ in enumerate(choices):
                if attempt > 0:
                    if backtracks[0] == 0:
                        break
                    backtracks[0] -= 1
                mark = len(self.steps)
                try:
                    if choice_ == "match":
                        self.match(mine[i], theirs[j], polarity)
                        go(i + 1, j + 1)
                    elif choice_ == "drop-mine":
                        kind = self._strategy_droppable(mine[i], polarity) or StepKind.DROP_TEST
                        self.step(kind, f"strategy {_describe(mine[i])}", mine[i])
                        go(i + 1, j)
                    else:
                        self.step(StepKind.DROP_TEST, f"target {_describe(theirs[j])}", theirs[j])
                        go(i, j + 1)
                    return
                except _Mismatch as exc:
                    del self.steps[mark:]
                    exc.progress = max(exc.progress, i + j)
                    if worst is None or exc.progress >= worst.progress:
                        worst = exc
            assert worst is not None
            raise worst

        go(0, 0)

    # ------------------------------------------------------------------
    # Node pairs
    # ------------------------------------------------------------------

    def refine(self, mine: Game, theirs: Game, polarity: Polarity, spent: int = 0) -> None:
        if (
            isinstance(mine, SequenceGame)
            or isinstance(theirs, SequenceGame)
            or self._strategy_droppable(mine, polarity)
            or self._target_droppable(theirs, polarity)
        ) and mine != theirs:
            self.align(self._items(mine), self._items(theirs), polarity)
            return
        self.match(mine, theirs, polarity, spent)

    def _rewrite(self, kind: StepKind, detail: str, game: Game, spent: int) -> int:
        if spent >= self.budget:
            raise _Mismatch(f"rewrite budget of {self.budget} exhausted", game)
        self.step(kind, detail, game)
        return spent + 1

    def match(self, mine: Game, theirs: Game, polarity: Polarity, spent: int = 0) -> None:
        if mine == theirs:
            self.step(StepKind.MATCH, type(mine).__name__.lower(), mine)
            return
        for side, game in (("strategy", mine), ("target", theirs)):
            if isinstance(game, Dual) and isinstance(game.body, Dual):
                spent = self._rewrite(StepKind.DUAL_CANCEL, side, game, spent)
                if side == "strategy":
                    self.refine(game.body.body, theirs, polarity, spent)
                    return
                self.refine(mine, game.body.body, polarity, spent)
                return
        if isinstance(mine, Dual) and isinstance(theirs, Dual):
            self.refine(mine.body, theirs.body, flip(polarity))
            return
        if isinstance(mine, Dual) and isinstance(mine.body, SequenceGame):
            spent = self._rewrite(StepKind.DISTRIBUTE, "dual over strategy sequence", mine, spent)
            self.refine(sequence(Dual(g) for g in mine.body.items), theirs, polarity, spent)
            return
        if isinstance(theirs, Dual) and isinstance(theirs.body, SequenceGame):
            spent = self._rewrite(StepKind.DISTRIBUTE, "dual over target sequence", theirs, spent)
            self.refine(mine, sequence(Dual(g) for g in theirs.body.items), polarity, spent)
            return
        if isinstance(mine, Assign) and isinstance(theirs, Dual):
            spent = self._rewrite(StepKind.DUAL_CANCEL, "assignment is its own dual", mine, spent)
            self.refine(mine, theirs.body, flip(polarity), spent)
            return
        if isinstance(theirs, Assign) and isinstance(mine, Dual):
            spent = self._rewrite(StepKind.DUAL_CANCEL, "assignment is its own dual", theirs, spent)
            self.refine(mine.body, theirs, flip(polarity), spent)
            return
        if isinstance(mine, Choice) and not isinstance(theirs, Choice):
            factored = _factor(mine)
            if factored is not None:
                spent = self._rewrite(StepKind.DISTRIBUTE, "factor strategy choice", mine, spent)
                self.refine(factored, theirs, polarity, spent)
                return
        if isinstance(theirs, Choice) and not isinstance(mine, Choice):
            factored = _factor(theirs)
            if factored is not None:
                spent = self._rewrite(StepKind.DISTRIBUTE, "factor target choice", theirs, spent)
                self.refine(mine, factored, polarity, spent)
                return
        self._node(mine, theirs, polarity)

    def _node(self, mine: Game, theirs: Game, polarity: Polarity) -> None:
        if isinstance(mine, Test) and isinstance(theirs, Test):
            self._test(mine.condition, theirs.condition, polarity, mine)
            return
        if isinstance(mine, Assign) and isinstance(theirs, Assign):
            if mine.var != theirs.var or not self._same_term(mine.value, theirs.value):
                raise _Mismatch(
                    f"strategy assigns {mine.var} := {print_term(mine.value)}, "
                    f"target assigns {theirs.var} := {print_term(theirs.value)}",
                    mine,
                )
            self.step(StepKind.MATCH, "assignment", mine)
            return
        if isinstance(mine, (Assign, RandomAssign)) and isinstance(theirs, (Assign, RandomAssign)):
            self._assignments(mine, theirs, polarity)
            return
        if isinstance(mine, Loop) and isinstance(theirs, Loop):
            self.step(StepKind.MATCH, "loop", mine)
            self.refine(mine.body, theirs.body, polarity)
            return
        if isinstance(mine, Choice) and isinstance(theirs, Choice):
            self._choice(mine, theirs, polarity)
            return
        if isinstance(mine, Ode) and isinstance(theirs, Ode):
            self._ode(mine, theirs, polarity)
            return
        raise _Mismatch(
            f"strategy plays {_describe(mine)} where the target plays {_describe(theirs)}", mine
        )

    def _assignments(self, mine: Game, theirs: Game, polarity: Polarity) -> None:
        mine_var: Var = mine.var  # type: ignore[attr-defined]
        theirs_var: Var = theirs.var  # type: ignore[attr-defined]
        if mine_var != theirs_var:
            raise _Mismatch(f"strategy assigns {mine_var}, target assigns {theirs_var}", mine)
        if isinstance(mine, RandomAssign) and isinstance(theirs, RandomAssign):
            self.step(StepKind.MATCH, "random assignment", mine)
            return
        if isinstance(mine, Assign) and polarity == Polarity.ANGELIC:
            self.step(StepKind.ASSIGN_REFINES_RANDOM, f"{mine_var} := {print_term(mine.value)}", mine)
            return
        if isinstance(mine, RandomAssign) and polarity == Polarity.DEMONIC:
            self.step(StepKind.ASSIGN_REFINES_RANDOM, f"Demon chooses {mine_var}", mine)
            return
        raise _Mismatch(
            f"{_describe(mine)} does not play {_describe(theirs)} for "
            f"{'Angel' if polarity == Polarity.ANGELIC else 'Demon'}",
            mine,
        )

    def _choice(self, mine: Choice, theirs: Choice, polarity: Polarity) -> None:
        # Demon's choice: every target branch needs a strategy branch playing it.
        # Angel's choice: every strategy branch must play some target branch.
        if polarity == Polarity.DEMONIC:
            required, offered, role = theirs.branches, mine.branches, "target"
        else:
            required, offered, role = mine.branches, theirs.branches, "strategy"
        self.step(StepKind.MATCH, "choice", mine)
        for index, wanted in enumerate(required):
            for candidate in offered:
                mark = len(self.steps)
                try:
                    if role == "target":
                        self.refine(candidate, wanted, polarity)
                    else:
                        self.refine(wanted, candidate, polarity)
                    break
                except _Mismatch:
                    del self.steps[mark:]
            else:
                raise _Mismatch(
                    f"no counterpart for {role} branch {index + 1} ({_describe(wanted)})", wanted
                )

    def _ode(self, mine: Ode, theirs: Ode, polarity: Polarity) -> None:
        mine_rhs = {eq.var.base: eq.rhs for eq in mine.equations}
        theirs_rhs = {eq.var.base: eq.rhs for eq in theirs.equations}
        if set(mine_rhs) != set(theirs_rhs):
            raise _Mismatch("ODEs evolve different variables", mine)
        for var, rhs in mine_rhs.items():
            if not self._same_term(rhs, theirs_rhs[var]):
                raise _Mismatch(f"ODEs differ in the equation for {var}'", mine)
        self.step(StepKind.MATCH, "ode", mine)
        self._test(mine.domain, theirs.domain, polarity, mine)


class RefinementService:
    """
    Service deciding refinement between games and answering `proves`.

    Incomplete by nature: a failed refinement means no admitted rewrite
    made the games line up within the budget.
    """

    def __init__(
        self,
        arithmetic: Optional[ArithmeticService] = None,
        settings: Optional[CheckerSettings] = None,
    ):
        self.settings = settings or get_settings()
        self.arithmetic = arithmetic or ArithmeticService(self.settings)

    def refines(
        self, strategy: Game, target: Game, post: Optional[Formula] = None
    ) -> RefinementTrace:
        """Refinement of the target by the strategy, under the target postcondition"""
        scope: List[Node] = [target] if post is None else [target, post]
        names = frozenset(v.name for g in scope for v in walk(g) if isinstance(v, Var))
        refiner = _Refiner(self.arithmetic, self.settings.rewrite_budget, names)
        try:
            refiner.refine(strategy, target, Polarity.DEMONIC)
        except _Mismatch as exc:
            refiner.steps.append(RefinementStep(StepKind.FAILURE, exc.reason, exc.game.span))
        return RefinementTrace(refiner.steps)

    def proves(self, checked: CheckedDocument, theorem: Theorem, target: Formula) -> ProvesOutcome:
        definitions = checked.elaborated.definitions
        goal = read_target(expand_definitions(target, definitions))
        game = expand_definitions(theorem.game, definitions)
        trace = self.refines(game, goal.game, goal.post)
        outcome = ProvesOutcome(target, trace)
        if not trace.ok:
            logger.info("proves %s: %s", checked.name, outcome.describe())
            return outcome
        try:
            outcome.postcondition = self.arithmetic.decide([theorem.postcondition], goal.post)
        except CheckerError as exc:
            outcome.message = f"postcondition check failed: {exc.message}"
            return outcome
        if not outcome.postcondition.is_valid:
            outcome.message = (
                f"postcondition {print_formula(theorem.postcondition)} does not imply "
                f"{print_formula(goal.post)}: {outcome.postcondition.describe()}"
            )
        logger.info("proves %s: %s", checked.name, outcome.describe())
        return outcome
