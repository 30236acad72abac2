"""
Application Layer - Proof Checking Service

Walks an elaborated document statement by statement, threading the fact
context, and sends every assertion, invariant and ODE obligation to the
arithmetic backend or the ODE engine.

Key principles:
- Checking never stops at the first failure: a failed assertion is still
  bound as a fact, so one run reports every failed obligation
- Assumptions are Demon's burden and are bound unchecked
- Plain facts never mention a variable assigned in a forward ghost; their
  proofs may use ghost facts
- Inverse-ghost facts are usable only inside inverse ghosts
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

import sympy

from src.application.services.arithmetic_service import ArithmeticService
from src.application.services.elaboration_service import written_variants
from src.application.services.ode_service import OdeEngine
from src.application.services.proof_terms import evaluate, resolve_using
from src.application.services.symbolic import SymbolTable, from_sympy, to_sympy
from src.domain.entities import (
    Add,
    And,
    Assert,
    Assume,
    Block,
    CheckedDocument,
    Compare,
    CompareOp,
    Context,
    DemonicChoice,
    DemonicLoop,
    ElaboratedDocument,
    FactKind,
    FalseF,
    ForLoop,
    Formula,
    ForwardGhost,
    Frame,
    FrameKind,
    Goal,
    Iff,
    Implies,
    InverseGhost,
    LabelStmt,
    Let,
    LoopInvariant,
    MethodKind,
    Modify,
    NamedFormula,
    Note,
    Not,
    Num,
    Obligation,
    OdeProof,
    Or,
    Print,
    Statement,
    Sub,
    Switch,
    Term,
    TrueF,
    Var,
    Verdict,
)
from src.domain.entities.analysis import free_variables
from src.domain.entities.formula import FALSE, TRUE, conjuncts, disjoin, disjuncts
from src.domain.entities.node import GhostStatus, Node, walk
from src.domain.exceptions import CheckerError, ProofError
from src.infrastructure.config import CheckerSettings, get_settings
from src.infrastructure.parsing import print_node
from src.infrastructure.solvers import render

logger = logging.getLogger(__name__)


# ============================================================================
# Forward-ghost variants
# ============================================================================

def forward_ghost_variants(statements: Sequence[Statement]) -> FrozenSet[Var]:
    """
    Variants assigned inside forward ghosts, including forward-ghost ODE
    equations, closed under merges and loop entries that carry them on.
    """
    ghosts: Set[Var] = set()

    def visit(stmts: Sequence[Statement], inside: bool) -> None:
        for stmt in stmts:
            if isinstance(stmt, ForwardGhost):
                visit(stmt.body, True)
            elif isinstance(stmt, InverseGhost):
                visit(stmt.body, inside)
            elif isinstance(stmt, Modify):
                if inside and not stmt.merge:
                    ghosts.add(stmt.var)
            elif isinstance(stmt, OdeProof):
                ghosts.update(
                    eq.var for eq in stmt.equations
                    if inside or eq.ghost == GhostStatus.FORWARD
                )
            elif isinstance(stmt, Block):
                visit(stmt.statements, inside)
            elif isinstance(stmt, DemonicChoice):
                for branch in stmt.branches:
                    visit(branch.statements, inside)
            elif isinstance(stmt, Switch):
                for case in stmt.cases:
                    visit(case.body, inside)
            elif isinstance(stmt, DemonicLoop):
                visit(stmt.body, inside)
            elif isinstance(stmt, ForLoop):
                visit((stmt.init,), inside)
                visit(stmt.body, inside)
                visit((stmt.increment,), inside)

    visit(statements, False)

    carriers: List[Tuple[Var, Var]] = []
    for node in walk(Block(tuple(statements))):
        if isinstance(node, Modify) and node.merge and isinstance(node.value, Var):
            carriers.append((node.value, node.var))
        elif isinstance(node, (DemonicLoop, ForLoop)):
            carriers.extend(node.entry)
    changed = True
    while changed:
        changed = False
        for source, target in carriers:
            if source in ghosts and target not in ghosts:
                ghosts.add(target)
                changed = True
    return frozenset(ghosts)


# ============================================================================
# Guards and loop exits
# ============================================================================

def weaken_negation(guard: Formula, delta: Term) -> Formula:
    """
    What a for loop learns when it stops: the negated guard, weakened by a
    margin delta. `f <= g` fails as `f >= g - delta`, `f >= g` as
    `f <= g + delta`.
    """
    if isinstance(guard, TrueF):
        return FALSE
    if isinstance(guard, FalseF):
        return TRUE
    if isinstance(guard, And):
        return Or(weaken_negation(guard.left, delta), weaken_negation(guard.right, delta))
    if isinstance(guard, Or):
        return And(weaken_negation(guard.left, delta), weaken_negation(guard.right, delta))
    if isinstance(guard, Compare):
        if guard.op in (CompareOp.LE, CompareOp.LT):
            return Compare(CompareOp.GE, guard.left, Sub(guard.right, delta), span=guard.span)
        if guard.op in (CompareOp.GE, CompareOp.GT):
            return Compare(CompareOp.LE, guard.left, Add(guard.right, delta), span=guard.span)
    raise ProofError(
        "loop guards are conjunctions and disjunctions of inequalities",
        guard.span,
        hint="exact (dis)equalities cannot be decided when the loop stops",
    )


def strict_interior(formula: Formula, negated: bool = False) -> Formula:
    """
    The guard in negation normal form with every comparison made strict.

    Equalities have no interior. Atoms the arithmetic cannot see into are
    kept as they are.
    """
    if isinstance(formula, Not):
        return strict_interior(formula.operand, not negated)
    if isinstance(formula, TrueF):
        return FALSE if negated else TRUE
    if isinstance(formula, FalseF):
        return TRUE if negated else FALSE
    if isinstance(formula, And):
        kind = Or if negated else And
        return kind(strict_interior(formula.left, negated), strict_interior(formula.right, negated))
    if isinstance(formula, Or):
        kind = And if negated else Or
        return kind(strict_interior(formula.left, negated), strict_interior(formula.right, negated))
    if isinstance(formula, Implies):
        if negated:
            return And(strict_interior(formula.left), strict_interior(formula.right, True))
        return Or(strict_interior(formula.left, True), strict_interior(formula.right))
    if isinstance(formula, Iff):
        left, right = formula.left, formula.right
        if negated:
            return Or(
                And(strict_interior(left), strict_interior(right, True)),
                And(strict_interior(left, True), strict_interior(right)),
            )
        return Or(
            And(strict_interior(left), strict_interior(right)),
            And(strict_interior(left, True), strict_interior(right, True)),
        )
    if isinstance(formula, Compare):
        op = formula.op.negated() if negated else formula.op
        if op == CompareOp.GE:
            return Compare(CompareOp.GT, formula.left, formula.right)
        if op == CompareOp.LE:
            return Compare(CompareOp.LT, formula.left, formula.right)
        if op == CompareOp.EQ:
            return FALSE
        if op == CompareOp.NE:
            return Or(
                Compare(CompareOp.LT, formula.left, formula.right),
                Compare(CompareOp.GT, formula.left, formula.right),
            )
        return Compare(op, formula.left, formula.right)
    return Not(formula) if negated else formula


def _positive_constant(formula: Formula) -> Optional[Var]:
    """v in `v > 0`, `0 < v` or `v >= k` with k > 0"""
    if not isinstance(formula, Compare):
        return None
    left, right, op = formula.left, formula.right, formula.op
    if isinstance(left, Num) and isinstance(right, Var):
        left, right, op = right, left, op.mirrored()
    if not (isinstance(left, Var) and isinstance(right, Num)):
        return None
    if op == CompareOp.GT and right.value >= 0:
        return left
    if op == CompareOp.GE and right.value > 0:
        return left
    return None


@dataclass(frozen=True)
class _LoopExit:
    """The guard of the most recent for loop, at its merge state"""

    guard: Formula
    written: FrozenSet[Var]


# ============================================================================
# Statement checker
# ============================================================================

class _Checker:
    """Checks one document; implements the ODE engine's ObligationProver"""

    def __init__(
        self,
        service: "ProofCheckingService",
        elaborated: ElaboratedDocument,
    ):
        self.service = service
        self.arithmetic = service.arithmetic
        self.elaborated = elaborated
        self.ctx = Context()
        self.obligations: List[Obligation] = []
        self.errors: List[CheckerError] = []
        self.prints: List[str] = []
        self.ghosts = forward_ghost_variants(elaborated.statements)
        self.exit: Optional[_LoopExit] = None

    # ------------------------------------------------------------------
    # ObligationProver
    # ------------------------------------------------------------------

    def select(self, stmt: Assert, conclusion: Formula) -> List[NamedFormula]:
        explicit, with_defaults = resolve_using(stmt.using, self.ctx)
        return self.arithmetic.select_assumptions(self.ctx, conclusion, explicit, with_defaults)

    def discharge(self, name: str, goal: Goal, kind: str) -> bool:
        started = time.perf_counter()
        try:
            certificate = self.arithmetic.check_validity(goal)
        except CheckerError as exc:
            self.report(exc.with_span(goal.span))
            return False
        elapsed = (time.perf_counter() - started) * 1000.0
        obligation = Obligation(name, goal, certificate, kind, elapsed)
        if certificate.outcome == Verdict.UNKNOWN:
            obligation.smtlib = self._smtlib(name, goal)
        self.obligations.append(obligation)
        logger.debug(
            "%s %s: %s in %.1f ms", obligation.location, name, certificate.describe(), elapsed
        )
        return certificate.is_valid

    def report(self, error: CheckerError) -> None:
        logger.debug("error: %s", error.message)
        self.errors.append(error)

    @staticmethod
    def _smtlib(name: str, goal: Goal) -> str:
        hypotheses = [h.formula for h in goal.hypotheses]
        hypotheses += [Compare(CompareOp.EQ, var, value) for var, value in goal.definitions]
        location = str(goal.span) if goal.span is not None else ""
        return render(hypotheses, goal.conclusion, f"{name} {location}".strip())

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    @contextmanager
    def _frame(self, kind: FrameKind) -> Iterator[Frame]:
        frame = self.ctx.enter(kind)
        try:
            yield frame
        finally:
            self.ctx.leave()

    def _export(self, frame: Frame) -> None:
        for entry in frame.entries:
            self.ctx.export(entry)

    def _leaked(self, node: Node) -> List[str]:
        if self.ctx.inside_forward_ghost:
            return []
        return sorted({v.name for v in free_variables(node) & self.ghosts})

    def _require_plain(self, node: Node, what: str, span) -> None:
        leaked = self._leaked(node)
        if leaked:
            raise ProofError(
                f"{what} mentions forward-ghost variable {', '.join(leaked)}",
                span,
                hint="only other forward ghosts may depend on ghost variables; wrap it in /++ ... ++/",
            )

    def _goal(
        self,
        name: str,
        conclusion: Formula,
        hypotheses: Sequence[NamedFormula],
        span,
        method: MethodKind = MethodKind.AUTO,
    ) -> Goal:
        return Goal(
            tuple(hypotheses), conclusion, method,
            definitions=tuple(self.ctx.definitions()), label=name, span=span,
        )

    def _quietly(self, name: str, goal: Goal, kind: str) -> bool:
        """Try a goal, recording the obligation only when it is valid"""
        try:
            certificate = self.arithmetic.check_validity(goal)
        except CheckerError:
            return False
        if certificate.is_valid:
            self.obligations.append(Obligation(name, goal, certificate, kind))
        return certificate.is_valid

    # ------------------------------------------------------------------
    # Statements
    # ------------------------------------------------------------------

    def check_all(self, statements: Sequence[Statement]) -> None:
        for stmt in statements:
            try:
                self.check_statement(stmt)
            except CheckerError as exc:
                self.report(exc.with_span(stmt.span))

    def check_statement(self, stmt: Statement) -> None:
        if isinstance(stmt, Assume):
            self._require_plain(stmt.formula, f"assumption {stmt.name}", stmt.span)
            self.ctx.bind(stmt.name, stmt.formula, FactKind.ASSUMPTION)
        elif isinstance(stmt, Assert):
            self._assert(stmt)
        elif isinstance(stmt, Modify):
            self._modify(stmt)
        elif isinstance(stmt, Block):
            with self._frame(FrameKind.BLOCK) as frame:
                self.check_all(stmt.statements)
            self._export(frame)
        elif isinstance(stmt, DemonicChoice):
            self._branches([branch.statements for branch in stmt.branches], [None] * len(stmt.branches))
        elif isinstance(stmt, Switch):
            self._switch(stmt)
        elif isinstance(stmt, ForwardGhost):
            with self._frame(FrameKind.FORWARD_GHOST) as frame:
                self.check_all(stmt.body)
            self._export(frame)
        elif isinstance(stmt, InverseGhost):
            with self._frame(FrameKind.INVERSE_GHOST) as frame:
                self.check_all(stmt.body)
            self._export(frame)
        elif isinstance(stmt, OdeProof):
            self._ode(stmt)
        elif isinstance(stmt, DemonicLoop):
            self._demonic_loop(stmt)
        elif isinstance(stmt, ForLoop):
            self._for_loop(stmt)
        elif isinstance(stmt, Note):
            formula = evaluate(stmt.proof, self.ctx)
            self._require_plain(formula, f"note {stmt.name}", stmt.span)
            self.ctx.bind(stmt.name, formula, FactKind.NOTE)
        elif isinstance(stmt, Print):
            self.prints.append(print_node(stmt.expr))
        elif isinstance(stmt, (Let, LabelStmt)):
            pass
        else:
            raise ProofError(f"unexpected statement {type(stmt).__name__}", stmt.span)

    def _assert(self, stmt: Assert) -> None:
        name = stmt.name or "assertion"
        try:
            self._require_plain(stmt.formula, f"assertion {name}", stmt.span)
            method = stmt.method.kind if stmt.method is not None else MethodKind.AUTO
            if method == MethodKind.GUARD:
                self._guard(stmt)
            elif method in (MethodKind.SOLUTION, MethodKind.INDUCTION):
                raise ProofError(
                    f"method {method.value} only applies to assertions inside an ODE",
                    stmt.span,
                )
            else:
                hypotheses = self.select(stmt, stmt.formula)
                self.discharge(name, self._goal(name, stmt.formula, hypotheses, stmt.span, method), "assertion")
        finally:
            self.ctx.bind(stmt.name, stmt.formula, FactKind.ASSERTION)

    def _modify(self, stmt: Modify) -> None:
        if stmt.value is None:
            return
        if not stmt.merge and stmt.var not in self.ghosts:
            self._require_plain(stmt.value, f"assignment to {stmt.var.name}", stmt.span)
        self.ctx.define(stmt.var, stmt.value)
        if stmt.name is not None:
            self.ctx.bind(stmt.name, Compare(CompareOp.EQ, stmt.var, stmt.value), FactKind.ASSERTION)

    def _ode(self, stmt: OdeProof) -> None:
        for eq in stmt.equations:
            if eq.ghost == GhostStatus.PLAIN:
                self._require_plain(eq.rhs, f"equation {eq.var.name}'", eq.span)
        self.service.ode_engine.check(stmt, self.ctx, self, self.ghosts)

    # ------------------------------------------------------------------
    # Choices and switches
    # ------------------------------------------------------------------

    def _branches(
        self,
        bodies: Sequence[Sequence[Statement]],
        guards: Sequence[Optional[Tuple[str, Formula]]],
    ) -> None:
        frames: List[Frame] = []
        for body, guard in zip(bodies, guards):
            with self._frame(FrameKind.BRANCH) as frame:
                if guard is not None:
                    self.ctx.bind(guard[0], guard[1], FactKind.ASSUMPTION)
                self.check_all(body)
            frames.append(frame)
        self.ctx.join(frames)

    def _switch(self, stmt: Switch) -> None:
        guards = [case.guard for case in stmt.cases]
        for case in stmt.cases:
            self._require_plain(case.guard, "switch guard", case.span)
        try:
            if stmt.scrutinee is not None:
                self._scrutinee(stmt, guards)
            else:
                self._totality(stmt, guards)
        except CheckerError as exc:
            self.report(exc.with_span(stmt.span))
        self._branches(
            [case.body for case in stmt.cases],
            [(case.guard_name or "_guard", case.guard) for case in stmt.cases],
        )

    def _scrutinee(self, stmt: Switch, guards: List[Formula]) -> None:
        assert stmt.scrutinee is not None
        fact = evaluate(stmt.scrutinee, self.ctx)
        cases = list(disjuncts(fact))
        if len(cases) != len(guards) or set(cases) != set(guards):
            raise ProofError(
                "switch cases must be the disjuncts of the scrutinee, in any order",
                stmt.span,
                hint=f"the scrutinee proves {print_node(fact)}",
            )

    def _totality(self, stmt: Switch, guards: List[Formula]) -> None:
        """Some case must be decidably true: the strict interiors cover everything"""
        if any(isinstance(g, TrueF) for g in guards):
            return
        cover = disjoin(strict_interior(g) for g in guards)
        hypotheses = self.arithmetic.select_default_assumptions(self.ctx, cover)
        goal = self._goal("switch totality", cover, hypotheses, stmt.span)
        certificate = self.arithmetic.decide(
            [h.formula for h in goal.hypotheses], cover, goal.definitions
        )
        if certificate.is_valid:
            self.obligations.append(Obligation("switch totality", goal, certificate, "switch"))
            return
        region = ""
        if certificate.outcome == Verdict.COUNTEREXAMPLE:
            region = " (uncovered: " + ", ".join(
                f"{v} = {value}" for v, value in certificate.counterexample
            ) + ")"
        raise ProofError(
            f"switch cases are not exhaustive with a margin{region}",
            stmt.span,
            hint="comparisons are inexact: overlap the guards, e.g. x >= 0 and x <= delta "
                 "with delta > 0, or add `case true`",
        )

    # ------------------------------------------------------------------
    # Loops
    # ------------------------------------------------------------------

    def _tail_fact(self, statements: Sequence[Statement]) -> Optional[Formula]:
        """The formula of the last fact a statement list establishes"""
        for stmt in reversed(statements):
            if isinstance(stmt, (LabelStmt, Print, Let)):
                continue
            if isinstance(stmt, Modify) and stmt.merge:
                continue
            if isinstance(stmt, (Assert, Assume)):
                return stmt.formula
            if isinstance(stmt, Note):
                entry = self.ctx.lookup(stmt.name)
                return entry.formula if entry is not None else None
            if isinstance(stmt, (ForwardGhost, Block)):
                body = stmt.body if isinstance(stmt, ForwardGhost) else stmt.statements
                return self._tail_fact(body)
            return None
        return None

    def _reestablished(self, invariant: LoopInvariant, tail: Optional[Formula], span) -> None:
        name = invariant.name
        if tail is None:
            raise ProofError(
                f"the loop body must end with a proof of invariant {name}",
                span,
                hint="assert the invariant as the last statement of the body",
            )
        if tail == invariant.at_end:
            return
        goal = self._goal(
            f"{name} (re-established)", invariant.at_end, [NamedFormula("_tail", tail)], span
        )
        if not self.discharge(f"{name} (re-established)", goal, "invariant"):
            raise ProofError(
                f"the last fact of the loop body does not establish invariant {name}",
                span,
            )

    def _demonic_loop(self, stmt: DemonicLoop) -> None:
        invariant = stmt.invariant
        if invariant is None:
            raise ProofError(
                "a Demonic loop needs its invariant proved right before it",
                stmt.span,
                hint="assert the invariant (the base case) immediately before {...}*",
            )
        entry = self.ctx.lookup(invariant.name)
        status = entry.status if entry is not None else self.ctx.status
        with self._frame(FrameKind.LOOP_BODY):
            self.ctx.bind(invariant.name, invariant.at_merge, FactKind.ASSUMPTION, status)
            self.check_all(stmt.body)
            self._reestablished(invariant, self._tail_fact(stmt.body), stmt.span)
        self.ctx.rebind(invariant.name, invariant.at_merge, status)

    def _for_loop(self, stmt: ForLoop) -> None:
        self._modify(stmt.init)
        if stmt.invariant.method is not None and stmt.invariant.method.kind == MethodKind.GUARD:
            self.report(ProofError(
                "a loop invariant cannot be proved by guard",
                stmt.invariant.span,
                hint="the guard margin is only known once the loop stops",
            ))
            self.ctx.bind(stmt.invariant.name, stmt.invariant.formula, FactKind.ASSERTION)
        else:
            self._assert(stmt.invariant)
        invariant = stmt.loop_invariant
        assert invariant is not None
        written = frozenset(
            {merge for _, merge in stmt.entry}
            | {v for s in stmt.body for v in written_variants(s)}
            | {stmt.increment.var}
        )
        try:
            self._require_plain(stmt.guard.formula, "loop guard", stmt.guard.span)
            self._termination(stmt, written)
        except CheckerError as exc:
            self.report(exc.with_span(stmt.span))

        entry = self.ctx.lookup(invariant.name)
        status = entry.status if entry is not None else self.ctx.status
        with self._frame(FrameKind.LOOP_BODY):
            self.ctx.bind(invariant.name, invariant.at_merge, FactKind.ASSUMPTION, status)
            self.ctx.bind(stmt.guard.name, stmt.guard.formula, FactKind.ASSUMPTION)
            self.check_all(stmt.body)
            tail = self._tail_fact(stmt.body)
            self._modify(stmt.increment)
            self._reestablished(invariant, tail, stmt.span)
        self.ctx.rebind(invariant.name, invariant.at_merge, status)
        self.exit = _LoopExit(stmt.guard.formula, written)

    def _termination(self, stmt: ForLoop, written: FrozenSet[Var]) -> None:
        """The index moves by a loop-constant step towards a loop-constant bound"""
        increment = stmt.increment
        assert increment.value is not None
        name = increment.var.name
        read = [v for v in free_variables(increment.value) if v.name == name]
        if len(read) != 1:
            raise ProofError(
                f"the loop update must change {name} by a constant step",
                increment.span,
                hint=f"write {name} := {name} + c or {name} := {name} - c",
            )
        table = SymbolTable()
        index = table.symbol(read[0])
        step_expr = sympy.expand(to_sympy(increment.value, table) - index)
        moving = {table.symbol(v) for v in written}
        if index in step_expr.free_symbols or step_expr.free_symbols & moving:
            raise ProofError(
                f"the loop update of {name} is not a constant step",
                increment.span,
                hint="the step may only mention values the loop never changes",
            )
        step = from_sympy(step_expr, table)
        increasing = self._sign(step, CompareOp.GT, stmt)
        if not increasing and not self._sign(step, CompareOp.LT, stmt):
            raise ProofError(
                f"the sign of the step of {name} is unknown",
                increment.span,
                hint="the step must be provably positive or provably negative",
            )

        merge = next((m for pre, m in stmt.entry if m.name == name), None)
        if merge is None:
            raise ProofError(f"{name} is not updated by the loop", stmt.span)
        merge_symbol = table.symbol(merge)
        for conjunct in conjuncts(stmt.guard.formula):
            if not isinstance(conjunct, Compare) or conjunct.op in (CompareOp.EQ, CompareOp.NE):
                continue
            expr = sympy.expand(to_sympy(Sub(conjunct.left, conjunct.right), table))
            slope = sympy.diff(expr, merge_symbol)
            if not slope.is_Rational or slope == 0:
                continue
            rest = sympy.expand(expr - slope * merge_symbol)
            if rest.free_symbols & moving:
                continue
            upper = (conjunct.op in (CompareOp.LE, CompareOp.LT)) == (slope > 0)
            if upper == increasing:
                return
        direction = "above" if increasing else "below"
        raise ProofError(
            f"the guard does not bound {name} {direction} by a loop-constant term",
            stmt.guard.span,
            hint=f"add a conjunct bounding {name} {direction} so the loop terminates",
        )

    def _sign(self, step: Term, op: CompareOp, stmt: ForLoop) -> bool:
        claim = Compare(op, step, Num(Fraction(0)))
        hypotheses = self.arithmetic.select_default_assumptions(self.ctx, claim)
        goal = self._goal("loop step sign", claim, hypotheses, stmt.increment.span)
        return self._quietly("loop step sign", goal, "termination")

    # ------------------------------------------------------------------
    # guard method
    # ------------------------------------------------------------------

    def _delta(self, stmt: Assert) -> Term:
        assert stmt.method is not None
        if stmt.method.delta is not None:
            return stmt.method.delta
        mentioned = free_variables(stmt.formula)
        candidates: Set[Var] = set()
        for entry in self.ctx.facts():
            if entry.status == GhostStatus.INVERSE and not self.ctx.inside_inverse_ghost:
                continue
            for part in conjuncts(entry.formula):
                found = _positive_constant(part)
                if found is not None and found not in (self.exit.written if self.exit else ()):
                    candidates.add(found)
        if candidates:
            preferred = sorted(candidates & mentioned, key=str) or sorted(candidates, key=str)
            return preferred[0]
        default = self.service.settings.delta
        if default is not None:
            return Num(default)
        raise ProofError(
            "no positive margin for the guard method",
            stmt.span,
            hint="write guard(delta) with a positive term, or set a default delta",
        )

    def _guard(self, stmt: Assert) -> None:
        name = stmt.name or "assertion"
        if self.exit is None:
            raise ProofError("the guard method needs a preceding for loop", stmt.span)
        delta = self._delta(stmt)
        positive = Compare(CompareOp.GT, delta, Num(Fraction(0)))
        self.discharge(
            f"{name} (margin is positive)",
            self._goal(name, positive, self.arithmetic.select_default_assumptions(self.ctx, positive), stmt.span),
            "guard",
        )
        stopped = NamedFormula("_exit", weaken_negation(self.exit.guard, delta))
        hypotheses = [stopped] + self.select(stmt, stmt.formula)
        self.discharge(name, self._goal(name, stmt.formula, hypotheses, stmt.span), "guard")

    # ------------------------------------------------------------------

    def result(self) -> CheckedDocument:
        return CheckedDocument(
            elaborated=self.elaborated,
            context=self.ctx,
            obligations=self.obligations,
            errors=[e.to_diagnostic() for e in self.errors],
            prints=self.prints,
            ghost_variants=self.ghosts,
        )


# ============================================================================
# Service
# ============================================================================

class ProofCheckingService:
    """
    Service for checking elaborated proof documents.

    Dependencies are injected like the other services: the arithmetic
    backend and the ODE engine are shared across documents.
    """

    def __init__(
        self,
        arithmetic: Optional[ArithmeticService] = None,
        ode_engine: Optional[OdeEngine] = None,
        settings: Optional[CheckerSettings] = None,
    ):
        self.settings = settings or get_settings()
        self.arithmetic = arithmetic or ArithmeticService(self.settings)
        self.ode_engine = ode_engine or OdeEngine(self.arithmetic)

    def check(self, elaborated: ElaboratedDocument) -> CheckedDocument:
        checker = _Checker(self, elaborated)
        checker.check_all(elaborated.statements)
        result = checker.result()
        logger.info(
            "%s: %d obligations, %d failed, %d errors",
            result.name, len(result.obligations), len(result.failed_obligations), len(result.errors),
        )
        return result

    def check_statement(self, stmt: Statement, ctx: Context, elaborated: ElaboratedDocument) -> CheckedDocument:
        """Check one statement against an existing context"""
        checker = _Checker(self, elaborated)
        checker.ctx = ctx
        checker.check_all((stmt,))
        return checker.result()
