"""
Application Layer - ODE Engine

Checks ODE proof statements: solution tables for triangular polynomial
systems, differential induction, differential cuts in source order,
differential ghosts, inverse ghosts and Angelic durations.

Inside the domain, post-state variants stand for the state at an arbitrary
time `_dur` of the evolution. After the ODE they stand for the final state:
solutions become definitions and every domain fact is exported.
"""

import logging
from dataclasses import dataclass
from typing import AbstractSet, Dict, List, Optional, Protocol, Set, Tuple

import sympy

from src.application.services.arithmetic_service import ArithmeticService
from src.application.services.symbolic import SymbolTable, from_sympy, to_sympy
from src.domain.entities import (
    And,
    Assert,
    Assume,
    Compare,
    CompareOp,
    Context,
    FactKind,
    Formula,
    FrameKind,
    Goal,
    MethodKind,
    Modify,
    NamedFormula,
    OdeProof,
    Sub,
    Term,
    Var,
)
from src.domain.entities.analysis import free_variables, substitute
from src.domain.entities.formula import TRUE
from src.domain.entities.node import GhostStatus
from src.domain.entities.ode_system import DomainClause, OdeSystem, Polarity, SolutionTable
from src.domain.entities.source import SourceSpan
from src.domain.entities.term import ZERO
from src.domain.exceptions import CheckerError, ProofError, UnsupportedTermError

logger = logging.getLogger(__name__)


class ObligationProver(Protocol):
    """What the engine needs from the statement checker"""

    def select(self, stmt: Assert, conclusion: Formula) -> List[NamedFormula]:
        """Hypotheses for an assertion: its using list or the defaults"""

    def discharge(self, name: str, goal: Goal, kind: str) -> bool:
        """Check a goal, record the obligation, report failure as a diagnostic"""

    def report(self, error: CheckerError) -> None:
        """Record a failed check and carry on"""


# ============================================================================
# Solutions
# ============================================================================

def solve_system(proof: OdeProof) -> SolutionTable:
    """
    Integrate the solvable part of an elaborated ODE.

    A variable is solvable when its right-hand side depends only on
    constants and on already solved variables, and stays polynomial in the
    duration after substituting their solutions. Inverse-ghost equations are
    left out, so the remaining dimensions may still be solvable.
    """
    if proof.duration is None:
        raise ValueError("ODE proof has not been elaborated")
    system = OdeSystem.from_proof(proof)
    field = system.field(include_inverse=False)
    evolving = set(system.posts)
    depends = {x: free_variables(rhs) & evolving for x, rhs in field.items()}

    table = SymbolTable()
    tau = table.symbol(proof.duration)
    s = sympy.Symbol("_s", real=True)
    solved: Dict[Var, sympy.Expr] = {}
    failed: Set[Var] = set()

    progress = True
    while progress:
        progress = False
        for x in sorted(set(field) - set(solved) - failed, key=str):
            if x in depends[x] or not depends[x] <= set(solved):
                continue
            try:
                rhs = to_sympy(field[x], table)
            except UnsupportedTermError:
                failed.add(x)
                continue
            rhs = rhs.subs({table.symbol(d): solved[d].subs(tau, s) for d in depends[x]})
            rhs = rhs.subs(tau, s)
            if not rhs.is_polynomial(s):
                failed.add(x)
                continue
            start = table.symbol(system.pre_of(x))
            solved[x] = sympy.expand(start + sympy.integrate(rhs, (s, 0, tau)))
            progress = True

    solutions = {x: from_sympy(expr, table) for x, expr in solved.items()}
    logger.debug("solved %d of %d ODE variables", len(solved), len(field))
    return SolutionTable(proof.duration, solutions, complete=len(solved) == len(field))


@dataclass(frozen=True)
class AngelicDuration:
    """Angel's chosen duration: clock post-variant, its pre-variant and the value"""

    name: Optional[str]
    clock: Var
    clock_pre: Var
    value: Term
    span: Optional[SourceSpan] = None

    @property
    def elapsed(self) -> Term:
        return Sub(self.value, self.clock_pre)


def _nonnegative(tau: Var) -> Formula:
    return Compare(CompareOp.GE, tau, ZERO)


class OdeEngine:
    """Service for ODE proofs"""

    def __init__(self, arithmetic: ArithmeticService):
        self.arithmetic = arithmetic

    # ------------------------------------------------------------------
    # Building blocks
    # ------------------------------------------------------------------

    def classify_and_solve(self, system: OdeSystem) -> SolutionTable:
        return solve_system(system.proof)

    def lie_derivative(self, term: Term, field: Dict[Var, Term]) -> Term:
        """Derivative of a term along the ODE, simplified to a quotient"""
        table = SymbolTable()
        expr = to_sympy(term, table)
        total = sympy.Integer(0)
        for var, rhs in field.items():
            total += sympy.diff(expr, table.symbol(var)) * to_sympy(rhs, table)
        numerator, denominator = sympy.fraction(sympy.together(total))
        numerator = sympy.expand(numerator)
        if numerator == 0:
            return ZERO
        return from_sympy(numerator / sympy.expand(denominator), table)

    def check_differential_induction(self, system: OdeSystem, formula: Formula) -> Tuple[Formula, Formula]:
        """
        Base case and inductive step of a differential invariant. Equalities
        need a zero derivative, inequalities a derivative of the right sign;
        strict inequalities use the non-strict step.
        """
        if not isinstance(formula, Compare) or formula.op == CompareOp.NE:
            raise ProofError(
                "differential induction proves a single comparison (=, <=, <, >=, >)",
                formula.span,
                hint="split conjunctions into separate cuts",
            )
        pre = {post: system.pre_of(post) for post in system.posts}
        base = substitute(formula, pre)
        derivative = self.lie_derivative(Sub(formula.left, formula.right), system.field())
        if derivative == ZERO:
            return base, TRUE
        if formula.op == CompareOp.EQ:
            step_op = CompareOp.EQ
        elif formula.op in (CompareOp.GE, CompareOp.GT):
            step_op = CompareOp.GE
        else:
            step_op = CompareOp.LE
        return base, Compare(step_op, derivative, ZERO)

    def check_differential_ghosts(self, system: OdeSystem, initialized: AbstractSet[Var]) -> None:
        """Ghost equations must be linear in their own variable and start from a ghost assignment"""
        for eq in system.equations:
            if eq.ghost != GhostStatus.FORWARD:
                continue
            table = SymbolTable()
            y = table.symbol(eq.var)
            try:
                linear = sympy.Poly(to_sympy(eq.rhs, table), y).degree() <= 1
            except sympy.PolynomialError:
                linear = False
            if not linear:
                raise ProofError(
                    f"right-hand side of ghost {eq.var.name}' is not linear in {eq.var.name}",
                    eq.span,
                    hint="a nonlinear ghost may blow up in finite time",
                )
            if system.pre_of(eq.var) not in initialized:
                raise ProofError(
                    f"ghost variable {eq.var.name} is not initialized before the ODE",
                    eq.span,
                    hint=f"assign {eq.var.name} inside /++ ... ++/ before the ODE",
                )

    def check_angelic_duration(self, system: OdeSystem) -> AngelicDuration:
        """Angel's domain has no assumptions and one duration on a clock"""
        for clause in system.assumptions():
            raise ProofError(
                "assumptions are not allowed in an Angelic ODE domain",
                clause.statement.span,
                hint="Angel proves every domain constraint; assert it with ! instead",
            )
        durations = system.durations()
        if len(durations) > 1:
            raise ProofError("an ODE can have only one duration", durations[1].statement.span)
        stmt = durations[0].statement
        assert isinstance(stmt, Modify) and stmt.value is not None
        clocks = {eq.var for eq in system.clock_equations()}
        if stmt.var not in clocks:
            raise ProofError(
                f"duration variable {stmt.var.name} is not a clock",
                stmt.span,
                hint=f"a clock starts at 0 and evolves with {stmt.var.name}' = 1",
            )
        return AngelicDuration(stmt.name, stmt.var, system.pre_of(stmt.var), stmt.value, stmt.span)

    def _check_inverse_scoping(self, system: OdeSystem) -> None:
        erased = {eq.var for eq in system.equations if eq.ghost == GhostStatus.INVERSE}
        if not erased:
            return
        for clause in system.clauses:
            if clause.status == GhostStatus.INVERSE or isinstance(clause.statement, Modify):
                continue
            formula = clause.statement.formula  # type: ignore[attr-defined]
            leaked = sorted({v.name for v in free_variables(formula) & erased})
            if leaked:
                raise ProofError(
                    f"fact mentions {', '.join(leaked)}, which evolve only in an inverse ghost",
                    clause.statement.span,
                    hint="move the fact into /-- ... --/",
                )

    # ------------------------------------------------------------------
    # Domain sequencing
    # ------------------------------------------------------------------

    def check(
        self,
        proof: OdeProof,
        ctx: Context,
        prover: ObligationProver,
        ghost_variants: AbstractSet[Var] = frozenset(),
    ) -> SolutionTable:
        """
        Check one ODE proof and bind what it exports into ctx: every domain
        fact, the solutions as definitions, named solution facts and, for an
        Angelic ODE, the duration fact.

        ghost_variants are the variants assigned in forward ghosts. A Demonic
        domain assertion about them is exported as a forward-ghost fact.
        """
        system = OdeSystem.from_proof(proof)
        assert proof.duration is not None
        tau = proof.duration
        table = self.classify_and_solve(system)
        angelic: Optional[AngelicDuration] = None
        time_range: Formula = _nonnegative(tau)
        try:
            self.check_differential_ghosts(system, ghost_variants)
            self._check_inverse_scoping(system)
            if system.polarity == Polarity.ANGELIC:
                angelic = self.check_angelic_duration(system)
                self._check_clock_start(angelic, ctx, prover)
                time_range = And(time_range, Compare(CompareOp.LE, tau, angelic.elapsed))
        except CheckerError as exc:
            prover.report(exc.with_span(proof.span))

        ctx.enter(FrameKind.ODE_DOMAIN)
        ctx.bind(None, time_range, FactKind.ASSUMPTION, GhostStatus.PLAIN)
        domain: List[NamedFormula] = [NamedFormula("_time", time_range)]
        ghosts = set(ghost_variants) | {
            eq.var for eq in system.equations if eq.ghost == GhostStatus.FORWARD
        }
        for clause in system.clauses:
            stmt = clause.statement
            if isinstance(stmt, (Assume, Assert)):
                status = self._clause_status(system, clause, ghosts, ctx, prover)
            if isinstance(stmt, Assume):
                ctx.bind(stmt.name, stmt.formula, FactKind.ASSUMPTION, status)
                domain.append(NamedFormula(stmt.name or "_", stmt.formula))
            elif isinstance(stmt, Assert):
                try:
                    self._check_cut(system, table, clause, ctx, prover, domain)
                except CheckerError as exc:
                    prover.report(exc.with_span(stmt.span))
                ctx.bind(stmt.name, stmt.formula, FactKind.ASSERTION, status)
                domain.append(NamedFormula(stmt.name or "_", stmt.formula))
        frame = ctx.leave()
        for entry in frame.entries:
            ctx.export(entry)

        statuses = {eq.var: eq.ghost for eq in system.equations}
        for post, solution in table.solutions.items():
            ctx.define(post, solution, statuses[post] if statuses[post] != GhostStatus.PLAIN else None)
        if angelic is not None:
            ctx.define(tau, angelic.elapsed)
            ctx.bind(angelic.name, Compare(CompareOp.EQ, angelic.clock, angelic.value), FactKind.ASSERTION)
        for eq in system.equations:
            if eq.name is None:
                continue
            if eq.var not in table:
                prover.report(ProofError(
                    f"{eq.name}: no polynomial solution for {eq.var.name}",
                    eq.span,
                    hint="only triangular systems with polynomial right-hand sides are solved",
                ))
                continue
            # the solution only holds over the time the ODE actually ran
            solution = And(Compare(CompareOp.EQ, eq.var, table.solutions[eq.var]), time_range)
            ctx.bind(eq.name, solution, FactKind.ASSERTION,
                     eq.ghost if eq.ghost != GhostStatus.PLAIN else None)
        logger.debug("checked %s ODE with %d domain clauses", system.polarity.value, len(system.clauses))
        return table

    @staticmethod
    def _clause_status(
        system: OdeSystem,
        clause: DomainClause,
        ghosts: AbstractSet[Var],
        ctx: Context,
        prover: ObligationProver,
    ) -> GhostStatus:
        """Demonic cuts about ghost variables become ghost facts; game clauses may not mention them"""
        if clause.status != GhostStatus.PLAIN or ctx.inside_forward_ghost:
            return clause.status if clause.status != GhostStatus.PLAIN else ctx.status
        stmt = clause.statement
        leaked = sorted({v.name for v in free_variables(stmt.formula) & ghosts})  # type: ignore[attr-defined]
        if not leaked:
            return ctx.status
        if isinstance(stmt, Assert) and system.polarity == Polarity.DEMONIC:
            return GhostStatus.FORWARD
        prover.report(ProofError(
            f"domain constraint mentions forward-ghost variable {', '.join(leaked)}",
            stmt.span,
            hint="the game cannot test a ghost variable; wrap the clause in /++ ... ++/",
        ))
        return ctx.status

    def _check_clock_start(self, angelic: AngelicDuration, ctx: Context, prover: ObligationProver) -> None:
        start = Compare(CompareOp.EQ, angelic.clock_pre, ZERO)
        definitions = tuple(ctx.definitions())
        hypotheses = tuple(self.arithmetic.select_default_assumptions(ctx, start))
        label = angelic.name or "duration"
        if not prover.discharge(
            f"{label} (clock starts at 0)",
            Goal(hypotheses, start, MethodKind.RCF, definitions=definitions, span=angelic.span),
            "duration",
        ):
            raise ProofError(
                f"clock {angelic.clock.name} must start at 0",
                angelic.span,
                hint=f"assign {angelic.clock.name} := 0 before the ODE",
            )
        nonnegative = Compare(CompareOp.GE, angelic.value, angelic.clock_pre)
        hypotheses = tuple(self.arithmetic.select_default_assumptions(ctx, nonnegative))
        prover.discharge(
            f"{label} (duration is nonnegative)",
            Goal(hypotheses, nonnegative, MethodKind.RCF, definitions=definitions, span=angelic.span),
            "duration",
        )

    def _check_cut(
        self,
        system: OdeSystem,
        table: SolutionTable,
        clause: DomainClause,
        ctx: Context,
        prover: ObligationProver,
        domain: List[NamedFormula],
    ) -> None:
        stmt = clause.statement
        assert isinstance(stmt, Assert)
        name = stmt.name or "cut"
        method = stmt.method.kind if stmt.method is not None else MethodKind.AUTO
        evolving = free_variables(stmt.formula) & set(system.posts)
        if method == MethodKind.AUTO:
            method = MethodKind.SOLUTION if table.covers(evolving) else MethodKind.INDUCTION
            logger.debug("%s: auto picks %s", name, method.value)

        definitions = tuple(ctx.definitions())
        hypotheses = tuple(prover.select(stmt, stmt.formula)) + tuple(domain)

        if method == MethodKind.SOLUTION:
            missing = sorted(v.name for v in evolving if v not in table)
            if missing:
                raise ProofError(
                    f"{name}: the ODE has no polynomial solution for {', '.join(missing)}",
                    stmt.span,
                    hint="prove it by induction instead",
                )
            solved = tuple(table.solutions.items())
            prover.discharge(name, Goal(hypotheses, stmt.formula, MethodKind.AUTO,
                                        definitions=definitions + solved, span=stmt.span), "cut")
        elif method == MethodKind.INDUCTION:
            base, step = self.check_differential_induction(system, stmt.formula)
            pre = {post: system.pre_of(post) for post in system.posts}
            initially = tuple(
                NamedFormula(h.name, substitute(h.formula, pre))
                for h in domain[1:] if system.polarity == Polarity.DEMONIC
            )
            base_hyps = tuple(prover.select(stmt, base)) + initially
            prover.discharge(f"{name} (base case)", Goal(base_hyps, base, MethodKind.AUTO,
                                                        definitions=definitions, span=stmt.span), "induction")
            prover.discharge(f"{name} (inductive step)", Goal(hypotheses, step, MethodKind.AUTO,
                                                             definitions=definitions, span=stmt.span), "induction")
        elif method in (MethodKind.RCF, MethodKind.PROP):
            prover.discharge(name, Goal(hypotheses, stmt.formula, method,
                                        definitions=definitions, span=stmt.span), "cut")
        else:
            raise ProofError(f"method {method.value} does not apply inside an ODE", stmt.span)
