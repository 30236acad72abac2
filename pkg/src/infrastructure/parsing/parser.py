"""
Infrastructure Layer - Recursive-Descent Parser

Parses proof documents in the surface syntax of the proof language:

    ?name:(φ);  !name:(φ) using a b ... by method;  x := f;  x := *;
    ?name:(x := f);  { A ++ B }  { body }*  switch (pt) { case g => ... }
    for (x := e; !inv:(φ); ?guard:(ψ); x := x + c) { ... }
    {x' = f, y' = g & ?dc:(φ) & !cut:(ψ) by induction & ?dur:(t := T)};
    /++ ghost ++/  /-- inverse ghost --/  label:  label(x, y):  e@label(f)
    note n = andI(a, b);  let f(x) = e;  let p() <-> φ;  let g ::= α;
    print(e);  conclusion name;  proves name "[α]φ";

The parser backtracks over a token list where the grammar needs more than
one token of lookahead (comparisons versus predicate applications, ODEs
versus blocks) and reports the furthest failure with the set of tokens that
would have been accepted there.
"""

import logging
from dataclasses import replace
from typing import Callable, List, Optional, Set, Tuple, TypeVar

from src.domain.entities.document import ProofDocument
from src.domain.entities.formula import (
    TRUE,
    And,
    Box,
    Compare,
    CompareOp,
    Exists,
    FalseF,
    Forall,
    Formula,
    Iff,
    Implies,
    LocatedFormula,
    Not,
    Or,
    PredApply,
    TrueF,
)
from src.domain.entities.game import (
    Assign,
    Dual,
    Game,
    GameRef,
    Loop,
    Ode,
    OdeEquation,
    RandomAssign,
    Test,
    choice,
    sequence,
)
from src.domain.entities.node import GhostStatus, Node
from src.domain.entities.source import SourceFile, SourceSpan
from src.domain.entities.statement import (
    Assert,
    Assume,
    Block,
    Command,
    Conclusion,
    DefinitionKind,
    DemonicChoice,
    DemonicLoop,
    EllipsisTerm,
    FactRef,
    ForLoop,
    ForwardGhost,
    InverseGhost,
    LabelStmt,
    Let,
    Method,
    MethodKind,
    Modify,
    Note,
    OdeProof,
    Print,
    ProofTerm,
    Proves,
    RuleApp,
    Statement,
    Switch,
    SwitchCase,
)
from src.domain.entities.term import (
    Add,
    Apply,
    Div,
    LocatedTerm,
    Max,
    Min,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    Term,
    Var,
)
from src.domain.exceptions import ParseError
from src.infrastructure.parsing.lexer import Token, TokenKind, tokenize

logger = logging.getLogger(__name__)

T = TypeVar("T")

COMPARISONS = {op.value: op for op in CompareOp}
METHODS = {kind.value: kind for kind in MethodKind}
GHOST_CLOSERS = {"/++": "++/", "/--": "--/"}


class Parser:
    """
    Parser over the tokens of one source file.

    Public entry points: parse_document, parse_formula_text, parse_term_text.
    """

    def __init__(self, source: SourceFile, tokens: Optional[List[Token]] = None):
        self.source = source
        self.tokens = tokens if tokens is not None else tokenize(source)
        self.pos = 0
        self._furthest = -1
        self._expected: Set[str] = set()
        self._open_ghosts: List[Token] = []

    # ------------------------------------------------------------------
    # Token helpers
    # ------------------------------------------------------------------

    @property
    def nt(self) -> Token:
        return self.tokens[self.pos]

    def peek_at(self, offset: int) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def peek(self, text: str, offset: int = 0) -> bool:
        token = self.peek_at(offset)
        return token.kind in (TokenKind.SYMBOL, TokenKind.KEYWORD) and token.text == text

    def peek_kind(self, kind: TokenKind, offset: int = 0) -> bool:
        return self.peek_at(offset).kind == kind

    def advance(self) -> Token:
        token = self.nt
        if token.kind != TokenKind.EOF:
            self.pos += 1
        return token

    def _fail(self, expected: str) -> ParseError:
        if self.pos > self._furthest:
            self._furthest = self.pos
            self._expected = {expected}
        elif self.pos == self._furthest:
            self._expected.add(expected)
        return ParseError(f"expected {expected}, encountered {self.nt} instead", self.nt.span,
                          expected=[expected])

    def match(self, text: str) -> Token:
        if self.peek(text):
            return self.advance()
        raise self._fail(f"'{text}'")

    def match_kind(self, kind: TokenKind) -> Token:
        if self.nt.kind == kind:
            return self.advance()
        raise self._fail(kind.value)

    def accept(self, text: str) -> bool:
        if self.peek(text):
            self.advance()
            return True
        return False

    def attempt(self, parse: Callable[[], T]) -> Optional[T]:
        """Run parse; on failure rewind and return None"""
        saved = self.pos
        try:
            return parse()
        except ParseError:
            self.pos = saved
            return None

    def span_from(self, start: Token) -> SourceSpan:
        last = self.tokens[max(self.pos - 1, 0)]
        return start.span.join(last.span) if last.span.start >= start.span.start else start.span

    def furthest_error(self, fallback: ParseError) -> ParseError:
        if self._furthest < 0:
            return fallback
        token = self.tokens[self._furthest]
        expected = sorted(self._expected)
        for opener in reversed(self._open_ghosts):
            closer = GHOST_CLOSERS[opener.text]
            if token.kind == TokenKind.EOF:
                return ParseError(
                    f"unterminated ghost {opener.text}, expected {closer}",
                    opener.span,
                    expected=[closer],
                    hint=f"close the ghost block with {closer}",
                )
        message = f"expected {' or '.join(expected)}, encountered {token} instead"
        return ParseError(message, token.span, expected=expected)

    def ident(self) -> str:
        return self.match_kind(TokenKind.IDENT).text

    # ------------------------------------------------------------------
    # Documents and commands
    # ------------------------------------------------------------------

    def parse_document(self) -> ProofDocument:
        statements: List[Statement] = []
        commands: List[Command] = []
        try:
            while not self.peek_kind(TokenKind.EOF):
                if self.peek("conclusion") or self.peek("proves"):
                    commands.append(self.parse_command())
                else:
                    statements.append(self.parse_statement())
        except ParseError as exc:
            raise self.furthest_error(exc)
        logger.debug("parsed %d statements, %d commands from %s",
                     len(statements), len(commands), self.source.name)
        return ProofDocument(self.source, tuple(statements), tuple(commands))

    def parse_command(self) -> Command:
        start = self.nt
        if self.accept("conclusion"):
            name = self.ident()
            selected: Optional[Tuple[str, ...]] = None
            if self.accept("with"):
                self.match("(")
                names = [self.ident()]
                while self.accept(","):
                    names.append(self.ident())
                self.match(")")
                selected = tuple(names)
            self.match(";")
            return Conclusion(name, selected, span=self.span_from(start))
        self.match("proves")
        name = self.ident()
        text_token = self.match_kind(TokenKind.STRING)
        self.match(";")
        target = parse_formula_text(self.source, text_token.text, text_token.span.start + 1)
        return Proves(name, normalize_target(target), text_token.text, span=self.span_from(start))

    # ------------------------------------------------------------------
    # Statements
    # ------------------------------------------------------------------

    def parse_statements(self, *terminators: str) -> List[Statement]:
        statements: List[Statement] = []
        while not any(self.peek(t) for t in terminators):
            if self.peek_kind(TokenKind.EOF):
                raise self._fail(" or ".join(f"'{t}'" for t in terminators))
            statements.append(self.parse_statement())
        return statements

    def parse_statement(self) -> Statement:
        start = self.nt
        if self.peek("?"):
            return self.parse_assume()
        if self.peek("!"):
            statement = self.parse_assert()
            self.match(";")
            return statement
        if self.peek("note"):
            return self.parse_note()
        if self.peek("let"):
            return self.parse_let()
        if self.peek("print"):
            self.advance()
            self.match("(")
            expr = self.parse_expression()
            self.match(")")
            self.match(";")
            return Print(expr, span=self.span_from(start))
        if self.peek("for"):
            return self.parse_for()
        if self.peek("switch"):
            return self.parse_switch()
        if self.peek("/++") or self.peek("/--"):
            return self.parse_ghost()
        if self.peek("{"):
            return self.parse_brace()
        if self.peek_kind(TokenKind.IDENT):
            if self.peek(":=", 1):
                statement = self.parse_assignment(None)
                self.match(";")
                return statement
            if self.peek(":", 1):
                name = self.advance().text
                self.advance()
                return LabelStmt(name, span=self.span_from(start))
            if self.peek("(", 1):
                label = self.attempt(self.parse_parameterized_label)
                if label is not None:
                    return label
        raise self._fail("a statement")

    def parse_parameterized_label(self) -> LabelStmt:
        start = self.nt
        name = self.ident()
        self.match("(")
        params: List[Var] = []
        if not self.peek(")"):
            params.append(self.parse_var())
            while self.accept(","):
                params.append(self.parse_var())
        self.match(")")
        self.match(":")
        return LabelStmt(name, tuple(params), span=self.span_from(start))

    def parse_var(self) -> Var:
        token = self.match_kind(TokenKind.IDENT)
        return Var(token.text, span=token.span)

    def parse_assignment(self, name: Optional[str]) -> Modify:
        start = self.nt
        var = self.parse_var()
        self.match(":=")
        if self.accept("*"):
            return Modify(name, var, None, span=self.span_from(start))
        value = self.parse_term()
        return Modify(name, var, value, span=self.span_from(start))

    def parse_fact_name(self) -> Optional[str]:
        """Optional `name:` prefix of a fact"""
        if self.peek_kind(TokenKind.IDENT) and self.peek(":", 1) and not self.peek(":=", 1):
            name = self.advance().text
            self.advance()
            return name
        return None

    def parse_assume_body(self, start: Token) -> Statement:
        name = self.parse_fact_name()
        if self.peek("(") and self.peek_kind(TokenKind.IDENT, 1) and self.peek(":=", 2):
            self.advance()
            assignment = self.parse_assignment(name)
            self.match(")")
            return Modify(name, assignment.var, assignment.value, span=self.span_from(start))
        formula = self.parse_fact_formula(name is not None)
        return Assume(name, formula, span=self.span_from(start))

    def parse_assume(self) -> Statement:
        start = self.match("?")
        statement = self.parse_assume_body(start)
        self.match(";")
        return statement

    def parse_fact_formula(self, parenthesized: bool) -> Formula:
        """A named fact's formula is parenthesized; an anonymous one may be bare"""
        if parenthesized:
            self.match("(")
            formula = self.parse_formula()
            self.match(")")
            return formula
        return self.parse_formula()

    def parse_assert(self) -> Assert:
        start = self.match("!")
        name = self.parse_fact_name()
        formula = self.parse_fact_formula(name is not None)
        using: Optional[Tuple[ProofTerm, ...]] = None
        method: Optional[Method] = None
        if self.accept("using"):
            items: List[ProofTerm] = []
            while not (self.peek("by") or self.peek(";") or self.peek("&") or self.peek("}")
                       or self.peek(")") or self.peek("++/") or self.peek("--/")):
                items.append(self.parse_proof_term())
            using = tuple(items)
        if self.peek("by"):
            method = self.parse_method()
        return Assert(name, formula, method, using, span=self.span_from(start))

    def parse_method(self) -> Method:
        start = self.match("by")
        token = self.match_kind(TokenKind.IDENT)
        kind = METHODS.get(token.text)
        if kind is None:
            self.pos -= 1
            raise self._fail("a proof method (" + ", ".join(METHODS) + ")")
        delta: Optional[Term] = None
        if self.accept("("):
            delta = self.parse_term()
            self.match(")")
        return Method(kind, delta, span=self.span_from(start))

    def parse_proof_term(self) -> ProofTerm:
        start = self.nt
        if self.accept("..."):
            return EllipsisTerm(span=start.span)
        name = self.ident()
        if self.accept("("):
            args: List[ProofTerm] = []
            if not self.peek(")"):
                args.append(self.parse_proof_term())
                while self.accept(","):
                    args.append(self.parse_proof_term())
            self.match(")")
            return RuleApp(name, tuple(args), span=self.span_from(start))
        return FactRef(name, span=start.span)

    def parse_note(self) -> Note:
        start = self.match("note")
        name = self.ident()
        self.match("=")
        proof = self.parse_proof_term()
        self.match(";")
        return Note(name, proof, span=self.span_from(start))

    def parse_let(self) -> Let:
        start = self.match("let")
        name = self.ident()
        params: List[str] = []
        if self.accept("("):
            if not self.peek(")"):
                params.append(self.ident())
                while self.accept(","):
                    params.append(self.ident())
            self.match(")")
        body: Node
        if self.accept("="):
            body = self.parse_term()
            kind = DefinitionKind.TERM
        elif self.accept("<->"):
            body = self.parse_formula()
            kind = DefinitionKind.FORMULA
        else:
            self.match("::=")
            body = self.parse_game_block()
            kind = DefinitionKind.GAME
        if self.tokens[self.pos - 1].text == ";" and not self.peek(";"):
            return Let(name, tuple(params), body, kind, span=self.span_from(start))
        self.match(";")
        return Let(name, tuple(params), body, kind, span=self.span_from(start))

    def parse_for(self) -> ForLoop:
        start = self.match("for")
        self.match("(")
        init = self.parse_assignment(None)
        self.match(";")
        invariant = self.parse_assert()
        self.match(";")
        guard_start = self.match("?")
        guard = self.parse_assume_body(guard_start)
        if not isinstance(guard, Assume):
            raise ParseError("the loop guard must be a formula", guard.span)
        self.match(";")
        increment = self.parse_assignment(None)
        self.accept(";")
        self.match(")")
        self.match("{")
        body = self.parse_statements("}")
        self.match("}")
        self.accept(";")
        return ForLoop(init, invariant, guard, increment, tuple(body), span=self.span_from(start))

    def parse_switch(self) -> Switch:
        start = self.match("switch")
        scrutinee: Optional[ProofTerm] = None
        if self.accept("("):
            scrutinee = self.parse_proof_term()
            self.match(")")
        self.match("{")
        cases: List[SwitchCase] = []
        while self.peek("case"):
            case_start = self.advance()
            guard_name = self.parse_fact_name()
            guard = self.parse_formula()
            self.match("=>")
            body = self.parse_statements("case", "}")
            cases.append(SwitchCase(guard_name, guard, tuple(body), span=self.span_from(case_start)))
        if not cases:
            raise self._fail("'case'")
        self.match("}")
        self.accept(";")
        return Switch(scrutinee, tuple(cases), span=self.span_from(start))

    def parse_ghost(self) -> Statement:
        opener = self.advance()
        closer = GHOST_CLOSERS[opener.text]
        self._open_ghosts.append(opener)
        body = self.parse_statements(closer)
        self.match(closer)
        self._open_ghosts.pop()
        self.accept(";")
        if opener.text == "/++":
            return ForwardGhost(tuple(body), span=self.span_from(opener))
        return InverseGhost(tuple(body), span=self.span_from(opener))

    def looks_like_ode(self) -> bool:
        """After '{': skip ghost openers and an equation name, then expect x'"""
        offset = 1
        while self.peek("/++", offset) or self.peek("/--", offset):
            offset += 1
        if self.peek_kind(TokenKind.IDENT, offset) and self.peek(":", offset + 1):
            offset += 2
        return self.peek_kind(TokenKind.IDENT, offset) and self.peek("'", offset + 1)

    def parse_brace(self) -> Statement:
        if self.looks_like_ode():
            return self.parse_ode_proof()
        start = self.match("{")
        branches = [self.parse_statements("++", "}")]
        while self.accept("++"):
            branches.append(self.parse_statements("++", "}"))
        self.match("}")
        body: Statement
        if len(branches) > 1:
            blocks = tuple(Block(tuple(b)) for b in branches)
            body = DemonicChoice(blocks, span=self.span_from(start))
        else:
            body = Block(tuple(branches[0]), span=self.span_from(start))
        if self.accept("*"):
            statements = body.statements if isinstance(body, Block) else (body,)
            loop = DemonicLoop(tuple(statements), span=self.span_from(start))
            self.accept(";")
            return loop
        self.accept(";")
        return body

    # ------------------------------------------------------------------
    # ODE proofs
    # ------------------------------------------------------------------

    def parse_equation(self, ghost: GhostStatus) -> OdeEquation:
        start = self.nt
        name = self.parse_fact_name()
        var = self.parse_var()
        self.match("'")
        self.match("=")
        rhs = self.parse_term()
        return OdeEquation(var, rhs, name, ghost, span=self.span_from(start))

    def parse_equations(self, ghost: GhostStatus, closer: Optional[str]) -> List[OdeEquation]:
        equations: List[OdeEquation] = []
        while True:
            if ghost == GhostStatus.PLAIN and (self.peek("/++") or self.peek("/--")):
                opener = self.advance()
                kind = GhostStatus.FORWARD if opener.text == "/++" else GhostStatus.INVERSE
                inner_closer = GHOST_CLOSERS[opener.text]
                self._open_ghosts.append(opener)
                equations.extend(self.parse_equations(kind, inner_closer))
                self.match(inner_closer)
                self._open_ghosts.pop()
            else:
                equations.append(self.parse_equation(ghost))
            if closer is not None and self.peek(closer):
                return equations
            if not self.accept(","):
                return equations

    def parse_domain_clause(self) -> Statement:
        start = self.nt
        if self.peek("/++") or self.peek("/--"):
            opener = self.advance()
            closer = GHOST_CLOSERS[opener.text]
            self._open_ghosts.append(opener)
            clauses = [self.parse_domain_clause()]
            while self.accept("&"):
                clauses.append(self.parse_domain_clause())
            self.match(closer)
            self._open_ghosts.pop()
            if opener.text == "/++":
                return ForwardGhost(tuple(clauses), span=self.span_from(start))
            return InverseGhost(tuple(clauses), span=self.span_from(start))
        if self.peek("?"):
            self.advance()
            return self.parse_assume_body(start)
        if self.peek("!"):
            return self.parse_assert()
        raise self._fail("a domain constraint clause ('?' or '!')")

    def parse_ode_proof(self) -> OdeProof:
        start = self.match("{")
        equations = self.parse_equations(GhostStatus.PLAIN, None)
        domain: List[Statement] = []
        while self.accept("&"):
            domain.append(self.parse_domain_clause())
        self.match("}")
        self.accept(";")
        return OdeProof(tuple(equations), tuple(domain), span=self.span_from(start))

    # ------------------------------------------------------------------
    # Formulas
    # ------------------------------------------------------------------

    def parse_expression(self) -> Node:
        """A formula if one parses, else a term (print statements)"""
        saved = self.pos
        formula = self.attempt(self.parse_formula)
        if formula is not None and (self.peek(")") or self.peek_kind(TokenKind.EOF)):
            return formula
        self.pos = saved
        return self.parse_term()

    def parse_formula(self) -> Formula:
        start = self.nt
        left = self.parse_implication()
        while self.accept("<->"):
            right = self.parse_implication()
            left = Iff(left, right, span=self.span_from(start))
        return left

    def parse_implication(self) -> Formula:
        start = self.nt
        left = self.parse_disjunction()
        if self.accept("->"):
            right = self.parse_implication()
            return Implies(left, right, span=self.span_from(start))
        return left

    def parse_disjunction(self) -> Formula:
        start = self.nt
        left = self.parse_conjunction()
        while self.accept("|"):
            right = self.parse_conjunction()
            left = Or(left, right, span=self.span_from(start))
        return left

    def parse_conjunction(self) -> Formula:
        start = self.nt
        left = self.parse_unary_formula()
        while self.peek("&") and not self._domain_clause_follows():
            self.advance()
            right = self.parse_unary_formula()
            left = And(left, right, span=self.span_from(start))
        return left

    def _domain_clause_follows(self) -> bool:
        """Inside ODE braces `& ?...` and `& !...` start a new domain clause"""
        return self.peek("?", 1) or self.peek("!", 1) or self.peek("/++", 1) or self.peek("/--", 1)

    def parse_unary_formula(self) -> Formula:
        start = self.nt
        if self.accept("!"):
            operand = self.parse_unary_formula()
            return Not(operand, span=self.span_from(start))
        if self.peek("\\forall") or self.peek("\\exists"):
            quantifier = self.advance()
            var = self.parse_var()
            body = self.parse_unary_formula()
            cls = Forall if quantifier.text == "\\forall" else Exists
            return cls(var, body, span=self.span_from(start))
        if self.accept("["):
            game = self.parse_game_choice()
            self.match("]")
            post = self.parse_unary_formula()
            return Box(game, post, span=self.span_from(start))
        return self.parse_located_formula()

    def parse_located_formula(self) -> Formula:
        start = self.nt
        formula = self.parse_atomic_formula()
        while self.peek("@"):
            self.advance()
            label = self.ident()
            args = self.parse_optional_args()
            formula = LocatedFormula(formula, label, args, span=self.span_from(start))
        return formula

    def parse_atomic_formula(self) -> Formula:
        start = self.nt
        comparison = self.attempt(self.parse_comparison)
        if comparison is not None:
            return comparison
        if self.accept("true"):
            return TrueF(span=start.span)
        if self.accept("false"):
            return FalseF(span=start.span)
        if self.accept("("):
            inner = self.parse_formula()
            self.match(")")
            return inner
        if self.peek_kind(TokenKind.IDENT) and self.peek("(", 1):
            name = self.ident()
            args = self.parse_optional_args()
            return PredApply(name, args, span=self.span_from(start))
        raise self._fail("a formula")

    def parse_comparison(self) -> Compare:
        start = self.nt
        left = self.parse_term()
        token = self.nt
        op = COMPARISONS.get(token.text) if token.kind == TokenKind.SYMBOL else None
        if op is None:
            raise self._fail("a comparison operator")
        self.advance()
        right = self.parse_term()
        return Compare(op, left, right, span=self.span_from(start))

    # ------------------------------------------------------------------
    # Terms
    # ------------------------------------------------------------------

    def parse_optional_args(self) -> Tuple[Term, ...]:
        if not self.accept("("):
            return ()
        args: List[Term] = []
        if not self.peek(")"):
            args.append(self.parse_term())
            while self.accept(","):
                args.append(self.parse_term())
        self.match(")")
        return tuple(args)

    def parse_term(self) -> Term:
        start = self.nt
        left = self.parse_product()
        while self.peek("+") or self.peek("-"):
            op = self.advance().text
            right = self.parse_product()
            cls = Add if op == "+" else Sub
            left = cls(left, right, span=self.span_from(start))
        return left

    def parse_product(self) -> Term:
        start = self.nt
        left = self.parse_unary_term()
        while (self.peek("*") and not self._loop_star_follows()) or self.peek("/"):
            op = self.advance().text
            right = self.parse_unary_term()
            cls = Mul if op == "*" else Div
            left = cls(left, right, span=self.span_from(start))
        return left

    def _loop_star_follows(self) -> bool:
        """`x := *;` and `}*` use '*' without a right operand"""
        nxt = self.peek_at(1)
        return nxt.kind == TokenKind.EOF or (nxt.kind == TokenKind.SYMBOL and nxt.text in (";", ")", "}", "]", "++", "^@"))

    def parse_unary_term(self) -> Term:
        start = self.nt
        if self.accept("-"):
            operand = self.parse_unary_term()
            return Neg(operand, span=self.span_from(start))
        return self.parse_power()

    def parse_power(self) -> Term:
        start = self.nt
        base = self.parse_located_term()
        if self.accept("^"):
            exponent = self.parse_unary_term()
            return Pow(base, exponent, span=self.span_from(start))
        return base

    def parse_located_term(self) -> Term:
        start = self.nt
        term = self.parse_atomic_term()
        while self.peek("@"):
            self.advance()
            label = self.ident()
            args = self.parse_optional_args()
            term = LocatedTerm(term, label, args, span=self.span_from(start))
        return term

    def parse_atomic_term(self) -> Term:
        start = self.nt
        if self.peek_kind(TokenKind.NUMBER):
            token = self.advance()
            return Num(token.value, span=token.span)
        if self.accept("("):
            inner = self.parse_term()
            self.match(")")
            return inner
        if self.peek_kind(TokenKind.IDENT):
            name = self.advance().text
            if self.peek("("):
                args = self.parse_optional_args()
                if name in ("min", "max") and len(args) == 2:
                    cls = Min if name == "min" else Max
                    return cls(args[0], args[1], span=self.span_from(start))
                return Apply(name, args, span=self.span_from(start))
            return Var(name, span=start.span)
        raise self._fail("a term")

    # ------------------------------------------------------------------
    # Games
    # ------------------------------------------------------------------

    def parse_game_choice(self) -> Game:
        start = self.nt
        branches = [self.parse_game_sequence()]
        while self.accept("++"):
            branches.append(self.parse_game_sequence())
        if len(branches) == 1:
            return branches[0]
        return replace(choice(branches), span=self.span_from(start))

    def parse_game_sequence(self) -> Game:
        items: List[Game] = []
        while not (self.peek("}") or self.peek("]") or self.peek("++")
                   or self.peek_kind(TokenKind.EOF)):
            items.append(self.parse_game_postfix())
        if not items:
            raise self._fail("a game")
        return sequence(items)

    def parse_game_postfix(self) -> Game:
        start = self.nt
        game = self.parse_game_primary()
        while self.peek("*") or self.peek("^@"):
            if self.advance().text == "*":
                game = Loop(game, span=self.span_from(start))
            else:
                game = Dual(game, span=self.span_from(start))
        return game

    def parse_game_block(self) -> Game:
        """
        A game definition body: one braced game, optionally looped or dualized,
        or a single atomic game whose own `;` also ends the definition.
        """
        return self.parse_game_postfix()

    def parse_game_primary(self) -> Game:
        start = self.nt
        if self.accept("{"):
            if self.peek_kind(TokenKind.IDENT) and self.peek("'", 1):
                game = self.parse_ode_game(start)
            else:
                game = self.parse_game_choice()
                self.match("}")
            return game
        if self.accept("?"):
            condition = self.parse_formula()
            self.match(";")
            return Test(condition, span=self.span_from(start))
        if self.peek_kind(TokenKind.IDENT) and self.peek(":=", 1):
            var = self.parse_var()
            self.advance()
            if self.accept("*"):
                self.match(";")
                return RandomAssign(var, span=self.span_from(start))
            value = self.parse_term()
            self.match(";")
            return Assign(var, value, span=self.span_from(start))
        if self.peek_kind(TokenKind.IDENT):
            name = self.ident()
            args = self.parse_optional_args()
            self.match(";")
            return GameRef(name, args, span=self.span_from(start))
        raise self._fail("a game")

    def parse_ode_game(self, start: Token) -> Ode:
        equations = [self.parse_equation(GhostStatus.PLAIN)]
        while self.accept(","):
            equations.append(self.parse_equation(GhostStatus.PLAIN))
        domain: Formula = TRUE
        if self.accept("&"):
            domain = self.parse_formula()
        self.match("}")
        return Ode(tuple(equations), domain, span=self.span_from(start))


# ============================================================================
# Entry points
# ============================================================================

def normalize_target(target: Formula) -> Formula:
    """`A -> [α]φ` is read as `[?A; α]φ`"""
    if isinstance(target, Implies) and isinstance(target.right, Box):
        box = target.right
        game = sequence([Test(target.left, span=target.left.span), box.game])
        return Box(game, box.post, span=target.span)
    return target


def parse_document(source: SourceFile) -> ProofDocument:
    return Parser(source).parse_document()


def parse_text(text: str, name: str = "<input>") -> ProofDocument:
    return parse_document(SourceFile(name, text))


def _parse_fragment(source: SourceFile, text: str, offset: int, rule: Callable[[Parser], T]) -> T:
    parser = Parser(source, tokenize(source, offset, text))
    try:
        result = rule(parser)
        if not parser.peek_kind(TokenKind.EOF):
            raise parser._fail("end of input")
    except ParseError as exc:
        raise parser.furthest_error(exc)
    return result


def parse_formula_text(source: SourceFile, text: str, offset: int = 0) -> Formula:
    return _parse_fragment(source, text, offset, Parser.parse_formula)


def parse_term_text(source: SourceFile, text: str, offset: int = 0) -> Term:
    return _parse_fragment(source, text, offset, Parser.parse_term)


def parse_formula(text: str) -> Formula:
    source = SourceFile("<formula>", text)
    return parse_formula_text(source, text)


def parse_term(text: str) -> Term:
    source = SourceFile("<term>", text)
    return parse_term_text(source, text)


def parse_game(text: str) -> Game:
    source = SourceFile("<game>", text)
    return _parse_fragment(source, text, 0, Parser.parse_game_choice)
