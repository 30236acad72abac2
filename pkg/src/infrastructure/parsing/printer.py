"""
Infrastructure Layer - Pretty Printer

Renders terms, formulas, games and proof statements back to surface syntax
with the fewest parentheses that re-parse to the same tree. SSA variants are
rendered through Var.__str__, so elaborated output shows `x_1`.
"""

from fractions import Fraction
from typing import Iterable, List, Sequence, Union

from src.domain.entities.formula import (
    And,
    Box,
    Compare,
    Diamond,
    Exists,
    FalseF,
    Forall,
    Formula,
    Iff,
    Implies,
    LocatedFormula,
    Not,
    Or,
    PendingFormula,
    PredApply,
    TrueF,
)
from src.domain.entities.game import (
    Assign,
    Choice,
    Dual,
    Game,
    GameRef,
    Loop,
    Ode,
    OdeEquation,
    RandomAssign,
    Sequence as SequenceGame,
    Test,
)
from src.domain.entities.node import GhostStatus, Node
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
    Modify,
    Note,
    OdeProof,
    Print,
    ProofTerm,
    Proves,
    RuleApp,
    Statement,
    Switch,
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
    PendingTerm,
    Pow,
    Sub,
    Term,
    Var,
)

INDENT = "  "


# ============================================================================
# Terms
# ============================================================================

_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = 1, 2, 3, 4, 5


def format_number(value: Fraction) -> str:
    """Finite decimals print as decimals, other rationals as a quotient"""
    den = value.denominator
    if den == 1:
        return str(value.numerator)
    digits = 0
    rest = den
    while rest % 2 == 0 or rest % 5 == 0:
        if rest % 2 == 0:
            rest //= 2
        elif rest % 5 == 0:
            rest //= 5
        digits += 1
    if rest != 1:
        return f"{value.numerator}/{den}"
    scaled = abs(value) * 10 ** digits
    whole = str(int(scaled)).rjust(digits + 1, "0")
    text = f"{whole[:-digits]}.{whole[-digits:]}".rstrip("0").rstrip(".")
    return f"-{text}" if value < 0 else text


def _term_precedence(term: Term) -> int:
    if isinstance(term, (Add, Sub)):
        return _SUM
    if isinstance(term, (Mul, Div)):
        return _PRODUCT
    if isinstance(term, Neg):
        return _UNARY
    if isinstance(term, Num):
        if term.value < 0:
            return _UNARY
        return _PRODUCT if "/" in format_number(term.value) else _ATOM
    if isinstance(term, Pow):
        return _POWER
    return _ATOM


def _args(args: Sequence[Term]) -> str:
    return "(" + ", ".join(print_term(a) for a in args) + ")"


def _wrap_term(term: Term, minimum: int) -> str:
    text = print_term(term)
    return f"({text})" if _term_precedence(term) < minimum else text


def print_term(term: Term) -> str:
    if isinstance(term, Var):
        return str(term)
    if isinstance(term, Num):
        return format_number(term.value)
    if isinstance(term, (Add, Sub)):
        op = "+" if isinstance(term, Add) else "-"
        return f"{_wrap_term(term.left, _SUM)} {op} {_wrap_term(term.right, _PRODUCT)}"
    if isinstance(term, (Mul, Div)):
        op = "*" if isinstance(term, Mul) else "/"
        return f"{_wrap_term(term.left, _PRODUCT)}{op}{_wrap_term(term.right, _UNARY)}"
    if isinstance(term, Neg):
        inner = _wrap_term(term.operand, _POWER) if not isinstance(term.operand, Neg) else print_term(term.operand)
        return f"- {inner}" if inner.startswith("-") else f"-{inner}"
    if isinstance(term, Pow):
        return f"{_wrap_term(term.base, _ATOM)}^{_wrap_term(term.exponent, _UNARY)}"
    if isinstance(term, (Min, Max)):
        name = "min" if isinstance(term, Min) else "max"
        return f"{name}({print_term(term.left)}, {print_term(term.right)})"
    if isinstance(term, Apply):
        return f"{term.name}{_args(term.args)}"
    if isinstance(term, LocatedTerm):
        suffix = _args(term.args) if term.args else ""
        return f"{_wrap_term(term.expr, _ATOM)}@{term.label}{suffix}"
    if isinstance(term, PendingTerm):
        return f"<pending {term.key}>"
    raise TypeError(f"cannot print term {term!r}")


# ============================================================================
# Formulas
# ============================================================================

_IFF, _IMPLIES, _OR, _AND, _PREFIX, _ATOMIC = 1, 2, 3, 4, 5, 6


def _formula_precedence(formula: Formula) -> int:
    if isinstance(formula, Iff):
        return _IFF
    if isinstance(formula, Implies):
        return _IMPLIES
    if isinstance(formula, Or):
        return _OR
    if isinstance(formula, And):
        return _AND
    if isinstance(formula, (Not, Forall, Exists, Box, Diamond)):
        return _PREFIX
    return _ATOMIC


def _wrap_formula(formula: Formula, minimum: int) -> str:
    text = print_formula(formula)
    return f"({text})" if _formula_precedence(formula) < minimum else text


def print_formula(formula: Formula) -> str:
    if isinstance(formula, Compare):
        return f"{print_term(formula.left)} {formula.op.value} {print_term(formula.right)}"
    if isinstance(formula, TrueF):
        return "true"
    if isinstance(formula, FalseF):
        return "false"
    if isinstance(formula, Iff):
        return f"{_wrap_formula(formula.left, _IFF)} <-> {_wrap_formula(formula.right, _IMPLIES)}"
    if isinstance(formula, Implies):
        return f"{_wrap_formula(formula.left, _OR)} -> {_wrap_formula(formula.right, _IMPLIES)}"
    if isinstance(formula, Or):
        return f"{_wrap_formula(formula.left, _OR)} | {_wrap_formula(formula.right, _AND)}"
    if isinstance(formula, And):
        return f"{_wrap_formula(formula.left, _AND)} & {_wrap_formula(formula.right, _PREFIX)}"
    if isinstance(formula, Not):
        return f"!{_wrap_formula(formula.operand, _PREFIX)}"
    if isinstance(formula, (Forall, Exists)):
        quantifier = "\\forall" if isinstance(formula, Forall) else "\\exists"
        return f"{quantifier} {formula.var} {_wrap_formula(formula.body, _PREFIX)}"
    if isinstance(formula, Box):
        return f"[{print_game(formula.game)}] {_wrap_formula(formula.post, _PREFIX)}"
    if isinstance(formula, Diamond):
        return f"<{print_game(formula.game)}> {_wrap_formula(formula.post, _PREFIX)}"
    if isinstance(formula, PredApply):
        return f"{formula.name}{_args(formula.args)}"
    if isinstance(formula, LocatedFormula):
        inner = print_formula(formula.expr)
        if not isinstance(formula.expr, (PredApply, TrueF, FalseF, LocatedFormula)):
            inner = f"({inner})"
        suffix = _args(formula.args) if formula.args else ""
        return f"{inner}@{formula.label}{suffix}"
    if isinstance(formula, PendingFormula):
        return f"<pending {formula.key}>"
    raise TypeError(f"cannot print formula {formula!r}")


# ============================================================================
# Games
# ============================================================================

def _equation(eq: OdeEquation) -> str:
    prefix = f"{eq.name}: " if eq.name else ""
    return f"{prefix}{eq.var}' = {print_term(eq.rhs)}"


def _game_operand(game: Game) -> str:
    """A game as a postfix operand: ODEs and refs keep their own delimiters"""
    if isinstance(game, (Ode, Loop, Dual)):
        return print_game(game)
    return "{" + print_game(game) + "}"


def print_game(game: Game) -> str:
    if isinstance(game, Assign):
        return f"{game.var} := {print_term(game.value)};"
    if isinstance(game, RandomAssign):
        return f"{game.var} := *;"
    if isinstance(game, Test):
        return f"?{print_formula(game.condition)};"
    if isinstance(game, GameRef):
        suffix = _args(game.args) if game.args else ""
        return f"{game.name}{suffix};"
    if isinstance(game, Ode):
        equations = ", ".join(_equation(eq) for eq in game.equations)
        if isinstance(game.domain, TrueF):
            return "{" + equations + "}"
        return "{" + equations + " & " + print_formula(game.domain) + "}"
    if isinstance(game, SequenceGame):
        return " ".join(
            "{" + print_game(item) + "}" if isinstance(item, Choice) else print_game(item)
            for item in game.items
        )
    if isinstance(game, Choice):
        return " ++ ".join(print_game(branch) for branch in game.branches)
    if isinstance(game, Loop):
        return _game_operand(game.body) + "*"
    if isinstance(game, Dual):
        return _game_operand(game.body) + "^@"
    raise TypeError(f"cannot print game {game!r}")


# ============================================================================
# Statements and documents
# ============================================================================

def print_proof_term(proof: ProofTerm) -> str:
    if isinstance(proof, FactRef):
        return proof.name
    if isinstance(proof, EllipsisTerm):
        return "..."
    if isinstance(proof, RuleApp):
        return f"{proof.rule}(" + ", ".join(print_proof_term(a) for a in proof.args) + ")"
    raise TypeError(f"cannot print proof term {proof!r}")


def _method(method: Method) -> str:
    if method.delta is None:
        return f"by {method.kind.value}"
    return f"by {method.kind.value}({print_term(method.delta)})"


def _fact(name: Union[str, None], formula: Formula) -> str:
    if name is None:
        return f"({print_formula(formula)})"
    return f"{name}:({print_formula(formula)})"


def _assert_clause(stmt: Assert) -> str:
    parts = ["!" + _fact(stmt.name, stmt.formula)]
    if stmt.using is not None:
        parts.append("using " + " ".join(print_proof_term(p) for p in stmt.using))
    if stmt.method is not None:
        parts.append(_method(stmt.method))
    return " ".join(parts)


def _modify_clause(stmt: Modify) -> str:
    value = "*" if stmt.value is None else print_term(stmt.value)
    return f"{stmt.var} := {value}"


def _domain_clause(stmt: Statement) -> str:
    if isinstance(stmt, Assume):
        return "?" + _fact(stmt.name, stmt.formula)
    if isinstance(stmt, Assert):
        return _assert_clause(stmt)
    if isinstance(stmt, Modify):
        prefix = f"{stmt.name}:" if stmt.name else ""
        return f"?{prefix}({_modify_clause(stmt)})"
    if isinstance(stmt, (ForwardGhost, InverseGhost)):
        opener, closer = ("/++", "++/") if isinstance(stmt, ForwardGhost) else ("/--", "--/")
        return f"{opener} " + " & ".join(_domain_clause(s) for s in stmt.body) + f" {closer}"
    raise TypeError(f"cannot print domain clause {stmt!r}")


def _ode_equations(equations: Iterable[OdeEquation]) -> str:
    groups: List[str] = []
    pending: List[OdeEquation] = []
    status = GhostStatus.PLAIN

    def flush() -> None:
        if not pending:
            return
        text = ", ".join(_equation(eq) for eq in pending)
        if status == GhostStatus.FORWARD:
            text = f"/++ {text} ++/"
        elif status == GhostStatus.INVERSE:
            text = f"/-- {text} --/"
        groups.append(text)
        pending.clear()

    for eq in equations:
        if eq.ghost != status:
            flush()
            status = eq.ghost
        pending.append(eq)
    flush()
    return ", ".join(groups)


def _block_lines(statements: Iterable[Statement], depth: int) -> List[str]:
    lines: List[str] = []
    for stmt in statements:
        lines.extend(_statement_lines(stmt, depth))
    return lines


def _statement_lines(stmt: Statement, depth: int) -> List[str]:
    pad = INDENT * depth

    if isinstance(stmt, Assume):
        return [f"{pad}?{_fact(stmt.name, stmt.formula)};"]
    if isinstance(stmt, Assert):
        return [f"{pad}{_assert_clause(stmt)};"]
    if isinstance(stmt, Modify):
        if stmt.name is None:
            return [f"{pad}{_modify_clause(stmt)};"]
        return [f"{pad}?{stmt.name}:({_modify_clause(stmt)});"]
    if isinstance(stmt, OdeProof):
        text = _ode_equations(stmt.equations)
        clauses = "".join(f" & {_domain_clause(c)}" for c in stmt.domain)
        return [f"{pad}{{{text}{clauses}}};"]
    if isinstance(stmt, Block):
        return [f"{pad}{{"] + _block_lines(stmt.statements, depth + 1) + [f"{pad}}}"]
    if isinstance(stmt, DemonicLoop):
        return [f"{pad}{{"] + _block_lines(stmt.body, depth + 1) + [f"{pad}}}*"]
    if isinstance(stmt, DemonicChoice):
        lines = [f"{pad}{{"]
        for index, branch in enumerate(stmt.branches):
            if index:
                lines.append(f"{pad}++")
            lines.extend(_block_lines(branch.statements, depth + 1))
        return lines + [f"{pad}}}"]
    if isinstance(stmt, ForLoop):
        guard = "?" + _fact(stmt.guard.name, stmt.guard.formula)
        header = (
            f"{pad}for ({_modify_clause(stmt.init)}; {_assert_clause(stmt.invariant)}; "
            f"{guard}; {_modify_clause(stmt.increment)}) {{"
        )
        return [header] + _block_lines(stmt.body, depth + 1) + [f"{pad}}}"]
    if isinstance(stmt, Switch):
        scrutinee = f" ({print_proof_term(stmt.scrutinee)})" if stmt.scrutinee is not None else ""
        lines = [f"{pad}switch{scrutinee} {{"]
        for case in stmt.cases:
            guard = _fact(case.guard_name, case.guard)
            lines.append(f"{pad}{INDENT}case {guard} =>")
            lines.extend(_block_lines(case.body, depth + 2))
        return lines + [f"{pad}}}"]
    if isinstance(stmt, Note):
        return [f"{pad}note {stmt.name} = {print_proof_term(stmt.proof)};"]
    if isinstance(stmt, Let):
        params = "(" + ", ".join(stmt.params) + ")"
        if stmt.kind == DefinitionKind.TERM:
            body = print_term(stmt.body)  # type: ignore[arg-type]
        elif stmt.kind == DefinitionKind.FORMULA:
            body = print_formula(stmt.body)  # type: ignore[arg-type]
        else:
            body = _game_operand(stmt.body)  # type: ignore[arg-type]
        return [f"{pad}let {stmt.name}{params} {stmt.kind.value} {body};"]
    if isinstance(stmt, (ForwardGhost, InverseGhost)):
        opener, closer = ("/++", "++/") if isinstance(stmt, ForwardGhost) else ("/--", "--/")
        return [f"{pad}{opener}"] + _block_lines(stmt.body, depth + 1) + [f"{pad}{closer}"]
    if isinstance(stmt, LabelStmt):
        if stmt.params:
            return [f"{pad}{stmt.name}(" + ", ".join(str(p) for p in stmt.params) + "):"]
        return [f"{pad}{stmt.name}:"]
    if isinstance(stmt, Print):
        expr = stmt.expr
        text = print_formula(expr) if isinstance(expr, Formula) else print_term(expr)
        return [f"{pad}print({text});"]
    raise TypeError(f"cannot print statement {stmt!r}")


def print_statement(stmt: Statement, depth: int = 0) -> str:
    return "\n".join(_statement_lines(stmt, depth))


def print_statements(statements: Iterable[Statement]) -> str:
    return "\n".join(_block_lines(statements, 0))


def print_command(command: Command) -> str:
    if isinstance(command, Conclusion):
        if command.selected is None:
            return f"conclusion {command.proof};"
        return f"conclusion {command.proof} with (" + ", ".join(command.selected) + ");"
    if isinstance(command, Proves):
        text = command.text or print_formula(command.target)
        return f'proves {command.proof} "{text}";'
    raise TypeError(f"cannot print command {command!r}")


def print_node(node: Node) -> str:
    """Render any syntax node, used for diagnostics and the print statement"""
    if isinstance(node, Term):
        return print_term(node)
    if isinstance(node, Formula):
        return print_formula(node)
    if isinstance(node, Game):
        return print_game(node)
    if isinstance(node, Statement):
        return print_statement(node)
    if isinstance(node, ProofTerm):
        return print_proof_term(node)
    if isinstance(node, Command):
        return print_command(node)
    raise TypeError(f"cannot print {node!r}")
