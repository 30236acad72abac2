"""
Application Layer - Proof Term Evaluation

Computes the formula a proof term proves in a context: a fact name looks the
fact up, a rule application runs the kernel rule on the argument formulas.
Also resolves `using` lists into named hypotheses.
"""

from typing import List, Optional, Sequence, Tuple

from src.domain.entities import (
    Context,
    EllipsisTerm,
    FactKind,
    FactRef,
    Formula,
    NamedFormula,
    ProofTerm,
    RuleApp,
)
from src.domain.entities.analysis import base_names
from src.domain.entities.kernel import kernel_rule
from src.domain.entities.node import GhostStatus
from src.domain.exceptions import ProofError


def _usable(ctx: Context, status: GhostStatus) -> bool:
    return status != GhostStatus.INVERSE or ctx.inside_inverse_ghost


def evaluate(term: ProofTerm, ctx: Context) -> Formula:
    """The conclusion of a proof term"""
    if isinstance(term, FactRef):
        entry = ctx.lookup(term.name)
        if entry is None:
            raise ProofError(f"unknown fact {term.name}", term.span)
        if not _usable(ctx, entry.status):
            raise ProofError(
                f"fact {term.name} is an inverse-ghost fact",
                term.span,
                hint="inverse-ghost facts can only be used inside other inverse ghosts",
            )
        return entry.formula
    if isinstance(term, RuleApp):
        try:
            rule = kernel_rule(term.rule)
            return rule.apply([evaluate(arg, ctx) for arg in term.args])
        except ProofError as exc:
            raise exc.with_span(term.span)
    raise ProofError(f"{type(term).__name__} is not a proof", term.span)


def _facts_about(name: str, ctx: Context) -> List[NamedFormula]:
    """
    Facts mentioning a program variable, for `using x` entries, led by the
    assignment equality of the variable's current variant when it has one.
    """
    current: Optional[NamedFormula] = None
    about: List[NamedFormula] = []
    for entry in ctx.visible():
        if not _usable(ctx, entry.status):
            continue
        if entry.definition is not None:
            if entry.definition[0].name == name:
                current = NamedFormula(name, entry.formula)
        elif entry.kind != FactKind.DEFINITION and name in base_names(entry.formula):
            about.append(NamedFormula(entry.name or f"_{entry.kind.value}", entry.formula))
    return ([current] if current is not None else []) + about


def resolve_using(
    using: Optional[Sequence[ProofTerm]],
    ctx: Context,
) -> Tuple[Optional[List[NamedFormula]], bool]:
    """
    Explicit hypotheses of a `using` list and whether `...` asks for the
    defaults as well. No list at all means defaults only.
    """
    if using is None:
        return None, True
    selected: List[NamedFormula] = []
    with_defaults = False
    for item in using:
        if isinstance(item, EllipsisTerm):
            with_defaults = True
            continue
        if isinstance(item, FactRef) and ctx.lookup(item.name) is None:
            about = _facts_about(item.name, ctx)
            if not about:
                raise ProofError(f"unknown fact {item.name} in using clause", item.span)
            selected.extend(about)
            continue
        label = item.name if isinstance(item, FactRef) else item.rule if isinstance(item, RuleApp) else "_"
        selected.append(NamedFormula(label, evaluate(item, ctx)))
    return selected, with_defaults
