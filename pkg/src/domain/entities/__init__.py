"""Domain entities package"""

from .source import Diagnostic, Severity, SourceFile, SourceSpan
from .node import GhostStatus, Node
from .term import (
    Add, Apply, Div, LocatedTerm, Max, Min, Mul, Neg, Num, PendingTerm, Pow, Sub, Term, Var,
)
from .formula import (
    And, Box, Compare, CompareOp, Diamond, Exists, FalseF, Forall, Formula, Iff, Implies,
    LocatedFormula, Not, Or, PendingFormula, PredApply, TrueF,
)
from .game import (
    Assign, Choice, Dual, Game, GameRef, Loop, Ode, OdeEquation, RandomAssign, Sequence, Test,
)
from .statement import (
    Assert, Assume, Block, Command, Conclusion, DefinitionKind, DemonicChoice, DemonicLoop,
    EllipsisTerm, FactRef, ForLoop, ForwardGhost, InverseGhost, LabelStmt, Let, LoopInvariant,
    Method, MethodKind, Modify, Note, OdeProof, Print, ProofTerm, Proves, RuleApp, Statement,
    Switch, SwitchCase,
)
from .definitions import Definition, DefinitionRegistry
from .polynomial import Polynomial, RationalForm
from .goal import Goal, NamedFormula, Obligation, Procedure, Verdict, VerdictCertificate
from .context import Context, FactEntry, FactKind, Frame, FrameKind
from .ssa import Difference, LabelEntry, LabelRegistry, SsaState
from .kernel import KERNEL_RULES, KernelRule
from .document import ProofDocument
from .ode_system import DomainClause, OdeSystem, Polarity, SolutionTable
from .elaborated import ElaboratedDocument, Resolution
from .checked import CheckedDocument
from .theorem import Theorem
from .refinement import ProvesOutcome, RefinementStep, RefinementTrace, StepKind
from .metrics import FileMetrics
from .report import DocumentReport

__all__ = [
    "Diagnostic", "Severity", "SourceFile", "SourceSpan",
    "GhostStatus", "Node",
    "Add", "Apply", "Div", "LocatedTerm", "Max", "Min", "Mul", "Neg", "Num", "PendingTerm",
    "Pow", "Sub", "Term", "Var",
    "And", "Box", "Compare", "CompareOp", "Diamond", "Exists", "FalseF", "Forall", "Formula",
    "Iff", "Implies", "LocatedFormula", "Not", "Or", "PendingFormula", "PredApply", "TrueF",
    "Assign", "Choice", "Dual", "Game", "GameRef", "Loop", "Ode", "OdeEquation",
    "RandomAssign", "Sequence", "Test",
    "Assert", "Assume", "Block", "Command", "Conclusion", "DefinitionKind", "DemonicChoice",
    "DemonicLoop", "EllipsisTerm", "FactRef", "ForLoop", "ForwardGhost", "InverseGhost",
    "LabelStmt", "Let", "LoopInvariant", "Method", "MethodKind", "Modify", "Note", "OdeProof",
    "Print", "ProofTerm", "Proves", "RuleApp", "Statement", "Switch", "SwitchCase",
    "Definition", "DefinitionRegistry",
    "Polynomial", "RationalForm",
    "Goal", "NamedFormula", "Obligation", "Procedure", "Verdict", "VerdictCertificate",
    "Context", "FactEntry", "FactKind", "Frame", "FrameKind",
    "Difference", "LabelEntry", "LabelRegistry", "SsaState",
    "KERNEL_RULES", "KernelRule",
    "ProofDocument",
    "DomainClause", "OdeSystem", "Polarity", "SolutionTable",
    "ElaboratedDocument", "Resolution",
    "CheckedDocument",
    "Theorem",
    "ProvesOutcome", "RefinementStep", "RefinementTrace", "StepKind",
    "FileMetrics",
    "DocumentReport",
]
