"""
Shared fixtures: the example corpus, settings isolated from the environment,
and the checking pipeline wired the way the command line wires it, with
in-memory repositories.
"""

from pathlib import Path
from typing import Callable, Dict

import pytest

from src.application.services.arithmetic_service import ArithmeticService
from src.application.services.document_service import DocumentService
from src.application.services.elaboration_service import ElaborationService
from src.application.services.proof_checking_service import ProofCheckingService
from src.application.services.reification_service import ReificationService
from src.application.services.refinement_service import RefinementService
from src.domain.entities import CheckedDocument, ElaboratedDocument
from src.infrastructure.config import CheckerSettings
from src.infrastructure.parsing import parse_text
from src.infrastructure.persistence import (
    InMemoryObligationRepository,
    InMemoryProofDocumentRepository,
)

ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = ROOT / "corpus"
MUTATIONS_DIR = CORPUS_DIR / "mutations"

# documents the internal procedures check without an external solver
OFFLINE_CORPUS = (
    "angelic-drive",
    "assignment",
    "backward-label",
    "bit-switch",
    "circle",
    "commands",
    "conserved",
    "demonic-loop",
    "differential-ghost",
    "forward-determined",
    "ghost-loop",
    "increasing",
    "into-choice",
    "inverse-ghost-ode",
    "inverse-ghost-tests",
    "let-note",
    "ode-solution",
    "out-of-choice",
    "prop-using",
    "stopping-distance",
    "triangular",
    "velocity-controller",
)


def corpus_files() -> Dict[str, str]:
    return {p.stem: p.read_text(encoding="utf-8") for p in sorted(CORPUS_DIR.glob("*.kaisar"))}


def mutation_files() -> Dict[str, str]:
    return {p.stem: p.read_text(encoding="utf-8") for p in sorted(MUTATIONS_DIR.glob("*.kaisar"))}


@pytest.fixture
def settings() -> CheckerSettings:
    return CheckerSettings(_env_file=None, solver=None, default_delta=None, log_level="WARNING")


@pytest.fixture
def arithmetic(settings: CheckerSettings) -> ArithmeticService:
    return ArithmeticService(settings)


@pytest.fixture
def elaborator() -> ElaborationService:
    return ElaborationService()


@pytest.fixture
def checker(arithmetic: ArithmeticService, settings: CheckerSettings) -> ProofCheckingService:
    return ProofCheckingService(arithmetic, settings=settings)


@pytest.fixture
def reifier() -> ReificationService:
    return ReificationService()


@pytest.fixture
def refiner(arithmetic: ArithmeticService, settings: CheckerSettings) -> RefinementService:
    return RefinementService(arithmetic, settings)


@pytest.fixture
def elaborate(elaborator: ElaborationService) -> Callable[[str], ElaboratedDocument]:
    def run(text: str) -> ElaboratedDocument:
        return elaborator.elaborate(parse_text(text, "test.kaisar"))
    return run


@pytest.fixture
def check(
    elaborate: Callable[[str], ElaboratedDocument], checker: ProofCheckingService
) -> Callable[[str], CheckedDocument]:
    def run(text: str) -> CheckedDocument:
        return checker.check(elaborate(text))
    return run


@pytest.fixture
def documents() -> InMemoryProofDocumentRepository:
    repository = InMemoryProofDocumentRepository()
    for name, text in corpus_files().items():
        repository.add(f"{name}.kaisar", text)
    for name, text in mutation_files().items():
        repository.add(f"mutations/{name}.kaisar", text)
    return repository


@pytest.fixture
def exports() -> InMemoryObligationRepository:
    return InMemoryObligationRepository()


@pytest.fixture
def document_service(
    documents: InMemoryProofDocumentRepository,
    exports: InMemoryObligationRepository,
    settings: CheckerSettings,
) -> DocumentService:
    return DocumentService(documents, exports, settings=settings)
