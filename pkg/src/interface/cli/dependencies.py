"""
Interface Layer - Dependencies

Wires repositories, settings and services for one command-line run.

- Settings come from the environment; flags override them per run
- Documents are read from the file system; exports go to `export_dir`
- Tests call `build_document_service` with in-memory repositories instead
"""

import logging
import sys
from typing import Optional

from src.application.services.document_service import DocumentService
from src.domain.repositories import ObligationRepository, ProofDocumentRepository
from src.infrastructure.config import CheckerSettings, get_settings
from src.infrastructure.persistence import FileObligationRepository, FileProofDocumentRepository
from src.infrastructure.solvers import ExternalSolver
from src.interface.cli.schemas import RunConfig

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def settings_for(config: RunConfig, base: Optional[CheckerSettings] = None) -> CheckerSettings:
    """Environment settings with this run's flags applied"""
    settings = base or get_settings()
    update = {}
    if config.solver is not None:
        update["solver"] = config.solver
    if config.delta is not None:
        update["default_delta"] = config.delta
    return settings.model_copy(update=update) if update else settings


def configure_logging(config: RunConfig, settings: CheckerSettings) -> None:
    """Logs go to standard error so standard output stays deterministic"""
    if config.verbose >= 2:
        level = logging.DEBUG
    elif config.verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.log_level)
    logging.basicConfig(level=level, stream=sys.stderr, format=LOG_FORMAT)


def build_document_service(
    settings: CheckerSettings,
    document_repository: Optional[ProofDocumentRepository] = None,
    obligation_repository: Optional[ObligationRepository] = None,
) -> DocumentService:
    solver = None
    if settings.solver:
        solver = ExternalSolver(settings.solver, settings.solver_timeout)
    return DocumentService(
        document_repository or FileProofDocumentRepository(),
        obligation_repository or FileObligationRepository(settings.export_dir),
        settings=settings,
        solver=solver,
    )
