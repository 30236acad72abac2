"""
Infrastructure Layer - In-Memory Repository Implementations

Dictionary-backed implementations of the domain repositories, used by the
tests and by callers that check documents held in memory.
"""

from typing import Dict, List, Mapping, Optional

from src.domain.entities import Obligation, SourceFile
from src.domain.exceptions import DocumentNotFoundError
from src.domain.repositories import ObligationRepository, ProofDocumentRepository


class InMemoryProofDocumentRepository(ProofDocumentRepository):
    """Documents given as a name-to-text mapping"""

    def __init__(self, documents: Optional[Mapping[str, str]] = None):
        self._documents: Dict[str, str] = dict(documents or {})

    def add(self, name: str, text: str) -> None:
        self._documents[name] = text

    async def load(self, name: str) -> SourceFile:
        if name not in self._documents:
            raise DocumentNotFoundError(name)
        return SourceFile(name, self._documents[name])

    async def exists(self, name: str) -> bool:
        return name in self._documents

    async def find_all(self) -> List[str]:
        return sorted(self._documents)


class InMemoryObligationRepository(ObligationRepository):
    """
    Keeps exported SMT-LIB text under `memory://document/index` locations.
    """

    def __init__(self) -> None:
        self._exports: Dict[str, str] = {}
        self._by_document: Dict[str, List[str]] = {}

    async def save(self, document: str, obligation: Obligation) -> str:
        locations = self._by_document.setdefault(document, [])
        location = f"memory://{document}/{len(locations)}"
        self._exports[location] = obligation.smtlib or ""
        locations.append(location)
        return location

    async def find_by_document(self, document: str) -> List[str]:
        return list(self._by_document.get(document, []))

    async def read(self, location: str) -> str:
        if location not in self._exports:
            raise DocumentNotFoundError(location, "no such export")
        return self._exports[location]

    async def clear(self, document: str) -> int:
        locations = self._by_document.pop(document, [])
        for location in locations:
            self._exports.pop(location, None)
        return len(locations)
