"""
Domain Layer - Repository Interfaces

Abstract interfaces for loading proof documents and persisting the
obligations the checker could not decide itself.

KEY PRINCIPLES:
1. Repository interfaces belong to the domain
2. Implementations (file system, in-memory) belong to infrastructure
3. Services depend on these interfaces only, so tests swap in the
   in-memory implementations
"""

from abc import ABC, abstractmethod
from typing import List

from src.domain.entities import Obligation, SourceFile


class ProofDocumentRepository(ABC):
    """
    Abstract repository for proof document sources.

    A document is identified by its name (a path for the file-system
    implementation).
    """

    @abstractmethod
    async def load(self, name: str) -> SourceFile:
        """Source text of a document; raises DocumentNotFoundError"""
        pass

    @abstractmethod
    async def exists(self, name: str) -> bool:
        pass

    @abstractmethod
    async def find_all(self) -> List[str]:
        """Names of every document, sorted"""
        pass


class ObligationRepository(ABC):
    """
    Abstract repository for exported obligations.

    An exported obligation is the SMT-LIB rendering of a goal the internal
    procedures left unknown; its location is what an external solver reads.
    """

    @abstractmethod
    async def save(self, document: str, obligation: Obligation) -> str:
        """Store the SMT-LIB text of an obligation and return its location"""
        pass

    @abstractmethod
    async def find_by_document(self, document: str) -> List[str]:
        """Locations of the obligations exported for a document, in order"""
        pass

    @abstractmethod
    async def read(self, location: str) -> str:
        pass

    @abstractmethod
    async def clear(self, document: str) -> int:
        """Forget a document's exports; returns how many were removed"""
        pass


__all__ = ["ObligationRepository", "ProofDocumentRepository"]
