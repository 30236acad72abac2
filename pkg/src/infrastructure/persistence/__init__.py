"""Repository implementations: file system and in-memory"""

from .file_repositories import FileObligationRepository, FileProofDocumentRepository
from .in_memory_repositories import InMemoryObligationRepository, InMemoryProofDocumentRepository

__all__ = [
    "FileObligationRepository",
    "FileProofDocumentRepository",
    "InMemoryObligationRepository",
    "InMemoryProofDocumentRepository",
]
