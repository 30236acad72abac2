"""
Infrastructure Layer - File-System Repository Implementations

Documents are `.kaisar` files; exported obligations are written as `.smt2`
files under the configured export directory, one subdirectory per document.
Blocking file access runs in a worker thread so documents checked
concurrently do not wait on each other's I/O.
"""

import asyncio
import logging
import re
from pathlib import Path
from typing import List, Optional

from src.domain.entities import Obligation, SourceFile
from src.domain.exceptions import DocumentNotFoundError
from src.domain.repositories import ObligationRepository, ProofDocumentRepository

logger = logging.getLogger(__name__)

DOCUMENT_SUFFIX = ".kaisar"

_UNSAFE = re.compile(r"[^A-Za-z0-9_.-]+")


def _safe(name: str) -> str:
    return _UNSAFE.sub("_", name).strip("_") or "obligation"


class FileProofDocumentRepository(ProofDocumentRepository):
    """Documents on disk; relative names resolve against `root`"""

    def __init__(self, root: Optional[str] = None):
        self.root = Path(root) if root is not None else None

    def _path(self, name: str) -> Path:
        path = Path(name)
        if self.root is not None and not path.is_absolute():
            path = self.root / path
        return path

    async def load(self, name: str) -> SourceFile:
        path = self._path(name)
        try:
            text = await asyncio.to_thread(path.read_text, encoding="utf-8")
        except FileNotFoundError:
            raise DocumentNotFoundError(name)
        except (OSError, UnicodeDecodeError) as exc:
            raise DocumentNotFoundError(name, str(exc))
        return SourceFile(name, text)

    async def exists(self, name: str) -> bool:
        return self._path(name).is_file()

    async def find_all(self) -> List[str]:
        if self.root is None:
            return []
        return sorted(
            str(p.relative_to(self.root)) for p in self.root.rglob(f"*{DOCUMENT_SUFFIX}")
        )


class FileObligationRepository(ObligationRepository):
    """`<export_dir>/<document stem>/<index>-<obligation>.smt2`"""

    def __init__(self, export_dir: str):
        self.export_dir = Path(export_dir)

    def _directory(self, document: str) -> Path:
        return self.export_dir / _safe(Path(document).stem)

    async def save(self, document: str, obligation: Obligation) -> str:
        directory = self._directory(document)
        await asyncio.to_thread(directory.mkdir, parents=True, exist_ok=True)
        index = len(await self.find_by_document(document))
        path = directory / f"{index:03d}-{_safe(obligation.name)}.smt2"
        await asyncio.to_thread(path.write_text, obligation.smtlib or "", encoding="utf-8")
        logger.debug("exported %s to %s", obligation.name, path)
        return str(path)

    async def find_by_document(self, document: str) -> List[str]:
        directory = self._directory(document)
        if not directory.is_dir():
            return []
        return sorted(str(p) for p in directory.glob("*.smt2"))

    async def read(self, location: str) -> str:
        try:
            return await asyncio.to_thread(Path(location).read_text, encoding="utf-8")
        except OSError:
            raise DocumentNotFoundError(location, "no such export")

    async def clear(self, document: str) -> int:
        removed = 0
        for location in await self.find_by_document(document):
            Path(location).unlink(missing_ok=True)
            removed += 1
        return removed
