"""
Domain Layer - Proof Document Aggregate

A proof document is one `.kaisar` file: its text, the statements of the
strategy, and the commands asking for its conclusion or checking it against
a game.
"""

from typing import List, Tuple

from src.domain.entities.source import SourceFile
from src.domain.entities.statement import Command, Conclusion, Proves, Statement


class ProofDocument:
    """
    Aggregate Root: a parsed proof document.

    Statements and commands are immutable tuples; the document itself is
    identified by its source name.
    """

    def __init__(
        self,
        source: SourceFile,
        statements: Tuple[Statement, ...],
        commands: Tuple[Command, ...] = ()
    ):
        self.source = source
        self.statements = tuple(statements)
        self.commands = tuple(commands)

        self._validate()

    def _validate(self) -> None:
        if not self.source.name:
            raise ValueError("A proof document needs a name")

    @property
    def name(self) -> str:
        return self.source.name

    @property
    def is_empty(self) -> bool:
        return not self.statements

    def conclusions(self) -> List[Conclusion]:
        return [c for c in self.commands if isinstance(c, Conclusion)]

    def proves_commands(self) -> List[Proves]:
        return [c for c in self.commands if isinstance(c, Proves)]

    def __repr__(self) -> str:
        return (
            f"ProofDocument(name={self.name}, statements={len(self.statements)}, "
            f"commands={len(self.commands)})"
        )
