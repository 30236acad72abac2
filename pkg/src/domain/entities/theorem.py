"""
Domain Layer - Theorem

What a checked strategy proves: the game it plays and the postcondition it
establishes, read as the box formula `[game] postcondition`.
"""

from dataclasses import dataclass

from src.domain.entities.formula import Box, Formula
from src.domain.entities.game import Game


@dataclass(frozen=True)
class Theorem:
    """Value Object: reified game plus postcondition"""

    game: Game
    postcondition: Formula

    @property
    def formula(self) -> Box:
        return Box(self.game, self.postcondition)
