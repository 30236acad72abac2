"""
Domain Layer - Proof Metrics

Line counts of one proof document: how much of it is model and how much is
proof, and how many lines pick their assumptions with `using`.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class FileMetrics:
    name: str
    counted: int = 0
    model: int = 0
    proof: int = 0
    using: int = 0

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if min(self.counted, self.model, self.proof, self.using) < 0:
            raise ValueError("Line counts cannot be negative")
        if self.model + self.proof != self.counted:
            raise ValueError("Every counted line is either a model or a proof line")
        if self.using > self.proof:
            raise ValueError("A `using` line is a proof line")
