"""
Bridge problem and result types shared by all six samplers.
"""
from dataclasses import dataclass

from core.generator import Generator
from core.path import Path


METHODS = ("rej", "mor", "dir", "uni", "bis", "tir")
DEFAULT_MAX_ATTEMPTS = 1_000_000


@dataclass(frozen=True)
class BridgeProblem:
    a: int
    b: int
    T: float
    method: str = "tir"
    max_attempts: int = DEFAULT_MAX_ATTEMPTS

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError(f"bridge: horizon must be positive, got {self.T}")

        if self.max_attempts < 1:
            raise ValueError(f"bridge: max_attempts must be >= 1, got {self.max_attempts}")

        if self.method not in METHODS:
            raise ValueError(f"bridge: unknown method '{self.method}'")

    def check(self, g: Generator):
        if not (0 <= self.a < g.n and 0 <= self.b < g.n):
            raise ValueError(
                f"bridge: endpoints ({self.a + 1}, {self.b + 1}) outside 1..{g.n}"
            )


@dataclass(frozen=True)
class BridgeSample:
    path: Path
    attempts: int
    method: str
