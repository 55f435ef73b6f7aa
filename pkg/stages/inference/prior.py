"""
Conjugate Gamma prior on the off-diagonal rates.

Given complete-data stats (N, R) the posterior factorizes into independent
lambda_ij ~ Gamma(shape N_ij + a_ij, rate R_i + b_i).
"""
from dataclasses import dataclass

import numpy as np

from stages.stats.sufficient_stats import SufficientStats


@dataclass(frozen=True, eq=False)
class GammaPrior:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)

        if a.ndim != 2 or a.shape[0] != a.shape[1] or b.shape != (a.shape[0],):
            raise ValueError("prior: a must be n x n and b length n")

        off = ~np.eye(a.shape[0], dtype=bool)
        if np.any(a[off] <= 0) or np.any(b <= 0):
            raise ValueError("prior: hyperparameters must be positive")

        np.fill_diagonal(a, 0.0)

        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return len(self.b)

    @classmethod
    def constant(cls, n: int, a: float = 1.0, b: float = 1.0) -> "GammaPrior":
        return cls(np.full((n, n), a), np.full(n, b))

    def sample(self, rng) -> np.ndarray:
        """A rate matrix drawn from the prior itself."""
        return _draw(self.a, self.b, rng)


def _draw(shape, rate, rng) -> np.ndarray:
    n = len(rate)
    off = ~np.eye(n, dtype=bool)

    rates = np.zeros((n, n))
    scale = np.broadcast_to(1.0 / rate[:, None], (n, n))
    rates[off] = rng.gamma(shape[off], scale[off])

    np.fill_diagonal(rates, -rates.sum(axis=1))
    return rates


def sample_posterior_generator(s: SufficientStats, prior: GammaPrior, rng) -> np.ndarray:
    if s.n != prior.n:
        raise ValueError(f"posterior: stats on {s.n} states, prior on {prior.n}")

    rate = s.R + prior.b
    if np.any(rate <= 0):
        raise ValueError("posterior: R_i + b_i must be positive")

    return _draw(s.N + prior.a, rate, rng)
