"""
Monte Carlo EM for the rate matrix.

E-step: per observation gap draw B bridges under the current iterate,
average their stats, and sum over gaps. M-step: lambda_ij = N_ij / R_i.
"""
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from tqdm import tqdm

from core.errors import ZeroOccupation
from core.generator import Generator, validate_generator
from stages.bridges.dispatch import sample_bridge
from stages.bridges.problem import DEFAULT_MAX_ATTEMPTS, BridgeProblem
from stages.inference.observations import ObservationSeries, observed_log_likelihood
from stages.stats.sufficient_stats import accumulate, ensemble_mean, mle_from_stats, zero_stats
from utils.logger import get_logger, log_metrics


logger = get_logger("inference")

DEFAULT_CLAMP = 1e-12


# =====================================================
# TRACE
# =====================================================
@dataclass(eq=False)
class EstimationTrace:
    iterates: np.ndarray
    burn_in: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.iterates = np.asarray(self.iterates, dtype=float)

        if self.iterates.ndim != 3 or self.iterates.shape[1] != self.iterates.shape[2]:
            raise ValueError("trace: iterates must have shape (K, n, n)")

        if not 0 <= self.burn_in < len(self.iterates):
            raise ValueError(
                f"trace: burn_in {self.burn_in} must be below the length {len(self.iterates)}"
            )

    def __len__(self):
        return len(self.iterates)

    @property
    def n(self) -> int:
        return self.iterates.shape[1]

    def estimate(self, tail: int = None) -> np.ndarray:
        """Average of the last `tail` iterates, or of all post-burn-in iterates."""
        kept = self.iterates[self.burn_in:]
        if tail is not None:
            kept = kept[-tail:]
        return kept.mean(axis=0)

    def to_frame(self) -> pd.DataFrame:
        K, n, _ = self.iterates.shape
        k, i, j = np.meshgrid(np.arange(K), np.arange(n), np.arange(n), indexing="ij")
        off = i != j

        return pd.DataFrame({
            "iter": k[off] + 1,
            "i": i[off] + 1,
            "j": j[off] + 1,
            "value": self.iterates[off],
        })

    def to_csv(self, path=None) -> str:
        text = self.to_frame().to_csv(index=False, float_format="%.12g", lineterminator="\n")
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


# =====================================================
# SHARED HELPERS
# =====================================================
def as_generator(rates) -> Generator:
    if isinstance(rates, Generator):
        return rates
    return validate_generator(rates)


def check_observations(g: Generator, obs: ObservationSeries):
    if obs.n_states > g.n:
        raise ValueError(
            f"inference: observed state {obs.n_states} outside the {g.n}-state model"
        )


def gap_bridges(g: Generator, obs: ObservationSeries, method: str, count: int, rng,
                max_attempts: int = DEFAULT_MAX_ATTEMPTS, options: dict = None):
    """`count` bridges per gap, each gap on its own child stream."""
    options = options or {}

    for (k, x, y, gap), child in zip(obs.transitions(), rng.spawn(obs.m)):
        prob = BridgeProblem(x, y, gap, method, max_attempts)
        yield k, [sample_bridge(g, prob, child, **options).path for _ in range(count)]


def _clamp(rates: np.ndarray, floor: float) -> np.ndarray:
    rates = rates.copy()
    off = ~np.eye(len(rates), dtype=bool)
    rates[off] = np.maximum(rates[off], floor)

    np.fill_diagonal(rates, 0.0)
    np.fill_diagonal(rates, -rates.sum(axis=1))
    return rates


# =====================================================
# MCEM
# =====================================================
def mcem_estimate(lambda0, obs: ObservationSeries, iters: int, bridges: int, method: str,
                  rng, clamp: float = DEFAULT_CLAMP,
                  max_attempts: int = DEFAULT_MAX_ATTEMPTS, options: dict = None,
                  progress: bool = False) -> EstimationTrace:
    g = as_generator(lambda0)
    check_observations(g, obs)

    if iters < 1 or bridges < 1:
        raise ValueError("mcem: iters and bridges must be >= 1")

    off = ~np.eye(g.n, dtype=bool)
    if np.any(g.rates[off] <= 0):
        raise ValueError("mcem: initial rates must be strictly positive off the diagonal")

    iterates, logliks = [], []
    start = time.perf_counter()

    for k in tqdm(range(1, iters + 1), desc="mcem", disable=not progress):
        loglik = observed_log_likelihood(g, obs)
        logliks.append(loglik)

        total = zero_stats(g.n)
        for _, paths in gap_bridges(g, obs, method, bridges, rng, max_attempts, options):
            total = total + ensemble_mean(accumulate(p, g.n) for p in paths)

        empty = np.flatnonzero(total.R <= 0)
        if len(empty):
            raise ZeroOccupation(int(empty[0]), f"mcem iteration {k}")

        rates = _clamp(mle_from_stats(total), clamp)
        iterates.append(rates)
        g = validate_generator(rates)

        logger.debug(f"mcem: iter {k}/{iters} loglik={loglik:.6f}")
        log_metrics(logger, "mcem", {"iter": k, "loglik": loglik})

    elapsed = time.perf_counter() - start
    logger.info(f"mcem: {iters} iterations in {elapsed:.2f}s (method={method})")

    meta = {
        "algo": "mcem",
        "method": method,
        "bridges": bridges,
        "loglik": logliks,
        "elapsed": elapsed,
    }
    return EstimationTrace(np.array(iterates), 0, meta)
