"""
Gibbs sampler for the rate matrix: alternate a latent full path given the
rates (one bridge per observation gap, concatenated) with a draw of the
rates from their Gamma posterior given that path.
"""
import time

import numpy as np
from tqdm import tqdm

from core.generator import validate_generator
from core.path import concatenate_paths
from stages.bridges.problem import DEFAULT_MAX_ATTEMPTS
from stages.inference.mcem import EstimationTrace, as_generator, check_observations, gap_bridges
from stages.inference.observations import ObservationSeries, observed_log_likelihood
from stages.inference.prior import GammaPrior, sample_posterior_generator
from stages.stats.sufficient_stats import accumulate
from utils.logger import get_logger, log_metrics


logger = get_logger("inference")


def sample_latent_path(g, obs: ObservationSeries, method: str, rng,
                       max_attempts: int = DEFAULT_MAX_ATTEMPTS, options: dict = None):
    """One path over [t_0, t_m] consistent with every observation."""
    segments = [paths[0] for _, paths in gap_bridges(g, obs, method, 1, rng, max_attempts, options)]
    return concatenate_paths(segments)


def gibbs_estimate(g0, obs: ObservationSeries, prior: GammaPrior, iters: int, burn_in: int,
                   method: str, rng, max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                   options: dict = None, progress: bool = False) -> EstimationTrace:
    g = as_generator(g0)
    check_observations(g, obs)

    if prior.n != g.n:
        raise ValueError(f"gibbs: prior on {prior.n} states, model on {g.n}")

    if not 0 <= burn_in < iters:
        raise ValueError(f"gibbs: need 0 <= burn_in < iters, got {burn_in} and {iters}")

    iterates, logliks = [], []
    start = time.perf_counter()

    for k in tqdm(range(1, iters + 1), desc="gibbs", disable=not progress):
        # raises UnreachableEndpoint naming the gap
        loglik = observed_log_likelihood(g, obs)
        logliks.append(loglik)

        path = sample_latent_path(g, obs, method, rng, max_attempts, options)
        stats = accumulate(path, g.n)

        rates = sample_posterior_generator(stats, prior, rng)
        iterates.append(rates)
        g = validate_generator(rates)

        logger.debug(f"gibbs: iter {k}/{iters} jumps={path.n_jumps} loglik={loglik:.6f}")
        log_metrics(logger, "gibbs", {"iter": k, "loglik": loglik, "jumps": path.n_jumps})

    elapsed = time.perf_counter() - start
    logger.info(f"gibbs: {iters} iterations in {elapsed:.2f}s (method={method}, burn-in={burn_in})")

    meta = {
        "algo": "gibbs",
        "method": method,
        "loglik": logliks,
        "elapsed": elapsed,
    }
    return EstimationTrace(np.array(iterates), burn_in, meta)
