"""
Accuracy sweep: 1-norm distance between Monte Carlo averaged bridge stats
and their exact conditional expectations, per (n, method).

The horizon is the stationary time of the generator unless T values are
given. Endpoint pairs are drawn once per (n, T) and shared by all methods.
"""
from functools import partial

import numpy as np
from joblib import Parallel, delayed

from config.config_manager import sampler_options
from core.generator import Generator, stationary_time
from core.rng import substream
from stages.bench.records import BenchRecord, ExperimentConfig
from stages.bridges.dispatch import sample_bridge
from stages.bridges.problem import BridgeProblem
from stages.stats.expectations import expected_stats_conditional, expected_stats_uniform_closed_form
from stages.stats.sufficient_stats import accumulate
from utils.logger import log_metrics


def random_endpoints(n: int, count: int, rng):
    """`count` pairs (a, b) uniform on E x E."""
    pairs = rng.integers(n, size=(count, 2))
    return [(int(a), int(b)) for a, b in pairs]


def exact_stats(g: Generator, a: int, b: int, T: float, uniform: bool):
    if uniform:
        return expected_stats_uniform_closed_form(g.n, T, a, b)
    return expected_stats_conditional(g, a, b, T)


def stats_error(g: Generator, prob: BridgeProblem, m: int, rng, exact, options):
    """(N 1-norm, R 1-norm, N aggregate stderr, R aggregate stderr) for one endpoint pair."""
    n = g.n
    off = ~np.eye(n, dtype=bool)

    N = np.empty((m, n * n - n))
    R = np.empty((m, n))

    for k in range(m):
        s = accumulate(sample_bridge(g, prob, rng, **options).path, n)
        N[k] = s.N[off]
        R[k] = s.R

    E_N, E_R = exact
    err_n = float(np.abs(N.mean(axis=0) - E_N[off]).sum())
    err_r = float(np.abs(R.mean(axis=0) - E_R).sum())

    if m > 1:
        se_n = float((N.std(axis=0, ddof=1) / np.sqrt(m)).sum())
        se_r = float((R.std(axis=0, ddof=1) / np.sqrt(m)).sum())
    else:
        se_n = se_r = float("nan")

    return err_n, err_r, se_n, se_r


def accuracy_cell(g: Generator, method: str, T: float, endpoints, m: int, seed: int,
                  config: dict, uniform: bool):
    max_attempts = int(config["samplers"]["max_attempts"])
    options = sampler_options(config, method)

    rows = []
    for d, (a, b) in enumerate(endpoints):
        prob = BridgeProblem(a, b, T, method, max_attempts)
        rng = substream(seed, "accuracy", g.n, T, method, d)
        rows.append(stats_error(g, prob, m, rng, exact_stats(g, a, b, T, uniform), options))

    return np.mean(np.array(rows), axis=0)


def _horizons(cfg: ExperimentConfig, g: Generator, config: dict):
    if cfg.T_values:
        return cfg.T_values

    st = config["stationary"]
    return (stationary_time(g, cfg.eps, st["norm"], st["cap"]),)


def accuracy_experiment(cfg: ExperimentConfig, config: dict, cell_runner, logger):
    draws = int(config["bench"]["endpoint_draws"])
    n_jobs = int(config["bench"]["n_jobs"])

    cells = []
    for n in cfg.n_values:
        g = cfg.load_generator(n)
        uniform = cfg.generator in ("uniform", "model1") and not cfg.generator_file

        for T in _horizons(cfg, g, config):
            endpoints = random_endpoints(g.n, draws, substream(cfg.seed, "endpoints", g.n, T))
            logger.info(f"ACCURACY: n={g.n} T={T:g} endpoints={[(a + 1, b + 1) for a, b in endpoints]}")

            for method in cfg.methods:
                fn = partial(accuracy_cell, g, method, T, endpoints, cfg.m, cfg.seed, config, uniform)
                cells.append((g.n, T, method, fn))

    results = Parallel(n_jobs=n_jobs)(
        delayed(cell_runner.run)(fn, stage=f"ACCURACY {method} n={n} T={T:g}", allow_failure=True)
        for n, T, method, fn in cells
    )

    records = []
    for (n, T, method, _), res in zip(cells, results):
        if not res["success"]:
            records.append(BenchRecord("accuracy", method, n, T, "failed", 1.0, seed=cfg.seed))
            log_metrics(logger, "accuracy", {"method": method, "n": n, "T": T, "error": res["error"]})
            continue

        err_n, err_r, se_n, se_r = res["result"]
        seconds = res["elapsed"]

        records.append(BenchRecord("accuracy", method, n, T, "N_norm1", err_n, se_n, seconds, cfg.seed))
        records.append(BenchRecord("accuracy", method, n, T, "R_norm1", err_r, se_r, seconds, cfg.seed))

        log_metrics(logger, "accuracy", {
            "method": method, "n": n, "T": T, "N_norm1": err_n, "R_norm1": err_r,
        })

    return records
