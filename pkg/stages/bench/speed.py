"""
Speed benchmark: per-bridge wall-clock time of each method over m bridges
with random endpoints, repeated `replicates` times after a warm-up pass.
"""
import time
from functools import partial

import numpy as np

from config.config_manager import sampler_options
from core.errors import MJPError
from core.generator import Generator
from core.rng import substream
from stages.bench.accuracy import random_endpoints
from stages.bench.records import BenchRecord, ExperimentConfig
from stages.bridges.dispatch import sample_bridge
from stages.bridges.problem import BridgeProblem
from utils.logger import log_metrics


def time_bridges(g: Generator, method: str, T: float, endpoints, rng, options, max_attempts):
    """Per-bridge seconds (nan for failures) in endpoint order."""
    seconds = np.full(len(endpoints), np.nan)

    for k, (a, b) in enumerate(endpoints):
        prob = BridgeProblem(a, b, T, method, max_attempts)

        start = time.perf_counter()
        try:
            sample_bridge(g, prob, rng, **options)
        except MJPError:
            continue
        seconds[k] = time.perf_counter() - start

    return seconds


def speed_cell(g: Generator, method: str, T: float, endpoints, replicates: int, warmup: int,
               seed: int, config: dict):
    options = sampler_options(config, method)
    max_attempts = int(config["samplers"]["max_attempts"])

    time_bridges(g, method, T, endpoints[:warmup], substream(seed, "warmup", method, T),
                 options, max_attempts)

    runs = np.vstack([
        time_bridges(g, method, T, endpoints, substream(seed, "speed", g.n, T, method, r),
                     options, max_attempts)
        for r in range(replicates)
    ])

    return runs


def _summaries(runs, endpoints, n):
    """Median-of-replicates per-bridge mean, overall and per end state."""
    ends = np.array([b for _, b in endpoints])
    out = {}

    per_rep = np.nanmean(runs, axis=1)
    out["seconds_per_bridge"] = (float(np.median(per_rep)), _spread(per_rep))

    for b in range(n):
        cols = ends == b
        if not cols.any() or np.all(np.isnan(runs[:, cols])):
            continue

        per_rep_b = np.nanmean(runs[:, cols], axis=1)
        out[f"seconds_end_{b + 1}"] = (float(np.median(per_rep_b)), _spread(per_rep_b))

    out["failure_rate"] = (float(np.isnan(runs).mean()), float("nan"))
    return out


def _spread(values):
    values = values[np.isfinite(values)]
    if len(values) < 2:
        return float("nan")
    return float(values.std(ddof=1) / np.sqrt(len(values)))


def speed_experiment(cfg: ExperimentConfig, config: dict, cell_runner, logger):
    warmup = int(config["bench"]["warmup"])
    records = []

    for n in cfg.n_values:
        g = cfg.load_generator(n)

        for T in cfg.T_values:
            endpoints = random_endpoints(g.n, cfg.m, substream(cfg.seed, "endpoints", cfg.model_label, g.n, T))

            for method in cfg.methods:
                fn = partial(speed_cell, g, method, T, endpoints, cfg.replicates, warmup, cfg.seed, config)
                res = cell_runner.run(fn, stage=f"SPEED {method} n={g.n} T={T:g}", allow_failure=True)

                if not res["success"]:
                    records.append(BenchRecord("speed", method, g.n, T, "failed", 1.0, seed=cfg.seed))
                    continue

                runs = res["result"]
                if np.all(np.isnan(runs)):
                    records.append(BenchRecord(
                        "speed", method, g.n, T, "failure_rate", 1.0, seconds=res["elapsed"], seed=cfg.seed
                    ))
                    continue

                for metric, (value, spread) in _summaries(runs, endpoints, g.n).items():
                    records.append(BenchRecord(
                        "speed", method, g.n, T, metric, value, spread, res["elapsed"], cfg.seed
                    ))

                log_metrics(logger, "speed", {
                    "method": method, "n": g.n, "T": T,
                    "seconds_per_bridge": float(np.nanmedian(np.nanmean(runs, axis=1))),
                })

    return records
