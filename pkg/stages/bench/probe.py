"""
Time-reverse probe: compares TIR in "paper" mode (X2 driven by
the generator itself) against "reversed" mode on a fixed bridge (1 -> 2).

Reports p-values only; for non-reversible generators a discrepancy is a
finding, not a failure.
"""
import numpy as np

from core.generator import Generator, is_reversible, stationary_time
from core.rng import substream
from evaluation.oracles import bridge_state_law, goodness_of_fit, state_counts, two_sample_pvalue
from stages.bench.records import BenchRecord, ExperimentConfig
from stages.bridges.problem import BridgeProblem
from stages.bridges.time_reverse import sample_time_reverse
from stages.stats.expectations import expected_stats_conditional
from utils.logger import log_metrics


PROBE_ENDPOINTS = (0, 1)


def probe_cell(g: Generator, T: float, m: int, seed: int, config: dict):
    a, b = PROBE_ENDPOINTS
    prob = BridgeProblem(a, b, T, "tir", int(config["samplers"]["max_attempts"]))
    law = bridge_state_law(g, a, b, T, 0.5 * T)

    out = {}
    counts = {}

    for mode in ("paper", "reversed"):
        rng = substream(seed, "probe", g.n, T, mode)
        paths = [sample_time_reverse(g, prob, rng, mode=mode).path for _ in range(m)]

        counts[mode] = state_counts(paths, 0.5 * T, g.n)
        out[f"{mode}_law_pvalue"] = goodness_of_fit(counts[mode], law)[1]
        out[f"{mode}_mean_jumps"] = float(np.mean([p.n_jumps for p in paths]))

    out["paper_vs_reversed_pvalue"] = two_sample_pvalue(counts["paper"], counts["reversed"])

    E_N, _ = expected_stats_conditional(g, a, b, T)
    out["exact_mean_jumps"] = float(E_N.sum())

    return out


def probe_experiment(cfg: ExperimentConfig, config: dict, cell_runner, logger):
    st = config["stationary"]
    records = []

    for n in cfg.n_values:
        g = cfg.load_generator(n)
        horizons = cfg.T_values or (stationary_time(g, cfg.eps, st["norm"], st["cap"]),)

        for T in horizons:
            res = cell_runner.run(probe_cell, g, T, cfg.m, cfg.seed, config,
                                  stage=f"PROBE n={g.n} T={T:g}", allow_failure=True)

            if not res["success"]:
                records.append(BenchRecord("probe", "tir", g.n, T, "failed", 1.0, seed=cfg.seed))
                continue

            out = res["result"]
            logger.info(
                f"PROBE: n={g.n} T={T:g} reversible={is_reversible(g)} "
                f"paper-vs-reversed p={out['paper_vs_reversed_pvalue']:.4f}"
            )
            log_metrics(logger, "probe", {"n": g.n, "T": T, **out})

            for metric, value in sorted(out.items()):
                records.append(BenchRecord(
                    "probe", "tir", g.n, T, metric, value, float("nan"), res["elapsed"], cfg.seed
                ))

    return records
