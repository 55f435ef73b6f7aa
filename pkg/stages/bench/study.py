"""
Estimation study: simulate observations from a known generator, estimate
it with MCEM and with the Gibbs sampler, and tabulate both against the truth.
"""
import numpy as np

from config.config_manager import sampler_options
from core.generator import builtin_generator, from_offdiagonal
from core.rng import substream
from stages.bench.records import BenchRecord, ExperimentConfig
from stages.inference.gibbs import gibbs_estimate
from stages.inference.mcem import mcem_estimate
from stages.inference.observations import simulate_observations
from stages.inference.prior import GammaPrior
from stages.inference.report import emit_estimate_table
from stages.inference.summary import summarize_trace


def run_study(config: dict, seed: int, logger):
    """(true generator, observations, MCEM summary, Gibbs summary)."""
    st = config["study"]
    inf = config["inference"]
    method = inf["method"]
    options = sampler_options(config, method)
    max_attempts = int(config["samplers"]["max_attempts"])

    g = builtin_generator(st["generator"])
    obs = simulate_observations(g, st["T"], st["delta"], substream(seed, "study", "data"))
    logger.info(f"STUDY: {obs.m} gaps of {obs.delta:g} on {g.n} states, method={method}")

    init = np.full((g.n, g.n), float(inf["init"]))
    mcem = mcem_estimate(
        from_offdiagonal(init), obs, st["mcem_iters"], inf["bridges"], method,
        substream(seed, "study", "mcem"), clamp=inf["clamp"],
        max_attempts=max_attempts, options=options, progress=inf["progress"],
    )

    prior = GammaPrior.constant(g.n, inf["prior_a"], inf["prior_b"])
    gibbs_rng = substream(seed, "study", "gibbs")
    gibbs = gibbs_estimate(
        prior.sample(gibbs_rng), obs, prior, st["gibbs_iters"], st["gibbs_burn_in"], method,
        gibbs_rng, max_attempts=max_attempts, options=options, progress=inf["progress"],
    )

    mcem_summary = summarize_trace(mcem, st["mcem_tail"])
    gibbs_summary = summarize_trace(gibbs, st["gibbs_iters"] - st["gibbs_burn_in"])

    return g, obs, mcem_summary, gibbs_summary


def study_experiment(cfg: ExperimentConfig, config: dict, cell_runner, logger, paths=None):
    res = cell_runner.run(run_study, config, cfg.seed, logger, stage="STUDY")
    g, obs, mcem_summary, gibbs_summary = res["result"]

    table, _, text = emit_estimate_table(
        g.rates, mcem_summary, gibbs_summary,
        csv_path=paths.table_csv if paths is not None else None,
        text_path=paths.table_text if paths is not None else None,
    )
    logger.info("STUDY table:\n" + text)

    records = []
    for algo, summary in (("mcem", mcem_summary), ("gibbs", gibbs_summary)):
        for row in summary.itertuples(index=False):
            for stat in ("mean", "q025", "q975"):
                records.append(BenchRecord(
                    "study", algo, g.n, float(obs.times[-1]), f"{row.parameter}_{stat}",
                    float(getattr(row, stat)), float("nan"), res["elapsed"], cfg.seed,
                ))

    return records, table
