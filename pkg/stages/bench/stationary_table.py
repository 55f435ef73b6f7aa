"""
Stationary times of the uniform family (or any generator) per n.
"""
from functools import partial

from core.generator import stationary_time
from stages.bench.records import BenchRecord, ExperimentConfig
from utils.logger import log_metrics


def stationary_time_table(cfg: ExperimentConfig, config: dict, cell_runner, logger):
    st = config["stationary"]
    records = []

    for n in cfg.n_values:
        g = cfg.load_generator(n)
        fn = partial(stationary_time, g, cfg.eps, st["norm"], st["cap"])

        res = cell_runner.run(fn, stage=f"STATIONARY n={g.n}", allow_failure=True, quiet=True)

        if not res["success"]:
            records.append(BenchRecord("stationary", "none", g.n, float("nan"), "failed", 1.0, seed=cfg.seed))
            continue

        rho = res["result"]
        logger.info(f"STATIONARY: n={g.n} rho={rho:.2f} (eps={cfg.eps:g}, norm={st['norm']})")
        log_metrics(logger, "stationary", {"n": g.n, "rho": rho})

        records.append(BenchRecord(
            "stationary", "none", g.n, float("nan"), "stationary_time", rho, 0.0, res["elapsed"], cfg.seed
        ))

    return records
