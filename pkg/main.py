"""
Command-line entry point.

    python main.py bridge --generator model2 --a 1 --b 2 --T 3 --method tir --seed 7
    python main.py simulate --generator study4 --T 10 --observe 0.1 --out obs.csv
    python main.py estimate --algo mcem --obs obs.csv --iters 150 --bridges 100 --init 0.5
    python main.py bench --experiment speed --model model2 --T 1:6 --m 1000
    python main.py stationary --generator uniform --n 3 --eps 0.005

Every subcommand accepts --config FILE with `key = value` lines named like
the long flags; flags given on the command line win over the file.
"""
from dataclasses import dataclass, field
from pathlib import Path
import shutil
import sys

import configargparse
import numpy as np
import pandas as pd

from config.config_manager import load_config, sampler_options
from core.errors import (
    ConflictingFlags,
    MJPError,
    MissingRequired,
    UnknownFlag,
    UsageError,
)
from core.generator import (
    BUILTIN_NAMES,
    builtin_generator,
    from_offdiagonal,
    load_generator_file,
    stationary_time,
)
from core.path import simulate_forward
from core.rng import DEFAULT_SEED, make_rng, substream
from core.runner import ExperimentRunner
from stages.bench.records import EXPERIMENTS, ExperimentConfig
from stages.bridges.dispatch import sample_bridge
from stages.bridges.problem import METHODS, BridgeProblem
from stages.bridges.time_reverse import TIR_MODE_ALIASES, TIR_MODES
from stages.inference.gibbs import gibbs_estimate
from stages.inference.mcem import mcem_estimate
from stages.inference.observations import observations_from_csv, simulate_observations
from stages.inference.prior import GammaPrior
from stages.inference.summary import summarize_trace
from utils.logger import save_metrics_json, setup_logger
from utils.paths import OutputPaths


SUBCOMMANDS = ("bridge", "simulate", "estimate", "bench", "stationary")
TIR_MODE_CHOICES = TIR_MODES + tuple(TIR_MODE_ALIASES)
FLOAT_FORMAT = "%.12g"


@dataclass
class Invocation:
    subcommand: str
    flags: dict = field(default_factory=dict)
    config_path: str = None


# =====================================================
# PARSING
# =====================================================
class _Parser(configargparse.ArgumentParser):

    def error(self, message):
        if "unrecognized arguments" in message:
            raise UnknownFlag(f"{self.prog}: {message}")
        if "required" in message:
            raise MissingRequired(f"{self.prog}: {message}")
        if "not allowed with" in message:
            raise ConflictingFlags(f"{self.prog}: {message}")
        raise UsageError(f"{self.prog}: {message}")


def parse_range(text: str, cast=float):
    """'a:b' (inclusive, unit step), 'x,y,z' or a single value."""
    text = str(text).strip()

    try:
        if ":" in text:
            lo, hi = (cast(v) for v in text.split(":", 1))
            if hi < lo:
                raise ValueError
            return tuple(cast(v) for v in np.arange(lo, hi + 0.5))

        return tuple(cast(v) for v in text.split(",") if v.strip())

    except ValueError:
        raise UsageError(f"invalid range '{text}'") from None


def _add_common(p):
    p.add_argument("--config", is_config_file=True, help="key = value config file")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default {DEFAULT_SEED})")
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p.add_argument("--max-attempts", type=int, default=None)


def _add_generator(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--generator", choices=BUILTIN_NAMES, help="builtin generator")
    g.add_argument("--generator-file", help="generator file (n, then n rows)")
    p.add_argument("--n", type=int, default=None, help="states of the uniform family")


def _build_parser(subcommand):
    p = _Parser(prog=f"main.py {subcommand}")
    _add_common(p)

    if subcommand == "bridge":
        _add_generator(p)
        p.add_argument("--a", type=int, required=True)
        p.add_argument("--b", type=int, required=True)
        p.add_argument("--T", type=float, required=True)
        p.add_argument("--method", choices=METHODS, default="tir")
        p.add_argument("--tir-mode", choices=TIR_MODE_CHOICES, default=None)

    elif subcommand == "simulate":
        _add_generator(p)
        p.add_argument("--a", type=int, default=None, help="initial state (default uniform)")
        p.add_argument("--T", type=float, required=True)
        p.add_argument("--observe", type=float, default=None, help="observation spacing")

    elif subcommand == "estimate":
        _add_generator(p, required=False)
        p.add_argument("--algo", choices=["mcem", "gibbs"], required=True)
        p.add_argument("--obs", required=True)
        p.add_argument("--iters", type=int, default=None)
        p.add_argument("--bridges", type=int, default=None)
        p.add_argument("--burn-in", type=int, default=None)
        p.add_argument("--init", type=float, default=None)
        p.add_argument("--prior-a", type=float, default=None)
        p.add_argument("--prior-b", type=float, default=None)
        p.add_argument("--method", choices=METHODS, default=None)
        p.add_argument("--tir-mode", choices=TIR_MODE_CHOICES, default=None)
        p.add_argument("--progress", action="store_true")

    elif subcommand == "bench":
        p.add_argument("--experiment", choices=EXPERIMENTS, required=True)
        g = p.add_mutually_exclusive_group()
        g.add_argument("--model", choices=BUILTIN_NAMES, default=None)
        g.add_argument("--generator-file", default=None)
        p.add_argument("--n", default="3", help="n values: 3:20 or 3,5,8")
        p.add_argument("--T", default=None, help="T values: 1:6 or 0.5,1")
        p.add_argument("--m", type=int, default=None)
        p.add_argument("--replicates", type=int, default=None)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--methods", default=None, help="comma list of methods")
        p.add_argument("--n-jobs", type=int, default=None)
        p.add_argument("--tir-mode", choices=TIR_MODE_CHOICES, default=None)
        p.add_argument("--plot-script", action="store_true")
        p.add_argument("--resume", action="store_true", help="reuse a completed run with the same --out")

    elif subcommand == "stationary":
        _add_generator(p)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--norm", choices=["max", "one"], default=None)

    return p


def parse_invocation(argv) -> Invocation:
    argv = list(argv)

    if not argv:
        raise MissingRequired(f"main.py: a subcommand is required ({', '.join(SUBCOMMANDS)})")

    subcommand = argv[0]
    if subcommand not in SUBCOMMANDS:
        raise UnknownFlag(f"main.py: unknown subcommand '{subcommand}'")

    ns = _build_parser(subcommand).parse_args(argv[1:])
    flags = vars(ns)
    config_path = flags.pop("config", None)

    flags["seed_defaulted"] = flags["seed"] is None
    if flags["seed"] is None:
        flags["seed"] = DEFAULT_SEED

    if subcommand == "bench":
        flags["n"] = parse_range(flags["n"], int)
        flags["T"] = parse_range(flags["T"]) if flags["T"] else ()

        if flags["methods"]:
            flags["methods"] = tuple(m.strip() for m in flags["methods"].split(","))
            unknown = [m for m in flags["methods"] if m not in METHODS]
            if unknown:
                raise UsageError(f"main.py bench: unknown methods {unknown}")

        if flags["experiment"] == "speed" and not flags["T"]:
            raise MissingRequired("main.py bench: --T is required for the speed experiment")

        if flags["plot_script"] and not flags["out"]:
            raise MissingRequired("main.py bench: --plot-script needs --out")

    return Invocation(subcommand, flags, config_path)


# =====================================================
# CONFIG BUILDER
# =====================================================
def _set(section, key, value):
    if value is not None:
        section[key] = value


def build_user_config(inv: Invocation) -> dict:
    f = inv.flags
    cfg = {"seed": f["seed"], "samplers": {}, "stationary": {}, "inference": {}, "bench": {}, "logging": {}}

    _set(cfg["samplers"], "max_attempts", f.get("max_attempts"))
    _set(cfg["samplers"], "tir_mode", f.get("tir_mode"))
    _set(cfg["logging"], "level", f.get("log_level"))

    _set(cfg["stationary"], "eps", f.get("eps"))
    _set(cfg["stationary"], "norm", f.get("norm"))

    for key in ("iters", "bridges", "burn_in", "init", "prior_a", "prior_b"):
        _set(cfg["inference"], key, f.get(key))
    if inv.subcommand == "estimate":
        _set(cfg["inference"], "method", f.get("method"))
        cfg["inference"]["progress"] = bool(f.get("progress"))

    _set(cfg["bench"], "m", f.get("m"))
    _set(cfg["bench"], "replicates", f.get("replicates"))
    _set(cfg["bench"], "n_jobs", f.get("n_jobs"))
    if f.get("resume"):
        cfg["bench"]["resume"] = True
    if inv.subcommand == "bench":
        _set(cfg["bench"], "methods", list(f["methods"]) if f.get("methods") else None)

    return cfg


def _load_generator(flags):
    if flags.get("generator_file"):
        return load_generator_file(flags["generator_file"])
    return builtin_generator(flags["generator"], flags.get("n"))


def _state(value, n, name):
    if value is None:
        return None
    if not 1 <= value <= n:
        raise UsageError(f"--{name} must be in 1..{n}, got {value}")
    return value - 1


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _path_csv(path) -> str:
    df = pd.DataFrame(path.to_rows(), columns=["time", "state"])
    df["state"] += 1
    return df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


# =====================================================
# SUBCOMMANDS
# =====================================================
def _run_bridge(inv, config, logger):
    f = inv.flags
    g = _load_generator(f)

    prob = BridgeProblem(
        _state(f["a"], g.n, "a"), _state(f["b"], g.n, "b"), f["T"],
        f["method"], int(config["samplers"]["max_attempts"]),
    )
    sample = sample_bridge(g, prob, make_rng(config["seed"]), **sampler_options(config, prob.method))

    logger.info(f"bridge: {prob.method} jumps={sample.path.n_jumps} attempts={sample.attempts}")
    _emit(_path_csv(sample.path), f["out"])


def _run_simulate(inv, config, logger):
    f = inv.flags
    g = _load_generator(f)
    rng = make_rng(config["seed"])
    initial = _state(f["a"], g.n, "a")

    if f["observe"] is not None:
        obs = simulate_observations(g, f["T"], f["observe"], rng, initial)
        logger.info(f"simulate: {obs.m + 1} observations every {f['observe']:g}")
        _emit(obs.to_csv(), f["out"])
        return

    if initial is None:
        initial = int(rng.integers(g.n))

    path = simulate_forward(g, initial, f["T"], rng)
    logger.info(f"simulate: {path.n_jumps} jumps on [0, {f['T']:g}]")
    _emit(_path_csv(path), f["out"])


def _run_estimate(inv, config, logger):
    f = inv.flags
    inf = config["inference"]

    obs = observations_from_csv(f["obs"])
    if f.get("generator") or f.get("generator_file"):
        n = _load_generator(f).n
    else:
        n = f.get("n") or obs.n_states

    options = sampler_options(config, inf["method"])
    max_attempts = int(config["samplers"]["max_attempts"])
    rng = substream(config["seed"], "estimate", f["algo"])

    if f["algo"] == "mcem":
        init = from_offdiagonal(np.full((n, n), float(inf["init"])))
        trace = mcem_estimate(
            init, obs, inf["iters"], inf["bridges"], inf["method"], rng,
            clamp=inf["clamp"], max_attempts=max_attempts, options=options,
            progress=inf["progress"],
        )
    else:
        prior = GammaPrior.constant(n, inf["prior_a"], inf["prior_b"])
        trace = gibbs_estimate(
            prior.sample(rng), obs, prior, inf["iters"], inf["burn_in"], inf["method"], rng,
            max_attempts=max_attempts, options=options, progress=inf["progress"],
        )

    tail = min(inf["tail"], len(trace) - trace.burn_in)
    summary = summarize_trace(trace, tail)
    logger.info(f"estimate: {f['algo']} summary over last {tail} iterates\n"
                + summary.to_string(index=False, float_format=lambda v: f"{v:.4f}"))

    _emit(trace.to_csv(), f["out"])
    return {"algo": f["algo"], "iterations": len(trace), "final_loglik": trace.meta["loglik"][-1]}


def _run_stationary(inv, config, logger):
    f = inv.flags
    st = config["stationary"]
    g = _load_generator(f)

    rho = stationary_time(g, st["eps"], st["norm"], st["cap"])
    logger.info(f"stationary: rho={rho:.2f} at eps={st['eps']:g} ({st['norm']} norm)")

    rows = [("stationary_time", "", rho)]
    rows += [("pi", str(k + 1), float(v)) for k, v in enumerate(g.stationary)]

    df = pd.DataFrame(rows, columns=["quantity", "state", "value"])
    _emit(df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"), f["out"])
    return {"stationary_time": rho}


def _run_bench(inv, config, logger):
    f = inv.flags
    b = config["bench"]

    cfg = ExperimentConfig(
        experiment=f["experiment"],
        generator=f["model"] or "uniform",
        generator_file=f["generator_file"],
        n_values=f["n"],
        T_values=f["T"],
        methods=tuple(b["methods"]),
        m=b["m"],
        replicates=b["replicates"],
        seed=config["seed"],
        eps=config["stationary"]["eps"],
        out=f["out"],
    )

    runner = ExperimentRunner(config, cfg.out)
    runner.run(cfg)

    if f["plot_script"]:
        shutil.copy2(Path(__file__).resolve().parent / "vis.py", runner.paths.plot_script)
        logger.info(f"bench: plot script → {runner.paths.plot_script}")


HANDLERS = {
    "bridge": _run_bridge,
    "simulate": _run_simulate,
    "estimate": _run_estimate,
    "bench": _run_bench,
    "stationary": _run_stationary,
}


def run(inv: Invocation) -> int:
    config = load_config(build_user_config(inv))
    paths = OutputPaths(inv.flags["out"]) if inv.subcommand != "bench" else OutputPaths()

    logger = setup_logger(paths.log_file, config["logging"]["level"])

    if inv.flags["seed_defaulted"]:
        logger.warning(f"no --seed given; using the default seed {DEFAULT_SEED}")

    stats = HANDLERS[inv.subcommand](inv, config, logger)

    if paths.metrics_file is not None:
        save_metrics_json(paths.metrics_file, stats or {}, config, logger)

    return 0


# =====================================================
# MAIN ENTRY
# =====================================================
def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv

    try:
        inv = parse_invocation(argv)
    except UsageError as e:
        print(str(e).splitlines()[0], file=sys.stderr)
        return e.exit_code

    try:
        return run(inv)

    except UsageError as e:
        print(str(e).splitlines()[0], file=sys.stderr)
        return e.exit_code

    except MJPError as e:
        print(f"{type(e).__name__}: {e}".splitlines()[0], file=sys.stderr)
        return e.exit_code

    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}".splitlines()[0], file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
