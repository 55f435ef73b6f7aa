from copy import deepcopy

from stages.bridges.problem import METHODS
from stages.bridges.time_reverse import TIR_MODE_ALIASES, TIR_MODES


# =====================================================
# DEFAULT CONFIG
# =====================================================

DEFAULT_CONFIG = {

    "seed": 42,

    "stationary": {
        "eps": 0.005,
        "norm": "max",          # max | one
        "cap": 1e4
    },

    "samplers": {
        "max_attempts": 1_000_000,
        "tir_mode": "reversed",  # reversed | paper (alias forward)

        "direct": {
            "cond_cap": 1e8,
            "root_tol": 1e-10
        },
        "uniformization": {
            "mass_tol": 1e-10
        },
        "bisection": {
            "max_depth": 60
        },
        "modified_rejection": {
            "max_forced_jumps": 10_000
        }
    },

    "inference": {
        "method": "uni",
        "iters": 150,
        "burn_in": 0,
        "bridges": 100,
        "init": 0.5,
        "prior_a": 1.0,
        "prior_b": 1.0,
        "tail": 100,
        "clamp": 1e-12,
        "progress": False
    },

    "bench": {
        "m": 1000,
        "replicates": 3,
        "endpoint_draws": 5,
        "warmup": 20,
        "n_jobs": 1,
        "resume": False,
        "methods": ["rej", "mor", "dir", "uni", "bis", "tir"]
    },

    "study": {
        "generator": "study4",
        "T": 10.0,
        "delta": 0.1,
        "mcem_iters": 150,
        "mcem_tail": 100,
        "gibbs_iters": 500,
        "gibbs_burn_in": 300
    },

    "logging": {
        "level": "INFO"
    }
}


# =====================================================
# LOAD CONFIG
# =====================================================

def load_config(user_config=None):
    config = deepcopy(DEFAULT_CONFIG)

    if user_config:
        _deep_update(config, user_config)

    _validate_samplers(config)
    _validate_stationary(config)
    _validate_inference(config)
    _validate_bench(config)
    _validate_study(config)

    return config


# =====================================================
# VALIDATION
# =====================================================

def _validate_samplers(config):
    s = config["samplers"]

    s["tir_mode"] = TIR_MODE_ALIASES.get(s["tir_mode"], s["tir_mode"])
    if s["tir_mode"] not in TIR_MODES:
        raise ValueError(f"[CONFIG] Invalid tir_mode: {s['tir_mode']}")

    if int(s["max_attempts"]) < 1:
        raise ValueError(f"[CONFIG] max_attempts must be >= 1: {s['max_attempts']}")

    if s["bisection"]["max_depth"] < 1:
        raise ValueError("[CONFIG] bisection.max_depth must be >= 1")


def _validate_stationary(config):
    st = config["stationary"]

    if st["eps"] <= 0:
        raise ValueError(f"[CONFIG] stationary.eps must be positive: {st['eps']}")

    if st["norm"] not in ("max", "one"):
        raise ValueError(f"[CONFIG] Invalid stationary.norm: {st['norm']}")


def _validate_inference(config):
    inf = config["inference"]

    if inf["method"] not in METHODS:
        raise ValueError(f"[CONFIG] Invalid inference.method: {inf['method']}")

    if inf["iters"] < 1 or inf["bridges"] < 1:
        raise ValueError("[CONFIG] inference.iters and inference.bridges must be >= 1")

    if not 0 <= inf["burn_in"] < inf["iters"]:
        raise ValueError(
            f"[CONFIG] inference.burn_in must be in [0, iters): {inf['burn_in']}"
        )

    if inf["prior_a"] <= 0 or inf["prior_b"] <= 0:
        raise ValueError("[CONFIG] prior hyperparameters must be positive")


def _validate_bench(config):
    b = config["bench"]

    if b["m"] < 1:
        raise ValueError(f"[CONFIG] bench.m must be >= 1: {b['m']}")

    for m in b["methods"]:
        if m not in METHODS:
            raise ValueError(f"[CONFIG] Invalid method: {m}")

    if b["replicates"] < 1 or b["endpoint_draws"] < 1:
        raise ValueError("[CONFIG] bench.replicates and bench.endpoint_draws must be >= 1")


def _validate_study(config):
    st = config["study"]

    if not 0 < st["delta"] <= st["T"]:
        raise ValueError(f"[CONFIG] study.delta must be in (0, T]: {st['delta']}")

    if not 0 <= st["gibbs_burn_in"] < st["gibbs_iters"]:
        raise ValueError("[CONFIG] study.gibbs_burn_in must be below study.gibbs_iters")

    if not 1 <= st["mcem_tail"] <= st["mcem_iters"]:
        raise ValueError("[CONFIG] study.mcem_tail must be in [1, mcem_iters]")


# =====================================================
# SAMPLER OPTIONS
# =====================================================

def sampler_options(config, method):
    """
    Keyword arguments one sampler accepts, taken from the samplers section.
    The attempt budget travels on the BridgeProblem, not here.
    """
    s = config["samplers"]

    if method == "rej":
        return {}

    if method == "tir":
        return {"mode": s["tir_mode"]}

    if method == "mor":
        return {"max_forced_jumps": int(s["modified_rejection"]["max_forced_jumps"])}

    if method == "dir":
        return dict(s["direct"])

    if method == "uni":
        return dict(s["uniformization"])

    if method == "bis":
        return dict(s["bisection"])

    raise ValueError(f"[CONFIG] Invalid method: {method}")


# =====================================================
# UTIL
# =====================================================

def _deep_update(base, updates):
    for k, v in updates.items():
        if isinstance(v, dict) and k in base:
            _deep_update(base[k], v)
        else:
            base[k] = v
