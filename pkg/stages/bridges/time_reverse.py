"""
Time-reverse sampling (TIR).

One cycle: simulate X1 forward from a; accept it if it ends in b. Otherwise
simulate X2 from b and reverse it in time; accept the reversal if it starts
in a. Otherwise find the first time tau at which the two paths agree and
splice X1 on [0, tau] with the reversal on (tau, T]. Paths that never meet
restart the cycle.

mode "reversed" drives X2 with the time-reversed generator; mode "paper"
(alias "forward") drives it with the generator itself. Neither mode is an
exact bridge sampler: the splice approximates the bridge law, closely once
T is past the stationary time and visibly below it. "paper" mode adds a
second error for non-reversible generators. A warning is logged the first
time an n-state generator is bridged over a horizon shorter than its
stationary time.
"""
import numpy as np

from core.errors import AttemptsExhausted, MJPError
from core.generator import Generator, stationary_time, transition_matrix
from core.path import Path, reverse_path, simulate_forward
from stages.bridges.problem import BridgeProblem, BridgeSample
from utils.logger import get_logger


TIR_MODES = ("reversed", "paper")
TIR_MODE_ALIASES = {"forward": "paper"}

logger = get_logger("tir")

# warnings are keyed by (n, mode)
_CACHE_SIZE = 256
_STATIONARY_TIMES = {}
_WARNED = set()


def resolve_tir_mode(mode: str) -> str:
    mode = TIR_MODE_ALIASES.get(mode, mode)
    if mode not in TIR_MODES:
        raise ValueError(f"tir: unknown mode '{mode}'")
    return mode


def first_meeting_time(x1: Path, x2: Path):
    """
    First t in {0} U jump times with x1(t) == x2(t), right-continuous;
    None if the paths never agree on [0, T].
    """
    grid = np.union1d(x1.times, x2.times)
    grid = np.concatenate(([0.0], grid))

    hits = np.flatnonzero(x1.state_at(grid) == x2.state_at(grid))
    if not len(hits):
        return None

    return float(grid[hits[0]])


def splice(x1: Path, x2: Path, tau: float) -> Path:
    """x1 on [0, tau], x2 on (tau, T]; both must be in the same state at tau."""
    keep1 = x1.times <= tau
    keep2 = x2.times > tau

    return Path(
        x1.initial_state,
        np.concatenate((x1.times[keep1], x2.times[keep2])),
        np.concatenate((x1.states[keep1], x2.states[keep2])),
        x1.horizon,
    )


def _warn_short_horizon(g: Generator, T: float, mode: str):
    key = g.key
    if key not in _STATIONARY_TIMES:
        if len(_STATIONARY_TIMES) >= _CACHE_SIZE:
            _STATIONARY_TIMES.clear()
        try:
            _STATIONARY_TIMES[key] = stationary_time(g)
        except MJPError as e:
            logger.debug(f"tir: stationary time unavailable ({e})")
            _STATIONARY_TIMES[key] = None

    rho = _STATIONARY_TIMES[key]
    if rho is not None and T < rho and (g.n, mode) not in _WARNED:
        _WARNED.add((g.n, mode))
        logger.warning(
            f"tir: {mode} mode with T={T:g} below the stationary time {rho:g}; "
            "samples deviate from the bridge law, use uni or bis for exact bridges"
        )


def sample_time_reverse(g: Generator, prob: BridgeProblem, rng,
                        mode: str = "reversed") -> BridgeSample:
    prob.check(g)

    mode = resolve_tir_mode(mode)
    _warn_short_horizon(g, prob.T, mode)

    backward = g if mode == "paper" else g.reversed

    a, b, T = prob.a, prob.b, prob.T

    for attempt in range(1, prob.max_attempts + 1):
        # Step 1
        x1 = simulate_forward(g, a, T, rng)
        if x1.end_state == b:
            return BridgeSample(x1, attempt, "tir")

        # Step 2
        x2 = reverse_path(simulate_forward(backward, b, T, rng))
        if x2.initial_state == a:
            return BridgeSample(x2, attempt, "tir")

        # Step 3
        tau = first_meeting_time(x1, x2)
        if tau is not None:
            return BridgeSample(splice(x1, x2, tau), attempt, "tir")

    p_ab = transition_matrix(g, T).probs[a, b]
    raise AttemptsExhausted("tir", prob.max_attempts, acceptance=p_ab)
