"""
Modified rejection sampling (MOR).

For a != b the first jump is forced inside (0, T), then the path recurses:
at a state c != b another jump is forced, at c == b the remainder is a
plain forward simulation that must end in b. Forced jumps after the first
are kept with probability 1 - exp(-lambda_c * T_rem), which is what
removes the conditioning bias of re-forcing; a rejected proposal restarts
the whole cycle.
"""
import numpy as np

from core.errors import AttemptsExhausted
from core.generator import Generator, transition_matrix
from core.path import Path, simulate_forward
from core.rng import open_uniform
from stages.bridges.problem import BridgeProblem, BridgeSample
from stages.bridges.rejection import sample_rejection


def truncated_first_jump_time(lambda_a: float, T: float, u: float) -> float:
    """Inverse CDF of Exp(lambda_a) conditioned to fall before T."""
    if lambda_a <= 0 or T <= 0:
        raise ValueError("truncated_first_jump_time: rate and horizon must be positive")
    if not 0.0 < u < 1.0:
        raise ValueError(f"truncated_first_jump_time: u must be in (0, 1), got {u}")

    return float(-np.log1p(u * np.expm1(-lambda_a * T)) / lambda_a)


def _next_state(g: Generator, state: int, rng) -> int:
    row = g.jump_cdf[state]
    nxt = int(np.searchsorted(row, rng.random() * row[-1], side="right"))
    return min(nxt, g.n - 1)


def _propose(g: Generator, prob: BridgeProblem, rng, max_forced_jumps: int):
    exit_rates = g.exit_rates

    times, states = [], []
    t, state = 0.0, prob.a
    forced = 0

    while state != prob.b:
        remaining = prob.T - t
        lam = exit_rates[state]

        if forced >= max_forced_jumps:
            return None

        if forced and rng.random() >= -np.expm1(-lam * remaining):
            return None

        t += truncated_first_jump_time(lam, remaining, open_uniform(rng))
        if t >= prob.T:
            return None

        state = _next_state(g, state, rng)
        times.append(t)
        states.append(state)
        forced += 1

    tail = simulate_forward(g, prob.b, prob.T - t, rng)
    if tail.end_state != prob.b:
        return None

    return Path(
        prob.a,
        np.concatenate((times, t + tail.times)),
        np.concatenate((np.array(states, dtype=np.int64), tail.states)),
        prob.T,
    )


def sample_modified_rejection(g: Generator, prob: BridgeProblem, rng,
                              max_forced_jumps: int = 10_000) -> BridgeSample:
    prob.check(g)

    if prob.a == prob.b:
        sample = sample_rejection(g, prob, rng)
        return BridgeSample(sample.path, sample.attempts, "mor")

    for attempt in range(1, prob.max_attempts + 1):
        path = _propose(g, prob, rng, max_forced_jumps)

        if path is not None:
            return BridgeSample(path, attempt, "mor")

    lam = g.exit_rates[prob.a]
    p_ab = transition_matrix(g, prob.T).probs[prob.a, prob.b]
    raise AttemptsExhausted(
        "mor", prob.max_attempts, acceptance=p_ab / -np.expm1(-lam * prob.T)
    )
