"""
Rejection sampling (REJ): simulate forward from a, keep the first path
that ends in b. Acceptance probability per attempt is p_ab(T).
"""
from core.errors import AttemptsExhausted
from core.generator import Generator, transition_matrix
from core.path import simulate_forward
from stages.bridges.problem import BridgeProblem, BridgeSample


def sample_rejection(g: Generator, prob: BridgeProblem, rng) -> BridgeSample:
    prob.check(g)

    for attempt in range(1, prob.max_attempts + 1):
        path = simulate_forward(g, prob.a, prob.T, rng)

        if path.end_state == prob.b:
            return BridgeSample(path, attempt, "rej")

    p_ab = transition_matrix(g, prob.T).probs[prob.a, prob.b]
    raise AttemptsExhausted("rej", prob.max_attempts, acceptance=p_ab)
