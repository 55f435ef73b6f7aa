"""
Uniformization sampling (UNI).

With mu = max_i lambda_i the process is a discrete chain with transition
matrix Gamma = I + Lambda / mu, subordinated to a Poisson(mu) clock. The
bridge draws the total jump count m (virtual jumps included), places m
sorted uniform times, samples the discrete bridge of Gamma and drops the
self-transitions.
"""
import numpy as np
from scipy.stats import poisson

from core.errors import SeriesTruncation
from core.generator import Generator, transition_matrix
from core.path import Path
from stages.bridges.problem import BridgeProblem, BridgeSample


DEFAULT_MASS_TOL = 1e-10


def uniformization_matrix(g: Generator) -> np.ndarray:
    gamma = np.eye(g.n) + g.rates / g.mu
    np.fill_diagonal(gamma, np.clip(np.diag(gamma), 0.0, None))
    return gamma


def jump_count_cap(mu_t: float) -> int:
    return int(np.ceil(mu_t + 20.0 * np.sqrt(mu_t) + 50))


def _backward_vectors(gamma, b, m_max):
    """w[r] = Gamma^r[:, b] for r = 0..m_max."""
    w = np.empty((m_max + 1, gamma.shape[0]))
    w[0] = 0.0
    w[0, b] = 1.0

    for r in range(1, m_max + 1):
        w[r] = gamma @ w[r - 1]

    return w


def jump_count_distribution(g: Generator, a: int, b: int, T: float,
                            mass_tol: float = DEFAULT_MASS_TOL):
    """
    P(m | X_0 = a, X_T = b) for m = 0..cap plus the backward vectors.
    Raises SeriesTruncation when the cap leaves more than mass_tol behind.
    """
    gamma = uniformization_matrix(g)
    mu_t = g.mu * T
    m_max = jump_count_cap(mu_t)

    w = _backward_vectors(gamma, b, m_max)
    p_ab = transition_matrix(g, T).probs[a, b]

    log_pois = poisson.logpmf(np.arange(m_max + 1), mu_t)
    probs = np.exp(log_pois) * w[:, a] / p_ab

    mass = probs.sum()
    if mass < 1.0 - mass_tol:
        raise SeriesTruncation(
            f"uni: mixture mass {mass:.12g} at cap m={m_max} (mu*T={mu_t:g})"
        )

    return probs / mass, w, gamma


def sample_uniformization(g: Generator, prob: BridgeProblem, rng,
                          mass_tol: float = DEFAULT_MASS_TOL) -> BridgeSample:
    prob.check(g)
    a, b, T = prob.a, prob.b, prob.T

    probs, w, gamma = jump_count_distribution(g, a, b, T, mass_tol)

    cdf = np.cumsum(probs)
    m = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    m = min(m, len(probs) - 1)

    grid = np.sort(rng.uniform(0.0, T, size=m))

    times, states = [], []
    state = a

    for k in range(1, m + 1):
        weights = gamma[state] * w[m - k]
        cum = np.cumsum(weights)
        nxt = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        nxt = min(nxt, g.n - 1)

        # virtual jump
        if nxt == state:
            continue

        times.append(grid[k - 1])
        states.append(nxt)
        state = nxt

    path = Path(a, np.array(times), np.array(states, dtype=np.int64), T)
    return BridgeSample(path, 1, "uni")
