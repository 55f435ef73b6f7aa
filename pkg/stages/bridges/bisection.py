"""
Bisection sampling (BIS).

A segment (i, j, t) is classified by its jump count: none (only if i == j),
exactly one, or at least two. The first two are sampled in closed form;
the third picks the midpoint state and recurses on both halves, with the
half types drawn jointly so that the total stays at least two.
"""
import numpy as np

from core.errors import RecursionDepthExceeded
from core.generator import Generator, transition_matrix
from core.path import Path
from core.rng import open_uniform
from stages.bridges.problem import BridgeProblem, BridgeSample


DEFAULT_MAX_DEPTH = 60
SERIES_THRESHOLD = 1e-8

# (left, right) half types whose jump counts add up to at least two
_PAIRS = ((0, 2), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2))


def single_jump_time(lambda_i: float, lambda_j: float, T: float, u: float) -> float:
    """Jump time of an i -> j segment with exactly one jump; density ~ e^{-(lambda_i - lambda_j) s}."""
    if T <= 0:
        raise ValueError(f"single_jump_time: horizon must be positive, got {T}")
    if not 0.0 < u < 1.0:
        raise ValueError(f"single_jump_time: u must be in (0, 1), got {u}")

    d = lambda_i - lambda_j
    if abs(d) < 1e-12:
        return u * T

    return float(-np.log1p(u * np.expm1(-d * T)) / d)


def holding_integral(lambda_i: float, lambda_j: float, t: float) -> float:
    """int_0^t e^{-lambda_i s} e^{-lambda_j (t - s)} ds."""
    d = lambda_i - lambda_j
    x = d * t

    if abs(d) < SERIES_THRESHOLD:
        return t * np.exp(-lambda_j * t) * (1.0 - x / 2.0 + x * x / 6.0)

    return float(np.exp(-lambda_j * t) * -np.expm1(-x) / d)


def _draw(weights, rng) -> int:
    cum = np.cumsum(weights)
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(idx, len(weights) - 1)


class _BisectionSampler:

    def __init__(self, g: Generator, rng, max_depth: int):
        self.g = g
        self.rng = rng
        self.max_depth = max_depth
        self._P = {}

    def probs(self, t):
        if t not in self._P:
            self._P[t] = transition_matrix(self.g, t).probs
        return self._P[t]

    def masses(self, i, j, t):
        """Unnormalized (0 jumps, 1 jump, >= 2 jumps) masses of segment (i, j, t)."""
        lam = self.g.exit_rates
        p_ij = self.probs(t)[i, j]

        m0 = np.exp(-lam[i] * t) if i == j else 0.0
        m1 = self.g.rates[i, j] * holding_integral(lam[i], lam[j], t) if i != j else 0.0
        m2 = max(p_ij - m0 - m1, 0.0)

        return np.array([m0, m1, m2])

    def segment(self, i, j, t, kind, depth):
        """Jumps (offset, state) of segment (i, j, t) with the given count type."""
        if kind == 0:
            return []

        lam = self.g.exit_rates

        if kind == 1:
            return [(single_jump_time(lam[i], lam[j], t, open_uniform(self.rng)), j)]

        if depth >= self.max_depth:
            raise RecursionDepthExceeded(
                f"bis: recursion deeper than {self.max_depth} levels (segment length {t:.3g})"
            )

        h = 0.5 * t
        P = self.probs(h)

        # midpoint state with the 0- and 1-jump mass removed
        weights = P[i, :] * P[:, j]
        if i == j:
            weights[i] -= np.exp(-lam[i] * t)
        else:
            jump_mass = self.g.rates[i, j] * holding_integral(lam[i], lam[j], h)
            weights[i] -= jump_mass * np.exp(-lam[i] * h)
            weights[j] -= jump_mass * np.exp(-lam[j] * h)
        weights = np.clip(weights, 0.0, None)

        if not weights.sum() > 0:
            raise RecursionDepthExceeded(f"bis: midpoint mass underflow on segment length {t:.3g}")

        k = _draw(weights, self.rng)

        left = self.masses(i, k, h)
        right = self.masses(k, j, h)
        pair_weights = np.array([left[a] * right[b] for a, b in _PAIRS])

        if not pair_weights.sum() > 0:
            raise RecursionDepthExceeded(f"bis: half-segment mass underflow at depth {depth}")

        kind_l, kind_r = _PAIRS[_draw(pair_weights, self.rng)]

        jumps = self.segment(i, k, h, kind_l, depth + 1)
        jumps += [(h + s, x) for s, x in self.segment(k, j, h, kind_r, depth + 1)]

        return jumps

    def sample(self, a, b, T):
        kind = _draw(self.masses(a, b, T), self.rng)
        return self.segment(a, b, T, kind, 0)


def sample_bisection(g: Generator, prob: BridgeProblem, rng,
                     max_depth: int = DEFAULT_MAX_DEPTH) -> BridgeSample:
    prob.check(g)

    jumps = _BisectionSampler(g, rng, max_depth).sample(prob.a, prob.b, prob.T)

    times = np.array([s for s, _ in jumps], dtype=float)
    states = np.array([x for _, x in jumps], dtype=np.int64)

    path = Path(prob.a, times, states, prob.T)
    return BridgeSample(path, 1, "bis")
