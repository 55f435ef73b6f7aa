"""
Statistical checks of sampled bridges against exact laws.

The bridge law at an interior time t is p_ak(t) p_kb(T - t) / p_ab(T);
goodness of fit uses Pearson's chi-square with sparse bins pooled.
"""
import numpy as np
from scipy.stats import chi2_contingency, chisquare

from core.errors import UnreachableEndpoint
from core.generator import Generator, transition_matrix


MIN_EXPECTED = 5.0


def bridge_state_law(g: Generator, a: int, b: int, T: float, t: float) -> np.ndarray:
    if not 0 < t < T:
        raise ValueError(f"bridge_state_law: t={t} must lie in (0, {T})")

    p_ab = transition_matrix(g, T).probs[a, b]
    if p_ab <= 0:
        raise UnreachableEndpoint(a, b, T)

    left = transition_matrix(g, t).probs[a, :]
    right = transition_matrix(g, T - t).probs[:, b]

    law = left * right / p_ab
    return law / law.sum()


def state_counts(paths, t: float, n: int) -> np.ndarray:
    states = np.array([int(p.state_at(t)) for p in paths], dtype=np.int64)
    return np.bincount(states, minlength=n)


def _pool(observed, expected):
    """Merge bins with small expected counts into their neighbour (largest-last order)."""
    order = np.argsort(expected)
    obs, exp = list(observed[order]), list(expected[order])

    while len(exp) > 1 and exp[0] < MIN_EXPECTED:
        exp[1] += exp.pop(0)
        obs[1] += obs.pop(0)

    return np.array(obs, dtype=float), np.array(exp, dtype=float)


def goodness_of_fit(counts, law):
    """(chi2, p-value) of observed counts against a probability vector."""
    counts = np.asarray(counts, dtype=float)
    law = np.asarray(law, dtype=float)

    if np.any(counts[law <= 0] > 0):
        return float("inf"), 0.0

    expected = law * counts.sum()
    obs, exp = _pool(counts, expected)

    if len(obs) < 2:
        return 0.0, 1.0

    stat, pvalue = chisquare(obs, exp * obs.sum() / exp.sum())
    return float(stat), float(pvalue)


def bridge_law_pvalue(paths, g: Generator, a: int, b: int, T: float, t: float = None) -> float:
    t = 0.5 * T if t is None else t
    counts = state_counts(paths, t, g.n)
    return goodness_of_fit(counts, bridge_state_law(g, a, b, T, t))[1]


def two_sample_pvalue(counts1, counts2) -> float:
    """Chi-square test of homogeneity of two count vectors over the same states."""
    table = np.vstack([counts1, counts2]).astype(float)
    table = table[:, table.sum(axis=0) > 0]

    if table.shape[1] < 2:
        return 1.0

    _, pvalue, _, _ = chi2_contingency(table, correction=False)
    return float(pvalue)


def within_sigma(samples, expected, k: float = 3.0) -> bool:
    """Every component of the sample mean lies within k standard errors of `expected`."""
    samples = np.asarray(samples, dtype=float)
    m = len(samples)

    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(m)

    # zero-variance components must match exactly up to rounding
    tol = np.where(se > 0, k * se, 1e-12)
    return bool(np.all(np.abs(mean - np.asarray(expected)) <= tol))
