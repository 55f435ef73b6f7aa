"""
Direct sampling (DIR) from the spectral decomposition Lambda = U D U^-1.

In state i with r time left, the first jump time s has unnormalized CDF

    G(s) = Re sum_k c_k e^{d_k r} (1 - e^{-(lambda_i + d_k) s}) / (lambda_i + d_k)

with c_k = sum_{j != i} lambda_ij U_jk (U^-1)_kb, plus an atom e^{-lambda_i r}
for "no further jump" when i == b. The time is drawn by inverting G with a
bracketing root finder, the next state with weight lambda_ij p_jb(r - s).
"""
import numpy as np
from scipy.optimize import brentq

from core.errors import NotDiagonalizable, RootFindFailure
from core.generator import Generator
from core.path import Path
from core.rng import open_uniform
from stages.bridges.problem import BridgeProblem, BridgeSample


DEFAULT_COND_CAP = 1e8
DEFAULT_ROOT_TOL = 1e-10
SMALL_RATE = 1e-12


def _spectral(g: Generator, cond_cap: float):
    d, U, Uinv, cond = g.spectral

    if Uinv is None or not np.isfinite(cond) or cond > cond_cap:
        raise NotDiagonalizable(
            f"dir: eigenvector matrix condition number {cond:.3g} exceeds {cond_cap:g}"
        )

    return d, U, Uinv


def _column_at(d, U, Uinv, b, t):
    """p_jb(t) for every j from the spectral form."""
    col = (U @ (np.exp(d * t) * Uinv[:, b])).real
    return np.clip(col, 0.0, None)


def _holding_cdf(g: Generator, d, U, Uinv, i, b, r):
    """Unnormalized jump-time CDF G on [0, r] for current state i."""
    rates = g.rates[i].copy()
    rates[i] = 0.0

    c = (rates @ U) * Uinv[:, b]
    coef = c * np.exp(d * r)
    z = g.exit_rates[i] + d
    small = np.abs(z) < SMALL_RATE
    z_safe = np.where(small, 1.0, z)

    def G(s):
        phi = np.where(small, s, -np.expm1(-z_safe * s) / z_safe)
        return float(np.sum(coef * phi).real)

    return G


def _draw_holding_time(G, r, atom, rng, root_tol):
    """None for the no-jump atom, otherwise a jump time in (0, r)."""
    jump_mass = G(r)
    total = atom + jump_mass

    if not total > 0:
        raise RootFindFailure(f"dir: bridge mass {total:.3g} is not positive")

    u = open_uniform(rng) * total
    if u < atom:
        return None

    target = min(max(u - atom, 0.0), jump_mass)

    try:
        return brentq(lambda s: G(s) - target, 0.0, r, xtol=root_tol)
    except ValueError as exc:
        raise RootFindFailure(f"dir: no bracket for target {target:.3g} on [0, {r:g}]") from exc


def sample_direct(g: Generator, prob: BridgeProblem, rng,
                  cond_cap: float = DEFAULT_COND_CAP,
                  root_tol: float = DEFAULT_ROOT_TOL) -> BridgeSample:
    prob.check(g)
    d, U, Uinv = _spectral(g, cond_cap)

    b, T = prob.b, prob.T
    times, states = [], []
    t, state = 0.0, prob.a

    while True:
        r = T - t
        atom = np.exp(-g.exit_rates[state] * r) if state == b else 0.0
        G = _holding_cdf(g, d, U, Uinv, state, b, r)

        s = _draw_holding_time(G, r, atom, rng, root_tol)
        if s is None:
            break

        # keep the jump strictly inside (t, T)
        t_new = min(max(t + s, np.nextafter(t, np.inf)), np.nextafter(T, -np.inf))

        weights = g.rates[state] * _column_at(d, U, Uinv, b, T - t_new)
        weights[state] = 0.0
        w_sum = weights.sum()
        if not w_sum > 0:
            raise RootFindFailure(f"dir: no reachable successor of state {state + 1}")

        cdf = np.cumsum(weights)
        nxt = int(np.searchsorted(cdf, rng.random() * w_sum, side="right"))
        nxt = min(nxt, g.n - 1)

        times.append(t_new)
        states.append(nxt)
        t, state = t_new, nxt

    path = Path(prob.a, np.array(times), np.array(states, dtype=np.int64), T)
    return BridgeSample(path, 1, "dir")
