"""
Endpoint-conditioned expectations of the sufficient statistics.

    E[N_ij | X_0 = x, X_t = y] = lambda_ij I_xy^ij(t) / p_xy(t)
    E[R_i  | X_0 = x, X_t = y] = I_xy^ii(t) / p_xy(t)

with I_xy^ij(t) = int_0^t p_xi(s) p_jy(t - s) ds, read off the upper-right
block of exp([[Lambda, E_ij], [0, Lambda]] t).
"""
import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from core.errors import UnreachableEndpoint
from core.generator import Generator, transition_matrix


UNREACHABLE_TOL = 1e-300
QUAD_TOL = 1e-10


def _block_integral(g: Generator, t: float, i: int, j: int) -> np.ndarray:
    """Matrix of I_xy^ij(t) over all (x, y) for fixed (i, j)."""
    n = g.n

    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = g.rates
    A[n:, n:] = g.rates
    A[i, n + j] = 1.0

    return expm(A * t)[:n, n:]


def integral_I(g: Generator, t: float, x: int, y: int, i: int, j: int) -> float:
    if t < 0:
        raise ValueError(f"integral_I: negative time {t}")
    if t == 0:
        return 0.0

    return float(_block_integral(g, t, i, j)[x, y])


def integral_I_quadrature(g: Generator, t: float, x: int, y: int, i: int, j: int,
                          tol: float = QUAD_TOL) -> float:
    """Adaptive quadrature of the same integral; independent check of integral_I."""
    if t <= 0:
        return 0.0

    def integrand(s):
        left = transition_matrix(g, s).probs[x, i]
        right = transition_matrix(g, t - s).probs[j, y]
        return left * right

    value, _ = quad(integrand, 0.0, t, epsabs=tol, epsrel=tol, limit=200)
    return float(value)


def expected_stats_conditional(g: Generator, x: int, y: int, t: float):
    """(E_N, E_R) given X_0 = x and X_t = y."""
    p_xy = transition_matrix(g, t).probs[x, y]
    if p_xy <= UNREACHABLE_TOL:
        raise UnreachableEndpoint(x, y, t)

    n = g.n
    E_N = np.zeros((n, n))
    E_R = np.zeros(n)

    for i in range(n):
        E_R[i] = _block_integral(g, t, i, i)[x, y] / p_xy

        for j in range(n):
            if i != j and g.rates[i, j] > 0:
                E_N[i, j] = g.rates[i, j] * _block_integral(g, t, i, j)[x, y] / p_xy

    return E_N, E_R


def expected_stats_uniform_closed_form(n: int, t: float, x: int, y: int):
    """
    Closed form for the uniform family (diagonal -1, off-diagonal 1/(n-1)),
    where p_ij(s) = 1/n + (delta_ij - 1/n) e^{-beta s} with beta = n/(n-1).
    """
    if n < 3:
        raise ValueError(f"uniform closed form: n must be >= 3, got {n}")
    if t <= 0:
        raise ValueError(f"uniform closed form: t must be positive, got {t}")

    beta = n / (n - 1)
    decay = np.exp(-beta * t)
    ramp = -np.expm1(-beta * t) / beta

    A = np.eye(n)[x] - 1.0 / n
    B = np.eye(n)[:, y] - 1.0 / n

    I = (
        t / n**2
        + (A[:, None] + B[None, :]) * ramp / n
        + np.outer(A, B) * t * decay
    )

    p_xy = 1.0 / n + (float(x == y) - 1.0 / n) * decay

    E_N = I / (n - 1) / p_xy
    np.fill_diagonal(E_N, 0.0)
    E_R = np.diag(I) / p_xy

    return E_N, E_R
