"""
Infinitesimal generators of finite-state Markov jump processes.

A Generator is an immutable, validated rate matrix. Derived quantities
(exit rates, uniformization rate, stationary distribution, time reversal,
spectral decomposition) are computed on first use and cached on the
instance. States are 0-indexed here; files and the CLI use 1-indexing.
"""
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.linalg import expm
from scipy.sparse.csgraph import connected_components

from core.errors import (
    AbsorbingState,
    BadDimension,
    NegativeOffDiagonal,
    NotConverged,
    NumericOverflow,
    Reducible,
    RowSumNonzero,
    SingularSolve,
    UnknownName,
)


ROW_SUM_TOL = 1e-12
STATIONARY_RESIDUAL_TOL = 1e-10
OVERFLOW_LIMIT = 1e6

BUILTIN_NAMES = ("uniform", "model1", "model2", "study4")


# =====================================================
# TYPES
# =====================================================
@dataclass(frozen=True, eq=False)
class Generator:
    rates: np.ndarray

    @property
    def n(self) -> int:
        return self.rates.shape[0]

    @cached_property
    def exit_rates(self) -> np.ndarray:
        return -np.diag(self.rates).copy()

    @cached_property
    def mu(self) -> float:
        return float(self.exit_rates.max())

    @cached_property
    def key(self) -> bytes:
        return self.rates.tobytes()

    @cached_property
    def stationary(self) -> np.ndarray:
        return stationary_distribution(self).pi

    @cached_property
    def reversed(self) -> "Generator":
        rev = reversed_generator(self)
        rev.__dict__["reversed"] = self
        return rev

    @cached_property
    def jump_cdf(self) -> np.ndarray:
        """Row-wise cumulative jump probabilities of the embedded chain."""
        probs = self.rates / self.exit_rates[:, None]
        np.fill_diagonal(probs, 0.0)
        return np.cumsum(probs, axis=1)

    @cached_property
    def spectral(self):
        """(eigenvalues, U, U^-1, cond(U)) of the rate matrix."""
        d, U = np.linalg.eig(self.rates)
        cond = float(np.linalg.cond(U))
        if not np.isfinite(cond):
            return d, U, None, cond
        return d, U, np.linalg.inv(U), cond

    def offdiagonal(self):
        """(i, j) pairs with i != j in row-major order."""
        return [(i, j) for i in range(self.n) for j in range(self.n) if i != j]

    def to_text(self) -> str:
        lines = [str(self.n)]
        lines += [" ".join(f"{v:.17g}" for v in row) for row in self.rates]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TransitionMatrix:
    t: float
    probs: np.ndarray


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray


# =====================================================
# VALIDATION
# =====================================================
def validate_generator(raw) -> Generator:
    rates = np.array(raw, dtype=float)

    if rates.ndim != 2 or rates.shape[0] != rates.shape[1]:
        raise BadDimension(f"generator: expected a square matrix, got shape {rates.shape}")

    n = rates.shape[0]
    if n < 2:
        raise BadDimension(f"generator: need at least 2 states, got {n}")

    if not np.all(np.isfinite(rates)):
        raise ValueError("generator: non-finite entries")

    off = ~np.eye(n, dtype=bool)

    bad = np.argwhere((rates < 0) & off)
    if len(bad):
        i, j = bad[0]
        raise NegativeOffDiagonal(
            f"generator: negative rate lambda_{i + 1}{j + 1} = {rates[i, j]:g}"
        )

    scale = max(1.0, float(np.abs(rates).max()))
    row_sums = rates.sum(axis=1)
    worst = int(np.argmax(np.abs(row_sums)))
    if abs(row_sums[worst]) > ROW_SUM_TOL * scale:
        raise RowSumNonzero(
            f"generator: row {worst + 1} sums to {row_sums[worst]:.3g}"
        )

    exit_rates = -np.diag(rates)
    absorbing = np.flatnonzero(exit_rates <= 0)
    if len(absorbing):
        raise AbsorbingState(
            f"generator: state {absorbing[0] + 1} has zero exit rate"
        )

    n_components, _ = connected_components(
        (rates > 0) & off, directed=True, connection="strong"
    )
    if n_components != 1:
        raise Reducible(
            f"generator: jump chain has {n_components} communicating classes"
        )

    rates.setflags(write=False)
    return Generator(rates)


def from_offdiagonal(off_rates) -> Generator:
    """Generator whose diagonal is the negative off-diagonal row sum."""
    rates = np.array(off_rates, dtype=float)
    np.fill_diagonal(rates, 0.0)
    np.fill_diagonal(rates, -rates.sum(axis=1))
    return validate_generator(rates)


# =====================================================
# TRANSITION PROBABILITIES
# =====================================================
def transition_matrix(g: Generator, t: float) -> TransitionMatrix:
    """P(t) = exp(t * Lambda) by scaling and squaring with a Pade approximant."""
    if t < 0:
        raise ValueError(f"transition_matrix: negative time {t}")

    if t * g.mu > OVERFLOW_LIMIT:
        raise NumericOverflow(
            f"transition_matrix: t * mu = {t * g.mu:.3g} exceeds {OVERFLOW_LIMIT:g}"
        )

    if t == 0:
        return TransitionMatrix(0.0, np.eye(g.n))

    probs = np.clip(expm(t * g.rates), 0.0, 1.0)
    return TransitionMatrix(float(t), probs)


# =====================================================
# STATIONARY ANALYSIS
# =====================================================
def stationary_distribution(g: Generator) -> StationaryDistribution:
    n = g.n

    # pi Lambda = 0 with sum(pi) = 1 as an overdetermined system
    A = np.vstack([g.rates.T, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0

    pi, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)

    if rank < n:
        raise SingularSolve(f"stationary_distribution: rank {rank} < {n}")

    if np.any(pi <= 0):
        raise SingularSolve("stationary_distribution: non-positive component")

    pi = pi / pi.sum()

    scale = max(1.0, float(np.abs(g.rates).max()))
    residual = np.abs(pi @ g.rates).max()
    if residual > STATIONARY_RESIDUAL_TOL * scale:
        raise SingularSolve(
            f"stationary_distribution: residual {residual:.3g} too large"
        )

    pi.setflags(write=False)
    return StationaryDistribution(pi)


def _distance_to_stationarity(g: Generator, t: float, norm: str) -> float:
    D = np.tile(g.stationary, (g.n, 1)) - transition_matrix(g, t).probs

    if norm == "max":
        return float(np.abs(D).max())
    if norm == "one":
        return float(np.linalg.norm(D, 1))

    raise ValueError(f"stationary_time: unknown norm '{norm}'")


def stationary_time(g: Generator, eps: float = 0.005, norm: str = "max",
                    cap: float = 1e4, resolution: float = 1e-6) -> float:
    """Smallest t with ||Pi - P(t)|| < eps, rounded to 2 decimals."""
    if eps <= 0:
        raise ValueError(f"stationary_time: eps must be positive, got {eps}")

    lo, hi = 0.0, 0.01

    # geometric bracket
    while _distance_to_stationarity(g, hi, norm) >= eps:
        lo, hi = hi, 2.0 * hi
        if hi > cap:
            raise NotConverged(
                f"stationary_time: not within eps={eps:g} before t={cap:g}"
            )

    # bisection
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if _distance_to_stationarity(g, mid, norm) < eps:
            hi = mid
        else:
            lo = mid

    return round(hi, 2)


# =====================================================
# TIME REVERSAL
# =====================================================
def reversed_generator(g: Generator) -> Generator:
    """lambda~_ij = pi_j lambda_ji / pi_i; same exit rates and same pi."""
    pi = g.stationary

    rev = (g.rates.T * pi[None, :]) / pi[:, None]
    np.fill_diagonal(rev, 0.0)
    np.fill_diagonal(rev, -rev.sum(axis=1))

    out = validate_generator(rev)
    out.__dict__["stationary"] = pi
    return out


def is_reversible(g: Generator, tol: float = 1e-10) -> bool:
    flux = g.stationary[:, None] * g.rates
    return bool(np.abs(flux - flux.T).max() < tol)


# =====================================================
# BUILTINS
# =====================================================
def builtin_generator(name: str, n: int = None) -> Generator:
    name = name.lower()

    if name == "model1":
        name, n = "uniform", 3

    if name == "uniform":
        if n is None or not 3 <= n <= 20:
            raise BadDimension(f"builtin uniform: n must be in [3, 20], got {n}")

        rates = np.full((n, n), 1.0 / (n - 1))
        np.fill_diagonal(rates, -1.0)
        return validate_generator(rates)

    if name == "model2":
        return validate_generator([
            [-2.0, 1.0, 1.0],
            [0.0, -10.0, 10.0],
            [4.0, 1.0, -5.0],
        ])

    if name == "study4":
        return validate_generator([
            [-4.0, 2.0, 1.0, 1.0],
            [0.0, -3.0, 2.0, 1.0],
            [1.0, 0.0, -3.0, 2.0],
            [2.0, 1.0, 1.0, -4.0],
        ])

    raise UnknownName(f"builtin generator: unknown name '{name}'")


# =====================================================
# FILE FORMAT
# =====================================================
def parse_generator_text(text: str) -> Generator:
    rows = []

    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())

    if not rows:
        raise BadDimension("generator file: empty")

    if len(rows[0]) != 1:
        raise BadDimension("generator file: first line must hold n")

    n = int(rows[0][0])
    body = rows[1:]

    if len(body) != n or any(len(r) != n for r in body):
        raise BadDimension(f"generator file: expected {n} rows of {n} values")

    return validate_generator([[float(v) for v in r] for r in body])


def load_generator_file(path) -> Generator:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"generator file not found: {path}")

    return parse_generator_text(path.read_text(encoding="utf-8"))
