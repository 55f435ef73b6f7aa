"""
Sufficient statistics of a Markov jump path: transition counts N_ij and
holding times R_i over a horizon T, plus the complete-data MLE.
"""
from dataclasses import dataclass
from pathlib import Path as FilePath

import numpy as np

from core.errors import ZeroOccupation
from core.path import Path


@dataclass(frozen=True, eq=False)
class SufficientStats:
    N: np.ndarray
    R: np.ndarray
    horizon: float
    integral: bool = True

    @property
    def n(self) -> int:
        return len(self.R)

    @property
    def n_jumps(self) -> float:
        return float(self.N.sum())

    def __add__(self, other: "SufficientStats") -> "SufficientStats":
        if other.n != self.n:
            raise ValueError(f"stats: cannot add n={self.n} and n={other.n}")

        return SufficientStats(
            self.N + other.N,
            self.R + other.R,
            self.horizon + other.horizon,
            self.integral and other.integral,
        )

    def to_csv(self, path=None) -> str:
        lines = [f"# T={self.horizon:.12g}"]

        for i in range(self.n):
            for j in range(self.n):
                if i != j:
                    lines.append(f"{i + 1},{j + 1},{self.N[i, j]:.12g}")

        for i in range(self.n):
            lines.append(f"{i + 1},{self.R[i]:.12g}")

        text = "\n".join(lines) + "\n"

        if path is not None:
            FilePath(path).write_text(text, encoding="utf-8")

        return text


def zero_stats(n: int) -> SufficientStats:
    return SufficientStats(np.zeros((n, n)), np.zeros(n), 0.0)


def accumulate(p: Path, n: int) -> SufficientStats:
    """Exact counts and occupation times of a path on n states."""
    seq = p.state_sequence
    if seq.max() >= n:
        raise ValueError(f"accumulate: state {seq.max() + 1} outside 1..{n}")

    bounds = np.concatenate(([0.0], p.times, [p.horizon]))
    R = np.bincount(seq, weights=np.diff(bounds), minlength=n).astype(float)

    N = np.zeros((n, n))
    np.add.at(N, (seq[:-1], seq[1:]), 1.0)

    return SufficientStats(N, R, p.horizon)


def ensemble_mean(stats) -> SufficientStats:
    """Average of per-path stats; N becomes real-valued."""
    stats = list(stats)
    if not stats:
        raise ValueError("ensemble_mean: no stats to average")

    N = np.mean([s.N for s in stats], axis=0)
    R = np.mean([s.R for s in stats], axis=0)
    horizon = float(np.mean([s.horizon for s in stats]))

    return SufficientStats(N, R, horizon, integral=False)


def mle_from_stats(s: SufficientStats) -> np.ndarray:
    """lambda_ij = N_ij / R_i; diagonal set to the negative row sums."""
    zero = np.flatnonzero(s.R <= 0)
    if len(zero):
        raise ZeroOccupation(int(zero[0]), "mle")

    rates = s.N / s.R[:, None]
    np.fill_diagonal(rates, 0.0)
    np.fill_diagonal(rates, -rates.sum(axis=1))

    return rates


def stats_from_csv(source) -> SufficientStats:
    """Inverse of SufficientStats.to_csv; source is a path or the CSV text."""
    text = source
    if isinstance(source, FilePath) or "\n" not in str(source):
        text = FilePath(source).read_text(encoding="utf-8")

    horizon = None
    pairs, occupations = [], []

    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue

        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            if key.strip() == "T":
                horizon = float(value)
            continue

        fields = line.split(",")
        if len(fields) == 3:
            pairs.append((int(fields[0]) - 1, int(fields[1]) - 1, float(fields[2])))
        elif len(fields) == 2:
            occupations.append((int(fields[0]) - 1, float(fields[1])))
        else:
            raise ValueError(f"stats csv: malformed row '{line}'")

    if horizon is None:
        raise ValueError("stats csv: missing '# T=' header")

    n = len(occupations)
    N = np.zeros((n, n))
    R = np.zeros(n)

    for i, j, v in pairs:
        N[i, j] = v
    for i, v in occupations:
        R[i] = v

    return SufficientStats(N, R, horizon, integral=bool(np.all(N == np.round(N))))
