"""
Discretely observed trajectories: the data of the estimation algorithms.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from core.errors import UnreachableEndpoint
from core.generator import Generator, transition_matrix
from core.path import simulate_forward


SPACING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    times: np.ndarray
    states: np.ndarray
    delta: Optional[float] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=np.int64)

        if times.ndim != 1 or times.shape != states.shape:
            raise ValueError("observations: times and states must be 1-d and equal length")

        if len(times) < 2:
            raise ValueError("observations: need at least two observations")

        if np.any(np.diff(times) <= 0):
            raise ValueError("observations: times must be strictly increasing")

        if np.any(states < 0):
            raise ValueError("observations: states must be >= 1")

        gaps = np.diff(times)
        delta = self.delta
        if delta is None and np.ptp(gaps) <= SPACING_TOL:
            delta = float(gaps.mean())
        elif delta is not None and np.abs(gaps - delta).max() > 1e-12 * max(1.0, delta) + SPACING_TOL:
            raise ValueError(f"observations: spacing is not the declared delta={delta:g}")

        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "delta", delta)

    @property
    def m(self) -> int:
        """Number of gaps."""
        return len(self.times) - 1

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def n_states(self) -> int:
        return int(self.states.max()) + 1

    def transitions(self):
        """(k, x_{k-1}, x_k, gap length) for every gap k = 1..m."""
        for k in range(1, len(self.times)):
            yield k, int(self.states[k - 1]), int(self.states[k]), float(self.times[k] - self.times[k - 1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"time": self.times, "state": self.states + 1})

    def to_csv(self, path=None) -> str:
        text = self.to_frame().to_csv(index=False, float_format="%.12g", lineterminator="\n")
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def observations_from_csv(path) -> ObservationSeries:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"observations file not found: {path}")

    df = pd.read_csv(path)
    missing = {"time", "state"} - set(df.columns)
    if missing:
        raise ValueError(f"observations: missing columns {sorted(missing)}")

    return ObservationSeries(df["time"].to_numpy(float), df["state"].to_numpy(np.int64) - 1)


def simulate_observations(g: Generator, T: float, delta: float, rng,
                          initial: int = None) -> ObservationSeries:
    """Forward path from a uniform (or given) state, observed on 0, delta, ..., T."""
    if delta <= 0 or delta > T:
        raise ValueError(f"simulate_observations: need 0 < delta <= T, got {delta}")

    if initial is None:
        initial = int(rng.integers(g.n))

    path = simulate_forward(g, initial, T, rng)

    steps = int(np.floor(T / delta + 1e-9))
    times = np.arange(steps + 1) * delta

    return ObservationSeries(times, path.state_at(times), delta)


def observed_log_likelihood(g: Generator, obs: ObservationSeries) -> float:
    """sum_k log p_{x_{k-1} x_k}(t_k - t_{k-1}) under g."""
    cache = {}
    total = 0.0

    for k, x, y, gap in obs.transitions():
        key = round(gap, 12)
        if key not in cache:
            cache[key] = transition_matrix(g, gap).probs

        p = cache[key][x, y]
        if p <= 0:
            raise UnreachableEndpoint(x, y, gap, index=k)

        total += np.log(p)

    return float(total)
