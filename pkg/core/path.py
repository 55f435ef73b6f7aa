"""
Realized trajectories of a Markov jump process on [0, T].

A Path is the initial state plus strictly increasing jump times with the
post-jump states. Evaluation is right-continuous: at a jump instant the
path is already in the new state.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core.errors import InvalidPath
from core.generator import Generator


@dataclass(frozen=True, eq=False)
class Path:
    initial_state: int
    times: np.ndarray
    states: np.ndarray
    horizon: float
    # jump times of the path this one mirrors, set by reverse_path
    mirrored_times: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=np.int64)

        if self.horizon <= 0:
            raise InvalidPath(f"path: horizon must be positive, got {self.horizon}")

        if times.shape != states.shape or times.ndim != 1:
            raise InvalidPath("path: times and states must be 1-d and equal length")

        if len(times):
            if times[0] <= 0 or times[-1] >= self.horizon:
                raise InvalidPath("path: jump times must lie in (0, T)")

            if np.any(np.diff(times) <= 0):
                raise InvalidPath("path: jump times must be strictly increasing")

            seq = np.concatenate(([self.initial_state], states))
            if np.any(seq[1:] == seq[:-1]):
                raise InvalidPath("path: consecutive states must differ")

        times.setflags(write=False)
        states.setflags(write=False)

        object.__setattr__(self, "initial_state", int(self.initial_state))
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @classmethod
    def constant(cls, state: int, horizon: float) -> "Path":
        return cls(state, np.empty(0), np.empty(0, dtype=np.int64), horizon)

    @property
    def n_jumps(self) -> int:
        return len(self.times)

    @property
    def end_state(self) -> int:
        return int(self.states[-1]) if len(self.states) else self.initial_state

    @property
    def state_sequence(self) -> np.ndarray:
        return np.concatenate(([self.initial_state], self.states))

    def state_at(self, t):
        """State at time(s) t in [0, T], right-continuous."""
        idx = np.searchsorted(self.times, t, side="right")
        return self.state_sequence[idx]

    def equals(self, other: "Path") -> bool:
        return (
            self.initial_state == other.initial_state
            and self.horizon == other.horizon
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.states, other.states)
        )

    def to_rows(self, offset: float = 0.0):
        """(time, state) rows: start, every jump, then the horizon."""
        rows = [(offset, self.initial_state)]
        rows += [(offset + t, int(s)) for t, s in zip(self.times, self.states)]
        rows.append((offset + self.horizon, self.end_state))
        return rows


# =====================================================
# FORWARD SIMULATION
# =====================================================
def simulate_forward(g: Generator, a: int, T: float, rng) -> Path:
    """Gillespie-style forward simulation from X_0 = a, truncated at T."""
    if not 0 <= a < g.n:
        raise ValueError(f"simulate_forward: state {a} out of range")
    if T <= 0:
        raise ValueError(f"simulate_forward: horizon must be positive, got {T}")

    exit_rates = g.exit_rates
    jump_cdf = g.jump_cdf

    times, states = [], []
    t, state = 0.0, a

    while True:
        t += rng.standard_exponential() / exit_rates[state]
        if t >= T:
            break

        row = jump_cdf[state]
        nxt = int(np.searchsorted(row, rng.random() * row[-1], side="right"))
        nxt = min(nxt, g.n - 1)

        times.append(t)
        states.append(nxt)
        state = nxt

    return Path(a, np.array(times), np.array(states, dtype=np.int64), T)


# =====================================================
# TRANSFORMS
# =====================================================
def reverse_path(p: Path) -> Path:
    """
    Path whose state at time t is p's state at time T - t.

    Reversing a reversal hands back the original jump times unchanged, so
    reverse_path(reverse_path(p)) equals p exactly.
    """
    seq = p.state_sequence
    states = seq[:-1][::-1]

    if p.mirrored_times is not None:
        times = p.mirrored_times
    else:
        times = p.horizon - p.times[::-1]

    return Path(p.end_state, times, states, p.horizon, mirrored_times=p.times)


def concatenate_paths(paths) -> Path:
    """Join consecutive paths; each must start where the previous one ends."""
    paths = list(paths)
    if not paths:
        raise InvalidPath("concatenate_paths: nothing to join")

    times, states = [], []
    offset = 0.0
    current = paths[0].initial_state

    for k, p in enumerate(paths):
        if p.initial_state != current:
            raise InvalidPath(
                f"concatenate_paths: segment {k} starts in {p.initial_state + 1}, "
                f"previous ended in {current + 1}"
            )

        times.append(offset + p.times)
        states.append(p.states)

        offset += p.horizon
        current = p.end_state

    return Path(
        paths[0].initial_state,
        np.concatenate(times),
        np.concatenate(states),
        offset,
    )
