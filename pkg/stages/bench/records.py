"""
Benchmark configuration and the flat record table every experiment emits.
"""
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from core.generator import Generator, builtin_generator, load_generator_file
from core.rng import DEFAULT_SEED
from stages.bridges.problem import METHODS


EXPERIMENTS = ("accuracy", "speed", "stationary", "probe", "study")
RECORD_COLUMNS = ["experiment", "method", "n", "T", "metric", "value", "stderr", "seconds", "seed"]


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    generator: str = "uniform"
    generator_file: Optional[str] = None
    n_values: Tuple[int, ...] = (3,)
    T_values: Tuple[float, ...] = ()
    methods: Tuple[str, ...] = METHODS
    m: int = 1000
    replicates: int = 3
    seed: int = DEFAULT_SEED
    eps: float = 0.005
    out: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"bench: unknown experiment '{self.experiment}'")

        if self.m < 1:
            raise ValueError(f"bench: m must be >= 1, got {self.m}")

        if self.replicates < 1:
            raise ValueError(f"bench: replicates must be >= 1, got {self.replicates}")

        for method in self.methods:
            if method not in METHODS:
                raise ValueError(f"bench: unknown method '{method}'")

        if self.seed is None:
            raise ValueError("bench: a seed is required")

        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "T_values", tuple(float(t) for t in self.T_values))
        object.__setattr__(self, "methods", tuple(self.methods))

    def load_generator(self, n: int = None) -> Generator:
        if self.generator_file:
            return load_generator_file(self.generator_file)
        return builtin_generator(self.generator, n)

    @property
    def model_label(self) -> str:
        if self.generator_file:
            return Path(self.generator_file).stem
        return self.generator


@dataclass(frozen=True)
class BenchRecord:
    experiment: str
    method: str
    n: int
    T: float
    metric: str
    value: float
    stderr: float = float("nan")
    seconds: float = 0.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"record: {self.metric} value must be finite, got {self.value}")

        if self.seconds < 0:
            raise ValueError(f"record: seconds must be >= 0, got {self.seconds}")


def records_to_frame(records) -> pd.DataFrame:
    df = pd.DataFrame([asdict(r) for r in records], columns=RECORD_COLUMNS)
    df = df.sort_values(["experiment", "method", "n", "T", "metric"], kind="stable")
    return df.reset_index(drop=True)


def write_records(records, path=None) -> str:
    """CSV text of the sorted records; also written to `path` when given."""
    text = records_to_frame(records).to_csv(
        index=False, float_format="%.12g", na_rep="nan", lineterminator="\n"
    )

    if path is not None:
        Path(path).write_text(text, encoding="utf-8")

    return text


def read_records(path) -> pd.DataFrame:
    return pd.read_csv(path)


def records_from_frame(df: pd.DataFrame) -> list:
    """Inverse of records_to_frame, used when a completed run is resumed."""
    return [
        BenchRecord(r.experiment, r.method, int(r.n), float(r.T), r.metric, float(r.value),
                    float(r.stderr), float(r.seconds), int(r.seed))
        for r in df.itertuples(index=False)
    ]
