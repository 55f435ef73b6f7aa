"""
Trace summaries: per-parameter mean and 0.025 / 0.975 quantiles over the
last iterates, with nearest-rank (inverse empirical CDF) quantiles.
"""
import numpy as np
import pandas as pd

from stages.inference.mcem import EstimationTrace


def parameter_order(n: int):
    """Off-diagonal (i, j) pairs ordered by column, then row: l21, l31, ..., l12, l32, ..."""
    return [(i, j) for j in range(n) for i in range(n) if i != j]


def summarize_trace(tr: EstimationTrace, tail: int) -> pd.DataFrame:
    available = len(tr) - tr.burn_in
    if not 1 <= tail <= available:
        raise ValueError(f"summary: tail must be in [1, {available}], got {tail}")

    kept = tr.iterates[-tail:]
    rows = []

    for i, j in parameter_order(tr.n):
        values = kept[:, i, j]
        q025, q975 = np.quantile(values, [0.025, 0.975], method="inverted_cdf")

        rows.append({
            "parameter": f"lambda_{i + 1}{j + 1}",
            "i": i + 1,
            "j": j + 1,
            "mean": float(values.mean()),
            "q025": float(q025),
            "q975": float(q975),
        })

    return pd.DataFrame(rows)
