"""
Side-by-side estimation table: true value, MCEM and MCMC estimates with
their lower / upper interval bounds for every off-diagonal rate.
"""
from pathlib import Path

import numpy as np
import pandas as pd


TABLE_COLUMNS = [
    "Parameter", "True",
    "MCEM_Est", "MCEM_CII", "MCEM_CIS",
    "MCMC_Est", "MCMC_CII", "MCMC_CIS",
]


def build_estimate_table(true_rates, mcem_summary: pd.DataFrame, gibbs_summary: pd.DataFrame) -> pd.DataFrame:
    true_rates = np.asarray(true_rates, dtype=float)

    if list(mcem_summary["parameter"]) != list(gibbs_summary["parameter"]):
        raise ValueError("table: MCEM and MCMC summaries list different parameters")

    truth = [true_rates[i - 1, j - 1] for i, j in zip(mcem_summary["i"], mcem_summary["j"])]

    return pd.DataFrame({
        "Parameter": mcem_summary["parameter"].to_numpy(),
        "True": truth,
        "MCEM_Est": mcem_summary["mean"].to_numpy(),
        "MCEM_CII": mcem_summary["q025"].to_numpy(),
        "MCEM_CIS": mcem_summary["q975"].to_numpy(),
        "MCMC_Est": gibbs_summary["mean"].to_numpy(),
        "MCMC_CII": gibbs_summary["q025"].to_numpy(),
        "MCMC_CIS": gibbs_summary["q975"].to_numpy(),
    }, columns=TABLE_COLUMNS)


def render_text(table: pd.DataFrame) -> str:
    return table.to_string(index=False, float_format=lambda v: f"{v:.3f}") + "\n"


def emit_estimate_table(true_rates, mcem_summary, gibbs_summary, csv_path=None, text_path=None):
    """Returns (table, csv text, aligned text); writes either rendering when a path is given."""
    table = build_estimate_table(true_rates, mcem_summary, gibbs_summary)

    csv_text = table.to_csv(index=False, float_format="%.6g", lineterminator="\n")
    text = render_text(table)

    if csv_path is not None:
        Path(csv_path).write_text(csv_text, encoding="utf-8")
    if text_path is not None:
        Path(text_path).write_text(text, encoding="utf-8")

    return table, csv_text, text
