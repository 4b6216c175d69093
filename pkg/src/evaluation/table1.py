"""Comparison of simulated reconstructions against the published Table-1 rows."""
from typing import Dict, Optional, Tuple

import pandas as pd

from .metrics import ReconstructionReport

# (value, minus, plus) as published; literature rows without model parameters are left out
PUBLISHED_TABLE1: Dict[str, Dict[str, Tuple[float, float, float]]] = {
    "APD-1": {
        "w_min": (-0.041, 0.001, 0.009),
        "mean_photon": (1.96, 0.04, 0.05),
        "fidelity": (0.522, 0.010, 0.004),
        "alpha": (1.32, 0.02, 0.01),
    },
    "APD-2": {
        "w_min": (-0.018, 0.002, 0.002),
        "mean_photon": (2.34, 0.05, 0.06),
        "fidelity": (0.523, 0.014, 0.022),
        "alpha": (1.30, 0.02, 0.04),
    },
    "TES-2": {
        "w_min": (-0.010, 0.001, 0.001),
        "mean_photon": (1.89, 0.06, 0.05),
        "fidelity": (0.531, 0.018, 0.017),
        "alpha": (1.16, 0.04, 0.04),
    },
    "TES-3": {
        "w_min": (-0.116, 0.019, 0.073),
        "mean_photon": (2.75, 0.24, 0.06),
        "fidelity": (0.59, 0.14, 0.04),
        "alpha": (1.76, 0.19, 0.02),
    },
}

# Model-consistency tolerances; the small-sample three-photon row gets double
TOLERANCES = {"fidelity": 0.08, "alpha": 0.20, "mean_photon": 0.35, "w_min": 0.05}
WIDE_ROWS = {"TES-3": 2.0}
BAND_CHECKED = {"TES-3": ("fidelity", "alpha")}

# Metrics the single-mode model cannot reach with the published source parameters.
# The three-photon forward state is even-dominated (W(0,0) > 0, nearest CSS even,
# F near 0.44); even with xi = 1 it only reaches W(0,0) near -0.01.
MODEL_GAPS: Dict[str, Tuple[str, ...]] = {"TES-3": ("w_min", "fidelity", "alpha")}

COLUMNS = ["row", "metric", "published", "model", "abs_delta", "tolerance", "band_ok", "passed",
           "known_gap"]


def compare_to_table1(row: str, report: ReconstructionReport,
                      bootstrap=None) -> pd.DataFrame:
    """
    One line per metric: published value, model value, |delta|, tolerance and pass flag.

    For rows in BAND_CHECKED the published value must also fall inside the run's
    [16th, 84th] percentile band; without a bootstrap report that check fails.
    """
    if row not in PUBLISHED_TABLE1:
        raise ValueError(f"unknown Table-1 row {row!r}; expected one of {sorted(PUBLISHED_TABLE1)}")

    scale = WIDE_ROWS.get(row, 1.0)
    model = report.metrics()
    records = []
    for metric, (published, _, _) in PUBLISHED_TABLE1[row].items():
        delta = abs(model[metric] - published)
        tol = TOLERANCES[metric] * scale
        band_ok: Optional[bool] = None
        if metric in BAND_CHECKED.get(row, ()):
            band_ok = bool(bootstrap is not None and bootstrap.intervals[metric].contains(published))
        passed = delta <= tol and band_ok is not False
        records.append({
            "row": row,
            "metric": metric,
            "published": published,
            "model": model[metric],
            "abs_delta": delta,
            "tolerance": tol,
            "band_ok": band_ok,
            "passed": passed,
            "known_gap": metric in MODEL_GAPS.get(row, ()),
        })
    return pd.DataFrame.from_records(records, columns=COLUMNS)


def unexpected_failures(table: pd.DataFrame) -> pd.DataFrame:
    """Failed lines that are not listed in MODEL_GAPS."""
    return table[~table["passed"].astype(bool) & ~table["known_gap"].astype(bool)]


def summarize_table(table: pd.DataFrame) -> str:
    """Published vs model, one row per Table-1 line."""
    wide = table.pivot(index="row", columns="metric", values="model")
    published = table.pivot(index="row", columns="metric", values="published")
    lines = [f"{'':8}" + "".join(f"{m:>22}" for m in ("w_min", "mean_photon", "fidelity", "alpha"))]
    for row in wide.index:
        cells = "".join(f"{published.loc[row, m]:>10.3f} / {wide.loc[row, m]:<9.3f}"
                        for m in ("w_min", "mean_photon", "fidelity", "alpha"))
        lines.append(f"{row:8}{cells}")
    return "\n".join(lines)
