"""
File forms of pipeline artifacts.

States, reports and bootstrap summaries are JSON; Wigner grids are CSV with
a one-line header in the same style as quadrature datasets.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np
import pandas as pd

from ..evaluation.metrics import ReconstructionReport, state_digest
from ..fock.states import DensityMatrix, Parity
from ..homodyne.dataset import SIGNIFICANT_DIGITS, round_significant
from ..phase_space.css_analysis import CssFit
from ..phase_space.wigner import PhaseSpaceGrid
from ..tomo.bootstrap import BootstrapReport

logger = logging.getLogger(__name__)

GRID_TAG = "#wigner-grid"
GRID_KEYS = ("q_min", "q_max", "n_q", "p_min", "p_max", "n_p")


def _to_builtin(value: Any) -> Any:
    """json.dump fallback for numpy scalars and arrays."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _write_json(payload: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, default=_to_builtin)
        f.write("\n")
    return path


def _read_json(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path) as f:
        return json.load(f)


# ---------------------------------------------------------------- states

def state_to_dict(rho: DensityMatrix) -> Dict[str, Any]:
    """Row-major (re, im) pairs with a dim header."""
    flat = rho.elements.ravel()
    return {
        "dim": rho.dim.dim,
        "elements": [[float(z.real), float(z.imag)] for z in flat],
        "tail_weight": rho.tail_weight,
        "digest": state_digest(rho),
    }


def state_from_dict(raw: Dict[str, Any]) -> DensityMatrix:
    dim = int(raw["dim"])
    pairs = np.asarray(raw["elements"], dtype=float)
    if pairs.shape != (dim * dim, 2):
        raise ValueError(f"expected {dim * dim} (re, im) pairs for dim={dim}, got {pairs.shape}")
    rho = DensityMatrix((pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim),
                        float(raw.get("tail_weight", 0.0)))
    if "digest" in raw and raw["digest"] != state_digest(rho):
        raise ValueError("stored digest does not match the stored elements")
    return rho


def save_state(rho: DensityMatrix, path: Union[str, Path]) -> Path:
    return _write_json(state_to_dict(rho), path)


def load_state(path: Union[str, Path]) -> DensityMatrix:
    return state_from_dict(_read_json(path))


# ---------------------------------------------------------------- reports

def report_to_dict(report: ReconstructionReport) -> Dict[str, Any]:
    alpha = complex(report.css.alpha)
    return {
        "label": report.label,
        "digest": report.digest,
        "w_min": report.w_min,
        "w_min_q": report.w_min_q,
        "w_min_p": report.w_min_p,
        "mean_photon": report.mean_photon,
        "purity": report.purity,
        "css": {
            "alpha": [alpha.real, alpha.imag],
            "magnitude": report.alpha,
            "parity": report.parity.value,
            "fidelity": report.fidelity,
            "degenerate": report.css.degenerate,
        },
        "herald_prob": report.herald_prob,
        "diagnostics": dict(report.diagnostics),
        "grid": report.grid.to_dict(),
        "state": state_to_dict(report.state),
    }


def report_from_dict(raw: Dict[str, Any]) -> ReconstructionReport:
    css_raw = raw["css"]
    re, im = css_raw["alpha"]
    css = CssFit(alpha=complex(re, im), parity=Parity(css_raw["parity"]),
                 fidelity=float(css_raw["fidelity"]),
                 degenerate=bool(css_raw.get("degenerate", False)))
    return ReconstructionReport(
        label=raw["label"],
        state=state_from_dict(raw["state"]),
        digest=raw["digest"],
        w_min=float(raw["w_min"]),
        w_min_q=float(raw["w_min_q"]),
        w_min_p=float(raw["w_min_p"]),
        mean_photon=float(raw["mean_photon"]),
        purity=float(raw["purity"]),
        css=css,
        herald_prob=raw.get("herald_prob"),
        diagnostics=dict(raw.get("diagnostics", {})),
        grid=PhaseSpaceGrid(**raw["grid"]),
    )


def save_report(report: ReconstructionReport, path: Union[str, Path]) -> Path:
    return _write_json(report_to_dict(report), path)


def load_report(path: Union[str, Path]) -> ReconstructionReport:
    return report_from_dict(_read_json(path))


def bootstrap_to_dict(boot: BootstrapReport) -> Dict[str, Any]:
    return {
        "label": boot.point.label,
        "point_digest": boot.point.digest,
        "resamples": boot.resamples,
        "excluded": boot.excluded,
        "intervals": {
            name: {"lower": iv.lower, "point": iv.point, "upper": iv.upper,
                   "minus": iv.minus, "plus": iv.plus}
            for name, iv in boot.intervals.items()
        },
        "point_purity": boot.point_purity,
        "mean_resample_purity": boot.mean_resample_purity,
        "resample_purity_std": boot.resample_purity_std,
        "purity_bias_sigma": boot.purity_bias_sigma,
    }


def save_bootstrap(boot: BootstrapReport, path: Union[str, Path]) -> Path:
    return _write_json(bootstrap_to_dict(boot), path)


# ---------------------------------------------------------------- Wigner grids

def rounded_grid_values(values: np.ndarray) -> np.ndarray:
    """Grid values exactly as they will appear in the CSV."""
    return round_significant(values)


def save_wigner_grid(values: np.ndarray, grid: PhaseSpaceGrid, digest: str,
                     path: Union[str, Path]) -> Path:
    """
    Rows "q,p,W", p-major (the row order of `values`), 9 significant digits.

    Header: #wigner-grid,q_min=..,q_max=..,n_q=..,p_min=..,p_max=..,n_p=..,digest=..
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_p, grid.n_q):
        raise ValueError(f"values shape {values.shape} does not match grid {grid.n_p}x{grid.n_q}")

    spec = grid.to_dict()
    header = ",".join([GRID_TAG] + [f"{k}={spec[k]!r}" for k in GRID_KEYS] + [f"digest={digest}"])
    q_mesh, p_mesh = grid.mesh()
    frame = pd.DataFrame({
        "q": round_significant(q_mesh.ravel()),
        "p": round_significant(p_mesh.ravel()),
        "W": rounded_grid_values(values.ravel()),
    })

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(header + "\n")
        frame.to_csv(f, header=False, index=False,
                     float_format=f"%.{SIGNIFICANT_DIGITS}g", lineterminator="\n")
    logger.debug("Wrote %dx%d Wigner grid to %s", grid.n_p, grid.n_q, path)
    return path


def load_wigner_grid(path: Union[str, Path]) -> Tuple[np.ndarray, PhaseSpaceGrid, str]:
    """Returns (values of shape (n_p, n_q), grid, state digest)."""
    path = Path(path)
    with open(path) as f:
        fields = f.readline().strip().split(",")
    if fields[0] != GRID_TAG:
        raise ValueError(f"{path} is not a Wigner grid file")
    meta = dict(item.split("=", 1) for item in fields[1:])
    grid = PhaseSpaceGrid(
        q_min=float(meta["q_min"]), q_max=float(meta["q_max"]), n_q=int(meta["n_q"]),
        p_min=float(meta["p_min"]), p_max=float(meta["p_max"]), n_p=int(meta["n_p"]),
    )

    body = pd.read_csv(path, skiprows=1, header=None, names=["q", "p", "W"],
                       float_precision="round_trip")
    if len(body) != grid.n_q * grid.n_p:
        raise ValueError(f"{path} holds {len(body)} cells, grid needs {grid.n_q * grid.n_p}")
    values = body["W"].to_numpy().reshape(grid.n_p, grid.n_q)
    return values, grid, meta["digest"]
