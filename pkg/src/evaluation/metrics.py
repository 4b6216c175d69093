import hashlib
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..fock.constructors import css_state
from ..fock.functionals import fidelity, mean_photon, purity
from ..fock.states import DensityMatrix, Parity
from ..phase_space.css_analysis import CssFit, nearest_css
from ..phase_space.wigner import PhaseSpaceGrid, wigner_min


def state_digest(rho: DensityMatrix) -> str:
    """sha256 over the row-major complex128 elements."""
    return hashlib.sha256(np.ascontiguousarray(rho.elements, dtype=complex).tobytes()).hexdigest()


@dataclass
class ReconstructionReport:
    """Figures of merit for one reconstructed (or simulated) state."""
    label: str
    state: DensityMatrix = field(repr=False)
    digest: str
    w_min: float
    w_min_q: float
    w_min_p: float
    mean_photon: float
    purity: float
    css: CssFit
    herald_prob: Optional[float] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    grid: PhaseSpaceGrid = field(default_factory=PhaseSpaceGrid, repr=False)

    @property
    def fidelity(self) -> float:
        return self.css.fidelity

    @property
    def alpha(self) -> float:
        return self.css.magnitude

    @property
    def parity(self) -> Parity:
        return self.css.parity

    def metrics(self) -> Dict[str, float]:
        """Table-1 columns."""
        return {"w_min": self.w_min, "mean_photon": self.mean_photon,
                "fidelity": self.fidelity, "alpha": self.alpha}

    def __repr__(self):
        herald = f"{self.herald_prob:.4g}" if self.herald_prob is not None else "n/a"
        return f"""Reconstruction Report ({self.label}):
  W_min: {self.w_min:+.4f} at (q={self.w_min_q:+.3f}, p={self.w_min_p:+.3f})
  <n>: {self.mean_photon:.3f}
  Nearest CSS: {self.parity.value}, |alpha| = {self.alpha:.3f}, F = {self.fidelity:.3f}
  Purity: {self.purity:.4f}
  Herald probability: {herald}
  State digest: {self.digest[:16]}
"""


def analyze_state(rho: DensityMatrix, label: str, grid: Optional[PhaseSpaceGrid] = None,
                  herald_prob: Optional[float] = None,
                  diagnostics: Optional[Dict[str, Any]] = None) -> ReconstructionReport:
    grid = grid or PhaseSpaceGrid()
    w, q_star, p_star = wigner_min(rho, grid)
    diag = dict(diagnostics or {})
    diag.setdefault("tail_weight", rho.tail_weight)
    return ReconstructionReport(
        label=label,
        state=rho,
        digest=state_digest(rho),
        w_min=w,
        w_min_q=q_star,
        w_min_p=p_star,
        mean_photon=mean_photon(rho),
        purity=purity(rho),
        css=nearest_css(rho),
        herald_prob=herald_prob,
        diagnostics=diag,
        grid=grid,
    )


def check_report_consistency(report: ReconstructionReport, tol: float = 1e-6) -> List[str]:
    """Recompute metrics from the stored state; returns a list of mismatches (empty if consistent)."""
    rho = report.state
    problems = []

    if state_digest(rho) != report.digest:
        problems.append("state digest does not match stored state")

    recomputed = {
        "mean_photon": mean_photon(rho),
        "purity": purity(rho),
        "fidelity": fidelity(rho, css_state(report.css.alpha, report.parity, rho.dim)),
        "w_min": wigner_min(rho, report.grid)[0],
    }
    stored = {"mean_photon": report.mean_photon, "purity": report.purity,
              "fidelity": report.fidelity, "w_min": report.w_min}

    for name, value in recomputed.items():
        if abs(value - stored[name]) > tol:
            problems.append(f"{name}: stored {stored[name]:.9g}, recomputed {value:.9g}")
    return problems
