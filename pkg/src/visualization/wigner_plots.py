"""Figures from exported grids and reconstructed states. Each function returns the Figure."""
from typing import Optional

import matplotlib
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import TwoSlopeNorm

from ..fock.states import DensityMatrix
from ..homodyne.dataset import QuadratureDataset
from ..phase_space.quadratures import quad_pdf
from ..phase_space.wigner import PhaseSpaceGrid


def plot_wigner_grid(values: np.ndarray, grid: PhaseSpaceGrid,
                     title: str = "Wigner function", levels: int = 41):
    """Filled contours, diverging colormap centered on W = 0 so negative regions stand out."""
    values = np.asarray(values, dtype=float)
    q_mesh, p_mesh = grid.mesh()
    vmax = max(float(np.max(np.abs(values))), 1e-12)
    norm = TwoSlopeNorm(vmin=-vmax, vcenter=0.0, vmax=vmax)

    fig, ax = plt.subplots(figsize=(7, 6))
    filled = ax.contourf(q_mesh, p_mesh, values, levels=levels, cmap="RdBu_r", norm=norm)
    ax.contour(q_mesh, p_mesh, values, levels=[0.0], colors="black", linewidths=0.8)
    fig.colorbar(filled, ax=ax, label="W(q, p)")

    i, j = np.unravel_index(np.argmin(values), values.shape)
    ax.plot(grid.q_axis[j], grid.p_axis[i], marker="x", color="black")
    ax.annotate(f"min {values[i, j]:+.3f}", (grid.q_axis[j], grid.p_axis[i]),
                textcoords="offset points", xytext=(6, 6), fontsize=9)

    ax.set_xlabel("q", fontsize=12, fontweight="bold")
    ax.set_ylabel("p", fontsize=12, fontweight="bold")
    ax.set_title(title, fontsize=14, fontweight="bold")
    ax.set_aspect("equal")
    plt.tight_layout()
    return fig


def plot_fock_populations(rho: DensityMatrix, ideal: Optional[DensityMatrix] = None,
                          max_n: Optional[int] = None, title: str = "Photon-number distribution"):
    """Diagonal of rho as bars, optionally next to an ideal state's."""
    pops = rho.populations()
    n_show = min(max_n or pops.size, pops.size)
    n = np.arange(n_show)
    width = 0.4 if ideal is not None else 0.8

    fig, ax = plt.subplots(figsize=(10, 5))
    offset = -width / 2 if ideal is not None else 0.0
    ax.bar(n + offset, pops[:n_show], width, label="state",
           color="#4ECDC4", alpha=0.8, edgecolor="black", linewidth=1)
    if ideal is not None:
        ax.bar(n + width / 2, ideal.populations()[:n_show], width, label="ideal CSS",
               color="#FF6B6B", alpha=0.8, edgecolor="black", linewidth=1)
        ax.legend(fontsize=11)

    ax.set_xlabel("n", fontsize=12, fontweight="bold")
    ax.set_ylabel("P(n)", fontsize=12, fontweight="bold")
    ax.set_title(title, fontsize=14, fontweight="bold")
    ax.set_xticks(n)
    ax.grid(axis="y", alpha=0.3)
    plt.tight_layout()
    return fig


def plot_quadrature_histogram(data: QuadratureDataset, rho: Optional[DensityMatrix] = None,
                              theta: float = 0.0, window: float = 0.05, bins: int = 60):
    """
    Histogram of the samples whose phase lies within `window` of theta.

    With rho given (already including homodyne loss), its density at theta
    is drawn on top.
    """
    thetas = np.asarray(data.thetas)
    dist = np.abs(np.angle(np.exp(1j * (thetas - theta))))
    xs = np.asarray(data.xs)[dist <= window]

    fig, ax = plt.subplots(figsize=(8, 5))
    if xs.size:
        ax.hist(xs, bins=bins, density=True, color="#4ECDC4", alpha=0.7,
                edgecolor="black", linewidth=0.5, label=f"{xs.size:,} samples")
    if rho is not None:
        limit = max(4.0, float(np.max(np.abs(xs))) if xs.size else 4.0)
        x = np.linspace(-limit, limit, 400)
        ax.plot(x, quad_pdf(rho, theta, x), color="#FF6B6B", linewidth=2, label="pr(x | theta)")

    ax.set_xlabel("x", fontsize=12, fontweight="bold")
    ax.set_ylabel("density", fontsize=12, fontweight="bold")
    ax.set_title(f"Quadrature distribution at theta = {theta:.2f}", fontsize=14, fontweight="bold")
    ax.legend(fontsize=11)
    ax.grid(alpha=0.3)
    plt.tight_layout()
    return fig


def use_headless_backend() -> None:
    """Switch to Agg for scripts that only save files."""
    matplotlib.use("Agg")
