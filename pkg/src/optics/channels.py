"""Photon loss and lossy squeezed-state preparation."""
import logging
from dataclasses import dataclass
from typing import List, Union

import numpy as np
from scipy.special import comb

from ..fock.constructors import squeezed_vacuum
from ..fock.states import DensityMatrix, FockDim, SqueezeParams, as_dim
from ..phase_space.quadratures import quadrature_moments

logger = logging.getLogger(__name__)


def db_to_r(V0_dB: float) -> float:
    """Squeezing parameter r for a minimum variance V0_dB relative to vacuum (V_min = e^{-2r}/2)."""
    if V0_dB > 0:
        raise ValueError(f"V0_dB must be <= 0 (got anti-squeezing level {V0_dB})")
    return -V0_dB * np.log(10.0) / 20.0


def binomial_kraus(gamma: float, k: int, d: Union[FockDim, int]) -> np.ndarray:
    """
    Kraus element for k photons leaving through a beamsplitter of reflectivity gamma.

    <n-k|A_k|n> = sqrt(C(n,k)) (1-gamma)^{(n-k)/2} gamma^{k/2}
    """
    d = as_dim(d)
    if k < 0:
        raise ValueError(f"photon count k must be >= 0, got {k}")
    op = np.zeros((d.dim, d.dim), dtype=complex)
    if k >= d.dim:
        return op
    n = np.arange(k, d.dim)
    op[n - k, n] = np.sqrt(comb(n, k)) * (1.0 - gamma) ** ((n - k) / 2) * gamma ** (k / 2)
    return op


@dataclass(frozen=True)
class LossChannel:
    """Beamsplitter to vacuum removing a fraction gamma of the photons."""
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"loss gamma must be in [0, 1], got {self.gamma}")

    def kraus_operators(self, d: Union[FockDim, int]) -> List[np.ndarray]:
        d = as_dim(d)
        return [binomial_kraus(self.gamma, k, d) for k in range(d.dim)]


def loss_map(matrix: np.ndarray, ch: LossChannel) -> np.ndarray:
    """Schroedinger-picture action sum_k A_k X A_k^dag on a raw matrix."""
    out = np.zeros_like(matrix, dtype=complex)
    for a_k in ch.kraus_operators(matrix.shape[0]):
        out += a_k @ matrix @ a_k.conj().T
    return out


def loss_adjoint(op: np.ndarray, ch: LossChannel) -> np.ndarray:
    """Heisenberg-picture action sum_k A_k^dag X A_k."""
    out = np.zeros_like(op, dtype=complex)
    for a_k in ch.kraus_operators(op.shape[0]):
        out += a_k.conj().T @ op @ a_k
    return out


def apply_loss(rho: DensityMatrix, ch: LossChannel) -> DensityMatrix:
    if ch.gamma == 0.0:
        return rho
    return DensityMatrix.normalized(loss_map(rho.elements, ch), rho.tail_weight)


def prepare_squeezed(sp: SqueezeParams, d: Union[FockDim, int]) -> DensityMatrix:
    """Pure squeezed vacuum at V0_dB followed by loss gamma_s."""
    d = as_dim(d)
    psi = squeezed_vacuum(db_to_r(sp.V0_dB), d)
    rho = apply_loss(DensityMatrix.from_pure(psi), LossChannel(sp.gamma_s))
    logger.debug("Prepared squeezed state V0=%.2f dB, gamma_s=%.2f, dim=%d",
                 sp.V0_dB, sp.gamma_s, d.dim)
    return rho


def quadrature_variance(rho: DensityMatrix, theta: float) -> float:
    return quadrature_moments(rho, theta)[1]


def compose_losses(first: LossChannel, second: LossChannel) -> LossChannel:
    """Single channel equivalent to applying first then second."""
    return LossChannel(1.0 - (1.0 - first.gamma) * (1.0 - second.gamma))

