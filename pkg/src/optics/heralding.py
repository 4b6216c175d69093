"""Photon subtraction: weak beamsplitter, detector-conditioned heralding and modal impurity."""
import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from ..fock.states import DensityMatrix, FockDim, as_dim, require_same_dim
from .channels import LossChannel, apply_loss, binomial_kraus
from .detectors import DetectorKind, DetectorModel

logger = logging.getLogger(__name__)

MIN_HERALD_PROB = 1e-12


class HeraldingError(ValueError):
    """The requested herald outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class HeraldConfig:
    """Subtraction beamsplitter, detector, target outcome and modal purity."""
    reflectivity_R: float
    detector: DetectorModel
    n_subtract: int
    modal_purity_xi: float

    def __post_init__(self):
        if not 0.0 < self.reflectivity_R < 1.0:
            raise ValueError(f"reflectivity_R must be in (0, 1), got {self.reflectivity_R}")
        if self.n_subtract < 1:
            raise ValueError(f"n_subtract must be >= 1, got {self.n_subtract}")
        if self.n_subtract > self.detector.max_outcome:
            raise ValueError(
                f"n_subtract={self.n_subtract} exceeds the outcomes of {self.detector.describe()}"
            )
        if self.detector.kind is DetectorKind.TES and self.n_subtract >= self.detector.max_resolved:
            logger.warning("Heralding on the pooled TES overflow outcome %d", self.n_subtract)
        if not 0.0 <= self.modal_purity_xi <= 1.0:
            raise ValueError(f"modal_purity_xi must be in [0, 1], got {self.modal_purity_xi}")


def subtraction_kraus(R: float, k: int, d: Union[FockDim, int]) -> np.ndarray:
    """
    B_k = (R/(1-R))^{k/2} a^k (1-R)^{n/2} / sqrt(k!): exactly k photons reflected.
    """
    if not 0.0 < R < 1.0:
        raise ValueError(f"reflectivity must be in (0, 1), got {R}")
    return binomial_kraus(R, k, d)


def _reflected_branches(rho: DensityMatrix, R: float):
    d = rho.dim
    for k in range(d.dim):
        b_k = subtraction_kraus(R, k, d)
        yield k, b_k @ rho.elements @ b_k.conj().T


def herald_subtract(rho: DensityMatrix, hc: HeraldConfig) -> Tuple[DensityMatrix, float]:
    """Transmitted state conditioned on the detector reading n_subtract, and its probability."""
    weights = hc.detector.response(rho.dim.levels())[hc.n_subtract]
    out = np.zeros_like(rho.elements)
    for k, branch in _reflected_branches(rho, hc.reflectivity_R):
        if weights[k] > 0:
            out += weights[k] * branch

    prob = float(np.real(np.trace(out)))
    if prob <= MIN_HERALD_PROB:
        raise HeraldingError(
            f"herald probability {prob:.3g} for outcome {hc.n_subtract} is below {MIN_HERALD_PROB}"
        )
    logger.info("Heralded on outcome %d with probability %.4g", hc.n_subtract, prob)
    return DensityMatrix.normalized(out, rho.tail_weight), prob


def herald_outcome_table(rho: DensityMatrix, R: float, det: DetectorModel) -> np.ndarray:
    """Herald probability of every detector outcome."""
    reflected = np.array([np.real(np.trace(branch)) for _, branch in _reflected_branches(rho, R)])
    return det.response(rho.dim.levels()) @ reflected


def background_state(rho: DensityMatrix, R: float) -> DensityMatrix:
    """Transmitted beam averaged over all reflected photon numbers."""
    return apply_loss(rho, LossChannel(R))


def modal_mixture(rho_herald: DensityMatrix, rho_background: DensityMatrix,
                  xi: float) -> DensityMatrix:
    """xi * rho_herald + (1 - xi) * rho_background."""
    require_same_dim(rho_herald.dim, rho_background.dim)
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"modal purity must be in [0, 1], got {xi}")
    mixed = xi * rho_herald.elements + (1.0 - xi) * rho_background.elements
    tail = max(rho_herald.tail_weight, rho_background.tail_weight)
    return DensityMatrix.normalized(mixed, tail)
