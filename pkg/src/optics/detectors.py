"""Heralding detector models and their diagonal POVMs."""
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from scipy.special import comb
from scipy.stats import binom

from ..fock.states import DensityMatrix, FockDim, as_dim


class DetectorKind(Enum):
    """Detector families used for heralding."""

    TES = "tes"                            # number resolving, binomial efficiency
    APD = "apd"                            # single on/off detector
    MULTIPLEXED_APD = "multiplexed_apd"    # n_apds on/off detectors behind a balanced splitter


@dataclass(frozen=True)
class DetectorModel:
    """
    Detector seen by the reflected mode.

    Outcomes are TES photon counts 0..max_resolved (the last one pooling
    every count >= max_resolved), APD no-click/click as 0/1, or the number of
    clicking detectors 0..n_apds for a multiplexed APD.
    """
    kind: DetectorKind
    efficiency: float
    max_resolved: int = 10
    n_apds: int = 2
    dark_count_prob: float = 0.0   # reserved for an additive dark-count term

    def __post_init__(self):
        object.__setattr__(self, "kind", DetectorKind(self.kind))
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"detector efficiency must be in [0, 1], got {self.efficiency}")
        if self.max_resolved < 1:
            raise ValueError(f"max_resolved must be >= 1, got {self.max_resolved}")
        if self.n_apds < 1:
            raise ValueError(f"n_apds must be >= 1, got {self.n_apds}")
        if self.dark_count_prob != 0.0:
            raise ValueError("dark counts are not modeled; dark_count_prob must be 0")

    @property
    def max_outcome(self) -> int:
        if self.kind is DetectorKind.TES:
            return self.max_resolved
        if self.kind is DetectorKind.APD:
            return 1
        return self.n_apds

    @property
    def n_outcomes(self) -> int:
        return self.max_outcome + 1

    def response(self, photons: np.ndarray) -> np.ndarray:
        """P(outcome | k photons) with shape (n_outcomes, len(photons))."""
        k = np.asarray(photons)
        eta = self.efficiency

        if self.kind is DetectorKind.TES:
            m = self.max_resolved
            table = np.array([binom.pmf(c, k, eta) for c in range(m)] + [binom.sf(m - 1, k, eta)])
        elif self.kind is DetectorKind.APD:
            off = (1.0 - eta) ** k
            table = np.array([off, 1.0 - off])
        else:
            # inclusion-exclusion over the set of detectors allowed to click
            m = self.n_apds
            rows = []
            for c in range(m + 1):
                total = np.zeros(k.shape, dtype=float)
                for j in range(c + 1):
                    total += (-1.0) ** (c - j) * comb(c, j) * (1.0 - eta * (m - j) / m) ** k
                rows.append(comb(m, c) * total)
            table = np.array(rows)

        return np.clip(table, 0.0, 1.0)

    def describe(self) -> str:
        if self.kind is DetectorKind.TES:
            return f"TES (eta={self.efficiency:.2f}, resolves up to {self.max_resolved})"
        if self.kind is DetectorKind.APD:
            return f"APD (eta={self.efficiency:.2f})"
        return f"{self.n_apds} multiplexed APDs (eta={self.efficiency:.2f} each)"


def _check_outcome(det: DetectorModel, outcome_n: int) -> None:
    if not 0 <= outcome_n <= det.max_outcome:
        raise ValueError(
            f"outcome {outcome_n} not produced by {det.describe()} (valid 0..{det.max_outcome})"
        )


def detector_povm(det: DetectorModel, outcome_n: int, d: Union[FockDim, int]) -> np.ndarray:
    """Diagonal effect operator for one detector outcome."""
    _check_outcome(det, outcome_n)
    d = as_dim(d)
    return np.diag(det.response(d.levels())[outcome_n]).astype(complex)


def outcome_probabilities(rho: DensityMatrix, det: DetectorModel) -> np.ndarray:
    """Probability of each outcome when rho is sent onto the detector."""
    return det.response(rho.dim.levels()) @ rho.populations()
