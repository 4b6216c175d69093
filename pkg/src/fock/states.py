"""State containers for a single mode truncated to the Fock levels |0>..|dim-1>."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = 1e-8
TAIL_WARN = 1e-6


class DimensionMismatchError(ValueError):
    """Two states or operators live in different truncated spaces."""


class TruncationError(ValueError):
    """The requested state does not fit in the truncated space."""


class InvariantError(ValueError):
    """A state failed normalization, Hermiticity, trace or positivity checks."""


class Parity(Enum):
    """Photon-number parity of a coherent state superposition."""

    EVEN = "even"   # |alpha> + |-alpha>
    ODD = "odd"     # |alpha> - |-alpha>


@dataclass(frozen=True)
class FockDim:
    """Number of retained Fock levels."""
    dim: int

    def __post_init__(self):
        if isinstance(self.dim, bool) or not isinstance(self.dim, (int, np.integer)):
            raise ValueError(f"dim must be an integer, got {self.dim!r}")
        if self.dim < 2:
            raise ValueError(f"dim must be at least 2, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))

    def levels(self) -> np.ndarray:
        return np.arange(self.dim)


def as_dim(d: Union[FockDim, int]) -> FockDim:
    return d if isinstance(d, FockDim) else FockDim(d)


def require_same_dim(first: FockDim, second: FockDim) -> FockDim:
    if first.dim != second.dim:
        raise DimensionMismatchError(f"dim {first.dim} does not match dim {second.dim}")
    return first


def _frozen_copy(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """
    Normalized amplitude vector.

    tail_weight is the probability that was cut off by truncation before
    renormalization (0 for states that fit exactly).
    """
    amplitudes: np.ndarray
    tail_weight: float = 0.0

    def __post_init__(self):
        amps = _frozen_copy(self.amplitudes)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError(f"amplitudes must be a vector of length >= 2, got shape {amps.shape}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvariantError(f"state norm is {norm:.12g}, expected 1")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "tail_weight", float(self.tail_weight))

    @classmethod
    def normalized(cls, amplitudes, tail_weight: float = 0.0) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        if tail_weight > TAIL_WARN:
            logger.warning("Truncation discarded %.3g of the probability (dim=%d)",
                           tail_weight, amps.size)
        return cls(amps / norm, tail_weight)

    @property
    def dim(self) -> FockDim:
        return FockDim(self.amplitudes.size)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix in the Fock basis."""
    elements: np.ndarray
    tail_weight: float = 0.0

    def __post_init__(self):
        mat = np.array(self.elements, dtype=complex, copy=True)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
            raise ValueError(f"density matrix must be square with dim >= 2, got shape {mat.shape}")

        asym = np.max(np.abs(mat - mat.conj().T))
        if asym > HERMITIAN_TOL:
            raise InvariantError(f"matrix is not Hermitian (max deviation {asym:.3g})")
        mat = 0.5 * (mat + mat.conj().T)

        trace = float(np.real(np.trace(mat)))
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvariantError(f"trace is {trace:.12g}, expected 1")

        smallest = float(np.linalg.eigvalsh(mat)[0])
        if smallest < -PSD_TOL:
            raise InvariantError(f"matrix has negative eigenvalue {smallest:.3g}")

        mat.setflags(write=False)
        object.__setattr__(self, "elements", mat)
        object.__setattr__(self, "tail_weight", float(self.tail_weight))

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        return cls(psi.projector(), psi.tail_weight)

    @classmethod
    def normalized(cls, matrix, tail_weight: float = 0.0) -> "DensityMatrix":
        """Hermitize and rescale to unit trace before validating."""
        mat = np.asarray(matrix, dtype=complex)
        mat = 0.5 * (mat + mat.conj().T)
        trace = np.real(np.trace(mat))
        if trace <= 0:
            raise ValueError(f"cannot normalize a matrix with trace {trace:.3g}")
        return cls(mat / trace, tail_weight)

    @classmethod
    def maximally_mixed(cls, d: Union[FockDim, int]) -> "DensityMatrix":
        n = as_dim(d).dim
        return cls(np.eye(n) / n)

    @property
    def dim(self) -> FockDim:
        return FockDim(self.elements.shape[0])

    def populations(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.elements)), 0.0, None)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.elements)

    def rotated(self, phi: float) -> "DensityMatrix":
        """Phase-space rotation e^{i phi n} rho e^{-i phi n}."""
        phases = np.exp(1j * phi * np.arange(self.dim.dim))
        return DensityMatrix(phases[:, None] * self.elements * phases.conj()[None, :],
                             self.tail_weight)

    def to_array(self) -> np.ndarray:
        return np.array(self.elements, copy=True)


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezed-light source: minimum variance relative to vacuum and the loss it sees."""
    V0_dB: float
    gamma_s: float

    def __post_init__(self):
        if self.V0_dB > 0:
            raise ValueError(f"V0_dB must be <= 0 for a squeezed source, got {self.V0_dB}")
        if not 0.0 <= self.gamma_s <= 1.0:
            raise ValueError(f"gamma_s must be in [0, 1], got {self.gamma_s}")

    @property
    def eta_s(self) -> float:
        return 1.0 - self.gamma_s

    @property
    def r(self) -> float:
        from ..optics.channels import db_to_r
        return db_to_r(self.V0_dB)
