"""Scalar functionals and ladder operators on truncated states."""
from typing import Union

import numpy as np

from .states import DensityMatrix, FockDim, PureState, as_dim, require_same_dim


def annihilation(d: Union[FockDim, int]) -> np.ndarray:
    n = as_dim(d).dim
    return np.diag(np.sqrt(np.arange(1, n)), k=1).astype(complex)


def number_operator(d: Union[FockDim, int]) -> np.ndarray:
    return np.diag(np.arange(as_dim(d).dim)).astype(complex)


def quadrature_operator(theta: float, d: Union[FockDim, int]) -> np.ndarray:
    """x_theta = q cos(theta) + p sin(theta) = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2)."""
    a = annihilation(d)
    return (a * np.exp(-1j * theta) + a.conj().T * np.exp(1j * theta)) / np.sqrt(2.0)


def expectation(rho: DensityMatrix, op: np.ndarray) -> complex:
    require_same_dim(rho.dim, FockDim(op.shape[0]))
    return complex(np.trace(rho.elements @ op))


def fidelity(rho: DensityMatrix, psi: PureState) -> float:
    """<psi|rho|psi>, clipped to [0, 1]."""
    require_same_dim(rho.dim, psi.dim)
    value = np.real(np.vdot(psi.amplitudes, rho.elements @ psi.amplitudes))
    return float(np.clip(value, 0.0, 1.0))


def mean_photon(rho: DensityMatrix) -> float:
    return float(np.dot(np.arange(rho.dim.dim), np.real(np.diag(rho.elements))))


def purity(rho: DensityMatrix) -> float:
    # Tr(rho^2) for Hermitian rho is the squared Frobenius norm
    return float(np.sum(np.abs(rho.elements) ** 2))


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def state_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    require_same_dim(rho.dim, sigma.dim)
    root = _psd_sqrt(rho.elements)
    inner = root @ sigma.elements @ root
    vals = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0.0, None)
    return float(np.clip(np.sum(np.sqrt(vals)) ** 2, 0.0, 1.0))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    require_same_dim(rho.dim, sigma.dim)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho.elements - sigma.elements))))
