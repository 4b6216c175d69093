"""
Explicit two-mode construction of heralded subtraction.

Used only to cross-check the single-mode Kraus implementation: the signal
mode and a vacuum ancilla meet on a beamsplitter, the detector POVM acts on
the reflected mode and the ancilla is traced out.
"""
from typing import Tuple

import numpy as np
from scipy.linalg import expm

from ..fock.functionals import annihilation
from ..fock.states import DensityMatrix
from .heralding import HeraldConfig, HeraldingError, MIN_HERALD_PROB


def beamsplitter_unitary(R: float, dim: int) -> np.ndarray:
    """
    exp(theta (a b^dag - a^dag b)) with cos(theta) = sqrt(1 - R).

    Exact on the subspace of total photon number <= dim - 1, which contains
    every input of the form rho (x) |0><0|.
    """
    a = annihilation(dim)
    eye = np.eye(dim)
    a_sig = np.kron(a, eye)
    a_ref = np.kron(eye, a)
    theta = np.arccos(np.sqrt(1.0 - R))
    generator = theta * (a_sig @ a_ref.conj().T - a_sig.conj().T @ a_ref)
    return expm(generator)


def two_mode_herald(rho: DensityMatrix, hc: HeraldConfig) -> Tuple[DensityMatrix, float]:
    dim = rho.dim.dim
    ancilla = np.zeros((dim, dim), dtype=complex)
    ancilla[0, 0] = 1.0

    u = beamsplitter_unitary(hc.reflectivity_R, dim)
    joint = u @ np.kron(rho.elements, ancilla) @ u.conj().T
    joint = joint.reshape(dim, dim, dim, dim)

    effect = hc.detector.response(np.arange(dim))[hc.n_subtract]
    conditioned = np.einsum("ibjb,b->ij", joint, effect)

    prob = float(np.real(np.trace(conditioned)))
    if prob <= MIN_HERALD_PROB:
        raise HeraldingError(f"two-mode herald probability {prob:.3g} vanishes")
    return DensityMatrix.normalized(conditioned, rho.tail_weight), prob
