"""Quadrature eigenfunctions and homodyne distributions (vacuum variance 1/2)."""
from typing import Tuple, Union

import numpy as np
from scipy.special import eval_hermite, gammaln

from ..fock.functionals import annihilation
from ..fock.states import DensityMatrix, FockDim, as_dim

ArrayLike = Union[float, np.ndarray]


def oscillator_eigenfunctions(x: ArrayLike, d: Union[FockDim, int]) -> np.ndarray:
    """
    psi_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi)) for n < dim.

    Returns an array of shape (len(x), dim).
    """
    d = as_dim(d)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = d.levels()
    log_norm = -0.5 * (n * np.log(2.0) + gammaln(n + 1) + 0.5 * np.log(np.pi))
    return eval_hermite(n[None, :], x[:, None]) * np.exp(-0.5 * x[:, None] ** 2 + log_norm[None, :])


def quadrature_vectors(theta: ArrayLike, x: ArrayLike, d: Union[FockDim, int]) -> np.ndarray:
    """Rows v_j with <n|x_theta> = e^{i n theta} psi_n(x) for each (theta_j, x_j)."""
    d = as_dim(d)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), x.shape)
    phases = np.exp(1j * np.outer(theta, d.levels()))
    return oscillator_eigenfunctions(x, d) * phases


def quad_pdf(rho: DensityMatrix, theta: ArrayLike, x: ArrayLike) -> Union[float, np.ndarray]:
    """pr(x|theta) = <x_theta|rho|x_theta>."""
    scalar = np.ndim(x) == 0
    v = quadrature_vectors(theta, x, rho.dim)
    pdf = np.real(np.sum(v.conj() * (v @ rho.elements.T), axis=1))
    pdf = np.clip(pdf, 0.0, None)
    return float(pdf[0]) if scalar else pdf


def quadrature_moments(rho: DensityMatrix, theta: float) -> Tuple[float, float]:
    """Mean and variance of x_theta from <a>, <a^2> and <a^dag a>."""
    a = annihilation(rho.dim)
    ev_a = np.trace(rho.elements @ a)
    ev_a2 = np.trace(rho.elements @ a @ a)
    ev_n = np.real(np.trace(rho.elements @ a.conj().T @ a))
    phase = np.exp(-1j * theta)

    mean = np.sqrt(2.0) * np.real(ev_a * phase)
    second = 0.5 * (2.0 * np.real(ev_a2 * phase ** 2) + 2.0 * ev_n + 1.0)
    return float(mean), float(second - mean ** 2)
