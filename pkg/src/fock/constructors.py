"""Standard single-mode states in the truncated Fock basis."""
from typing import Union

import numpy as np
from scipy.special import gammaln

from .states import FockDim, Parity, PureState, TruncationError, as_dim, TAIL_WARN


def fock_state(n: int, d: Union[FockDim, int]) -> PureState:
    d = as_dim(d)
    if not 0 <= n < d.dim:
        raise ValueError(f"photon number {n} outside 0..{d.dim - 1}")
    amps = np.zeros(d.dim, dtype=complex)
    amps[n] = 1.0
    return PureState(amps)


# relative slack so |alpha| = sqrt(dim/4) passes after rounding
GUARD_RTOL = 1e-12


def _check_amplitude_fits(alpha: complex, d: FockDim) -> None:
    if abs(alpha) ** 2 > d.dim / 4 * (1.0 + GUARD_RTOL):
        raise TruncationError(
            f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds dim/4 = {d.dim / 4:.4g}"
        )


def _coherent_series(alpha: complex, n: np.ndarray) -> np.ndarray:
    """alpha^n e^{-|alpha|^2/2} / sqrt(n!) evaluated in log space."""
    mag = abs(alpha)
    if mag == 0:
        return (n == 0).astype(complex)
    log_mag = n * np.log(mag) - 0.5 * mag ** 2 - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent_state(alpha: complex, d: Union[FockDim, int]) -> PureState:
    d = as_dim(d)
    _check_amplitude_fits(alpha, d)
    amps = _coherent_series(complex(alpha), d.levels())
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    return PureState.normalized(amps, tail)


def squeezed_vacuum(r: float, d: Union[FockDim, int]) -> PureState:
    """
    Squeezed vacuum with reduced variance along q.

    c_{2k} = (-tanh r)^k sqrt((2k)!) / (2^k k!) / sqrt(cosh r); odd amplitudes vanish.
    """
    d = as_dim(d)
    if r < 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r}")
    if r == 0:
        return fock_state(0, d)

    amps = np.zeros(d.dim, dtype=complex)
    k = np.arange((d.dim + 1) // 2)
    log_c = (k * np.log(np.tanh(r)) + 0.5 * gammaln(2 * k + 1)
             - k * np.log(2.0) - gammaln(k + 1) - 0.5 * np.log(np.cosh(r)))
    amps[2 * k] = (-1.0) ** k * np.exp(log_c)

    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if tail >= TAIL_WARN:
        raise TruncationError(
            f"squeezing r={r:.4g} leaves tail weight {tail:.3g} beyond dim {d.dim}"
        )
    return PureState.normalized(amps, tail)


def css_state(alpha: complex, parity: Union[Parity, str], d: Union[FockDim, int]) -> PureState:
    """Normalized |alpha> + |-alpha> (even) or |alpha> - |-alpha> (odd)."""
    d = as_dim(d)
    parity = Parity(parity)
    _check_amplitude_fits(alpha, d)
    if parity is Parity.ODD and alpha == 0:
        raise ValueError("odd superposition with alpha = 0 is the zero vector")

    n = d.levels()
    amps = _coherent_series(complex(alpha), n)
    keep = (n % 2 == 0) if parity is Parity.EVEN else (n % 2 == 1)
    amps = np.where(keep, amps, 0.0)

    # Weight of the untruncated parity component: e^{-|a|^2} cosh|a|^2 or sinh|a|^2
    x = 2.0 * abs(alpha) ** 2
    full = 0.5 * (1.0 + np.exp(-x)) if parity is Parity.EVEN else -0.5 * np.expm1(-x)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)) / full)
    return PureState.normalized(amps, tail)
