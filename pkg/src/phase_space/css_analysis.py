"""Coherent-state-superposition analytics: nearest CSS, coherent ceilings, distinguishability."""
import logging
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..fock.constructors import css_state
from ..fock.functionals import annihilation, fidelity, mean_photon
from ..fock.states import DensityMatrix, Parity

logger = logging.getLogger(__name__)

ALPHA_XTOL = 1e-4
SCAN_POINTS = 61
DEGENERACY_TOL = 1e-9
ODD_ALPHA_FLOOR = 1e-3
BETA_FLOOR = 1e-8


@dataclass(frozen=True)
class CssFit:
    """Best-matching ideal CSS for a state."""
    alpha: complex
    parity: Parity
    fidelity: float
    degenerate: bool = False

    @property
    def magnitude(self) -> float:
        return float(abs(self.alpha))

    def __repr__(self):
        flag = " (degenerate optimum)" if self.degenerate else ""
        return f"CssFit({self.parity.value}, |alpha|={self.magnitude:.4f}, F={self.fidelity:.4f}){flag}"


def distinguishability_p0(alpha: float) -> float:
    """Probability 1 - exp(-2|alpha|^2) of telling |alpha> from |-alpha>."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return float(-np.expm1(-2.0 * alpha ** 2))


def min_alpha_for_distinguishability(p0: float) -> float:
    """Smallest |alpha| with distinguishability_p0(|alpha|) >= p0."""
    if not 0.0 <= p0 < 1.0:
        raise ValueError(f"p0 must be in [0, 1), got {p0}")
    return float(np.sqrt(-np.log1p(-p0) / 2.0))


def _coherent_overlap(alpha: float, beta: float, parity: Parity) -> float:
    sign = 1.0 if parity is Parity.EVEN else -1.0
    amp = np.exp(-0.5 * (beta - alpha) ** 2) + sign * np.exp(-0.5 * (beta + alpha) ** 2)
    norm = 2.0 * (1.0 + sign * np.exp(-2.0 * alpha ** 2))
    return float(amp ** 2 / norm)


def max_coherent_fidelity(alpha: float, parity: Union[Parity, str]) -> float:
    """
    max over beta of |<beta|CSS>|^2 for a CSS with real alpha > 0.

    Both |alpha> and |-alpha> lie on the real axis, so an imaginary part of
    beta only multiplies the overlap by exp(-Im(beta)^2/2) times a phase that
    cannot increase its modulus; the search runs over real beta >= 0.
    """
    parity = Parity(parity)
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")

    return _coherent_overlap(alpha, _best_coherent_beta(alpha, parity), parity)


def _best_coherent_beta(alpha: float, parity: Parity) -> float:
    """
    Root of d/dbeta log|<beta|CSS>| = 0, solved to machine precision.

    Even: beta = alpha tanh(alpha beta), with beta = 0 the maximum for alpha <= 1.
    Odd: beta = alpha coth(alpha beta), bracketed by (0, alpha + 1/alpha].
    """
    if parity is Parity.EVEN:
        if alpha ** 2 <= 1.0 + 1e-9:
            return 0.0
        return float(brentq(lambda b: b - alpha * np.tanh(alpha * b), BETA_FLOOR, alpha))
    return float(brentq(lambda b: b - alpha / np.tanh(alpha * b), BETA_FLOOR, alpha + 1.0 / alpha))


def _maximize_on_interval(objective: Callable[[float], float], lo: float,
                          hi: float) -> Tuple[float, float, bool]:
    """
    Coarse scan then bounded Brent refinement inside the bracketing cells.

    Returns (argmax, max, degenerate) for the negated objective.
    """
    xs = np.linspace(lo, hi, SCAN_POINTS)
    values = -np.array([objective(x) for x in xs])
    best = int(np.argmax(values))

    near = np.flatnonzero(values >= values[best] - DEGENERACY_TOL)
    if near.size > 1 and np.all(np.diff(near) == 1) and best in near:
        # flat optimum over an interval of the scan
        first = int(near[0])
        return float(xs[first]), float(values[first]), True

    left = xs[max(best - 1, 0)]
    right = xs[min(best + 1, len(xs) - 1)]
    result = minimize_scalar(objective, bounds=(left, right), method="bounded",
                             options={"xatol": ALPHA_XTOL})
    if -result.fun >= values[best]:
        return float(result.x), float(-result.fun), False
    return float(xs[best]), float(values[best]), False


def _alignment_phase(rho: DensityMatrix) -> float:
    """Phase phi with <a^2> = |<a^2>| e^{2 i phi}; a CSS at alpha e^{i phi} has the same <a^2> phase."""
    a = annihilation(rho.dim)
    second = np.trace(rho.elements @ a @ a)
    if abs(second) < 1e-12:
        return 0.0
    return float(np.angle(second) / 2.0)


def nearest_css(rho: DensityMatrix) -> CssFit:
    """
    Ideal even or odd CSS with the highest fidelity to rho.

    The state is rotated so <a^2> is real and positive, then |alpha| is
    searched on [0 or 1e-3, min(sqrt(2<n>) + 1, sqrt(dim/4))].
    """
    phi = _alignment_phase(rho)
    aligned = rho.rotated(-phi)
    dim = rho.dim

    upper = min(np.sqrt(2.0 * mean_photon(rho)) + 1.0, np.sqrt(dim.dim / 4.0))
    candidates = []
    for parity in (Parity.EVEN, Parity.ODD):
        lower = 0.0 if parity is Parity.EVEN else ODD_ALPHA_FLOOR

        def objective(a, parity=parity):
            return -fidelity(aligned, css_state(a, parity, dim))

        alpha, value, degenerate = _maximize_on_interval(objective, lower, upper)
        candidates.append(CssFit(alpha * np.exp(1j * phi), parity, value, degenerate))

    fit = max(candidates, key=lambda c: c.fidelity)
    if fit.degenerate:
        logger.warning("Nearest-CSS fidelity is flat in |alpha|; reporting the smallest, %s", fit)
    return fit
