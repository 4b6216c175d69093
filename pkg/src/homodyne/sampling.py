"""Inverse-CDF sampling of homodyne quadratures through a lossy detector."""
import logging
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ..fock.states import DensityMatrix
from ..optics.channels import LossChannel, apply_loss
from ..phase_space.quadratures import oscillator_eigenfunctions
from .dataset import QuadratureDataset, round_significant
from .schedule import PhaseSchedule, phases_for

logger = logging.getLogger(__name__)

GRID_POINTS = 8001
GRID_MARGIN = 3.0
CHUNK_SIZE = 65536
TAIL_FLAG = 1e-6


class QuadratureSampler:
    """
    Draws x from pr(x|theta) of the state after homodyne loss gamma_h.

    pr(x|theta) = h_0(x) + 2 Re sum_{d>=1} h_d(x) e^{-i d theta}, with
    h_d(x) = sum_n rho_{n+d,n} psi_{n+d}(x) psi_n(x). The cumulative
    integrals of every h_d are tabulated once on an x-grid, so any phase
    can be inverted by bisection on the same table.
    """

    def __init__(self, rho: DensityMatrix, gamma_h: float, grid_points: int = GRID_POINTS):
        if not 0.0 <= gamma_h < 1.0:
            raise ValueError(f"gamma_h must be in [0, 1), got {gamma_h}")
        self.state = apply_loss(rho, LossChannel(gamma_h))
        self.gamma_h = gamma_h
        dim = rho.dim.dim

        self.support = np.sqrt(2.0 * dim)
        half_width = self.support + GRID_MARGIN
        self.x_grid = np.linspace(-half_width, half_width, grid_points)

        psi = oscillator_eigenfunctions(self.x_grid, dim)
        mat = self.state.elements
        harmonics = np.zeros((grid_points, dim), dtype=complex)
        for d in range(dim):
            idx = np.arange(dim - d)
            harmonics[:, d] = (psi[:, idx + d] * psi[:, idx]) @ mat[idx + d, idx]
        self.cumulative = cumulative_trapezoid(harmonics, self.x_grid, axis=0, initial=0.0)

        inside = np.abs(self.x_grid) <= self.support
        h0 = harmonics[:, 0].real
        self.tail_mass = float(max(0.0, 1.0 - trapezoid(h0[inside], self.x_grid[inside])))
        if self.tail_mass > TAIL_FLAG:
            logger.warning("Quadrature distribution has mass %.3g beyond |x| = %.3g",
                           self.tail_mass, self.support)

    def cdf(self, x: np.ndarray, thetas: np.ndarray) -> np.ndarray:
        """Tabulated CDF, linearly interpolated in x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        thetas = np.broadcast_to(np.asarray(thetas, dtype=float), x.shape)
        pos = np.clip(np.searchsorted(self.x_grid, x) - 1, 0, self.x_grid.size - 2)
        frac = np.clip((x - self.x_grid[pos]) / (self.x_grid[1] - self.x_grid[0]), 0.0, 1.0)
        phases = self._phase_factors(thetas)
        lo = self._cdf_at(pos, phases)
        hi = self._cdf_at(pos + 1, phases)
        return lo + frac * (hi - lo)

    def _phase_factors(self, thetas: np.ndarray) -> np.ndarray:
        return np.exp(-1j * np.outer(thetas, np.arange(self.cumulative.shape[1])))

    def _cdf_at(self, idx: np.ndarray, phases: np.ndarray) -> np.ndarray:
        rows = self.cumulative[idx]
        return rows[:, 0].real + 2.0 * np.real(np.sum(rows[:, 1:] * phases[:, 1:], axis=1))

    def sample(self, thetas: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        phases = self._phase_factors(thetas)
        n = thetas.size
        last = np.full(n, self.x_grid.size - 1)
        target = rng.uniform(size=n) * self._cdf_at(last, phases)

        lo = np.zeros(n, dtype=int)
        hi = last.copy()
        while np.any(hi - lo > 1):
            mid = (lo + hi) // 2
            below = self._cdf_at(mid, phases) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)

        c_lo = self._cdf_at(lo, phases)
        c_hi = self._cdf_at(hi, phases)
        span = np.where(c_hi > c_lo, c_hi - c_lo, 1.0)
        frac = np.clip((target - c_lo) / span, 0.0, 1.0)
        return self.x_grid[lo] + frac * (self.x_grid[hi] - self.x_grid[lo])


class FixedPhaseSampler:
    """sampler(n, rng) -> n quadrature values at one phase."""

    def __init__(self, sampler: QuadratureSampler, theta: float):
        self.sampler = sampler
        self.theta = float(theta)

    @property
    def tail_mass(self) -> float:
        return self.sampler.tail_mass

    def cdf(self, x) -> np.ndarray:
        return self.sampler.cdf(x, self.theta)

    def __call__(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.sampler.sample(np.full(n, self.theta), rng)


def inverse_cdf_sampler(rho: DensityMatrix, theta: float, gamma_h: float) -> FixedPhaseSampler:
    return FixedPhaseSampler(QuadratureSampler(rho, gamma_h), theta)


def sample_at_phases(rho: DensityMatrix, gamma_h: float, thetas: np.ndarray, seed: int,
                     source_label: str = "",
                     sampler: Optional[QuadratureSampler] = None) -> QuadratureDataset:
    """
    Quadrature values at the given phases.

    Samples are drawn in fixed chunks with seeds spawned from `seed`, so the
    result does not depend on how the work is split.
    """
    thetas = np.asarray(thetas, dtype=float)
    sampler = sampler or QuadratureSampler(rho, gamma_h)
    n_chunks = -(-thetas.size // CHUNK_SIZE)
    children = np.random.SeedSequence(seed).spawn(n_chunks + 1)[1:]

    xs = np.empty(thetas.size)
    for c, child in enumerate(children):
        part = slice(c * CHUNK_SIZE, (c + 1) * CHUNK_SIZE)
        xs[part] = sampler.sample(thetas[part], np.random.default_rng(child))

    return QuadratureDataset(round_significant(thetas), round_significant(xs),
                             gamma_h, seed, source_label)


def sample_quadratures(rho: DensityMatrix, gamma_h: float, sched: PhaseSchedule,
                       n_samples: int, seed: int, source_label: str = "") -> QuadratureDataset:
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    phase_seed = np.random.SeedSequence(seed).spawn(1)[0]
    thetas = phases_for(sched, n_samples, np.random.default_rng(phase_seed))
    data = sample_at_phases(rho, gamma_h, thetas, seed, source_label)
    logger.info("Sampled %d quadratures (gamma_h=%.3f, seed=%d)", n_samples, gamma_h, seed)
    return data
