"""Wigner function by displaced parity, with grid evaluation and minimum search."""
import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from ..fock.states import DensityMatrix, TruncationError

logger = logging.getLogger(__name__)

POINT_CHUNK = 4096
RADIUS_SLACK = 1e-9


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Rectangular (q, p) grid; axes include both end points."""
    q_min: float = -5.0
    q_max: float = 5.0
    p_min: float = -5.0
    p_max: float = 5.0
    n_q: int = 201
    n_p: int = 201

    def __post_init__(self):
        for name in ("q_min", "q_max", "p_min", "p_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("n_q", "n_p"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if not self.q_max > self.q_min or not self.p_max > self.p_min:
            raise ValueError(f"grid ranges must be increasing, got {self}")
        if self.n_q < 3 or self.n_p < 3:
            raise ValueError(f"grid needs at least 3 points per axis, got {self.n_q}x{self.n_p}")

    @property
    def q_axis(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def p_axis(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.n_q - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """(Q, P) arrays of shape (n_p, n_q)."""
        return np.meshgrid(self.q_axis, self.p_axis)

    def max_radius(self) -> float:
        return float(np.hypot(max(abs(self.q_min), abs(self.q_max)),
                              max(abs(self.p_min), abs(self.p_max))))

    def to_dict(self) -> dict:
        return {"q_min": self.q_min, "q_max": self.q_max, "n_q": self.n_q,
                "p_min": self.p_min, "p_max": self.p_max, "n_p": self.n_p}


def validity_radius(dim: int) -> float:
    """Largest |q + ip| at which the truncated displaced parity is trusted."""
    return float(np.sqrt(2.0 * dim))


def outside_validity(radius, dim: int):
    # slack absorbs rounding when a grid corner sits exactly on the limit
    return np.asarray(radius) > validity_radius(dim) + RADIUS_SLACK


def _displaced_parity(rho: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """
    Tr[rho D(beta) Pi] for a flat array of displacements.

    Columns of D are generated one at a time:
      <m|D|0> = e^{-|beta|^2/2} beta^m / sqrt(m!)
      <m|D|n> = (sqrt(m) <m-1|D|n-1> - conj(beta) <m|D|n-1>) / sqrt(n)
    """
    dim = rho.shape[0]
    sqrt_m = np.sqrt(np.arange(dim))
    col = np.empty((beta.size, dim), dtype=complex)
    col[:, 0] = np.exp(-0.5 * np.abs(beta) ** 2)
    for m in range(1, dim):
        col[:, m] = col[:, m - 1] * beta / sqrt_m[m]

    total = col @ rho[0, :]
    for n in range(1, dim):
        shifted = np.zeros_like(col)
        shifted[:, 1:] = col[:, :-1] * sqrt_m[1:]
        col = (shifted - np.conj(beta)[:, None] * col) / np.sqrt(n)
        total += (-1) ** n * (col @ rho[n, :])
    return total


def wigner(rho: DensityMatrix, q: Union[float, np.ndarray],
           p: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    W(q,p) = (1/pi) sum_jk rho_jk (-1)^j <k|D(2 alpha)|j>, alpha = (q + ip)/sqrt(2).

    Normalized so that the integral over dq dp is 1.
    """
    q_arr, p_arr = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
    shape = q_arr.shape
    radius = np.hypot(q_arr, p_arr)
    limit = validity_radius(rho.dim.dim)
    if np.any(outside_validity(radius, rho.dim.dim)):
        raise TruncationError(
            f"point at |q+ip|={radius.max():.3g} outside truncation validity {limit:.3g}"
        )

    beta = (np.sqrt(2.0) * (q_arr + 1j * p_arr)).ravel()
    values = np.empty(beta.size)
    for start in range(0, beta.size, POINT_CHUNK):
        chunk = _displaced_parity(rho.elements, beta[start:start + POINT_CHUNK])
        residue = np.max(np.abs(chunk.imag)) if chunk.size else 0.0
        if residue > 1e-10:
            logger.debug("Wigner imaginary residue %.3g", residue)
        values[start:start + POINT_CHUNK] = chunk.real / np.pi

    values = values.reshape(shape)
    return float(values) if values.ndim == 0 else values


def wigner_on_grid(rho: DensityMatrix, grid: PhaseSpaceGrid) -> np.ndarray:
    """Values with shape (n_p, n_q); row i is p_axis[i]."""
    q_mesh, p_mesh = grid.mesh()
    return wigner(rho, q_mesh, p_mesh)


def _quadratic_fit(patch: np.ndarray) -> np.ndarray:
    """Least-squares c0 + c1 u + c2 v + c3 u^2 + c4 uv + c5 v^2 over a 3x3 patch."""
    v, u = np.mgrid[-1:2, -1:2]
    u, v = u.ravel().astype(float), v.ravel().astype(float)
    design = np.column_stack([np.ones(9), u, v, u ** 2, u * v, v ** 2])
    coeffs, *_ = np.linalg.lstsq(design, patch.ravel(), rcond=None)
    return coeffs


def wigner_min(rho: DensityMatrix, grid: PhaseSpaceGrid) -> Tuple[float, float, float]:
    """
    Grid minimum refined by a bi-quadratic fit around the minimal cell.

    The refined location is kept only if the fit has a proper minimum within
    one cell of the grid point; the returned value is W evaluated there.
    """
    values = wigner_on_grid(rho, grid)
    i, j = np.unravel_index(np.argmin(values), values.shape)
    q_axis, p_axis = grid.q_axis, grid.p_axis
    best = (float(values[i, j]), float(q_axis[j]), float(p_axis[i]))

    ci = int(np.clip(i, 1, grid.n_p - 2))
    cj = int(np.clip(j, 1, grid.n_q - 2))
    c = _quadratic_fit(values[ci - 1:ci + 2, cj - 1:cj + 2])
    hessian = np.array([[2 * c[3], c[4]], [c[4], 2 * c[5]]])
    if np.all(np.linalg.eigvalsh(hessian) > 0):
        du, dv = np.linalg.solve(hessian, -c[1:3])
        if abs(du) <= 1.0 and abs(dv) <= 1.0:
            q_star = q_axis[cj] + du * grid.dq
            p_star = p_axis[ci] + dv * grid.dp
            w_star = wigner(rho, q_star, p_star)
            if w_star < best[0]:
                best = (float(w_star), float(q_star), float(p_star))

    return best
