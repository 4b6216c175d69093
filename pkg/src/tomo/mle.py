"""
Maximum-likelihood density-matrix reconstruction from unbinned homodyne data.

Each sample j contributes the loss-smeared POVM element
Pi_j = Lambda^dag(|x_theta><x_theta|). Rather than storing N dim x dim
elements, the iteration works through the channel/adjoint duality:

    Tr(rho Pi_j) = <x_theta|Lambda(rho)|x_theta>
    R(rho)       = Lambda^dag( (1/N) sum_j |x_theta><x_theta| / p_j )

so only the N x dim table of quadrature eigenvector components is cached.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Union

import numpy as np
from tqdm import tqdm

from ..fock.functionals import state_fidelity
from ..fock.states import DensityMatrix, FockDim, as_dim
from ..homodyne.dataset import QuadratureDataset
from ..optics.channels import LossChannel, loss_adjoint, loss_map
from ..phase_space.css_analysis import nearest_css
from ..phase_space.quadratures import quadrature_vectors

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-300
MIN_DILUTION_RATIO = 1e-4
TERMINATIONS = ("stop_delta", "max_iters", "stalled")


@dataclass(frozen=True)
class MleConfig:
    dim: FockDim
    gamma_h: float
    max_iters: int = 2000
    stop_delta: float = 1e-9     # per-sample log-likelihood gain
    dilution: float = 1.0
    patience: int = 10           # consecutive small gains before stopping
    progress: bool = False

    def __post_init__(self):
        object.__setattr__(self, "dim", as_dim(self.dim))
        if not 0.0 <= self.gamma_h < 1.0:
            raise ValueError(f"gamma_h must be in [0, 1), got {self.gamma_h}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.stop_delta <= 0:
            raise ValueError(f"stop_delta must be > 0, got {self.stop_delta}")
        if not 0.0 < self.dilution <= 1.0:
            raise ValueError(f"dilution must be in (0, 1], got {self.dilution}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")

    @property
    def channel(self) -> LossChannel:
        return LossChannel(self.gamma_h)


@dataclass
class MleResult:
    """Reconstructed state plus the diagnostics of the run that produced it."""
    state: DensityMatrix
    loglikelihood: float
    iterations: int
    termination: str
    floored_samples: int = 0
    final_dilution: float = 1.0
    history: List[float] = field(default_factory=list, repr=False)

    def diagnostics(self) -> Dict[str, Union[int, float, str]]:
        return {
            "iterations": self.iterations,
            "termination": self.termination,
            "loglikelihood": self.loglikelihood,
            "floored_samples": self.floored_samples,
            "final_dilution": self.final_dilution,
        }

    def __repr__(self):
        return f"""MLE Reconstruction:
  Iterations: {self.iterations:,} ({self.termination})
  Log-likelihood: {self.loglikelihood:.6f}
  Floored samples: {self.floored_samples}
"""


def povm_element(theta: float, x: float, cfg: MleConfig) -> np.ndarray:
    """Pi(x, theta) = Lambda^dag_{gamma_h}(|x_theta><x_theta|), a density in x."""
    v = quadrature_vectors(theta, x, cfg.dim)[0]
    return loss_adjoint(np.outer(v, v.conj()), cfg.channel)


class _LikelihoodModel:
    """Cached eigenvector table for one dataset."""

    def __init__(self, data: QuadratureDataset, cfg: MleConfig):
        self.cfg = cfg
        self.n = len(data)
        self.vectors = quadrature_vectors(data.thetas, data.xs, cfg.dim)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        lossy = loss_map(rho, self.cfg.channel) if self.cfg.gamma_h > 0 else rho
        v = self.vectors
        return np.real(np.sum(v.conj() * (v @ lossy.T), axis=1))

    def floored(self, probs: np.ndarray):
        low = probs < PROB_FLOOR
        return np.where(low, PROB_FLOOR, probs), int(np.count_nonzero(low))

    def loglik(self, rho: np.ndarray) -> float:
        probs, _ = self.floored(self.probabilities(rho))
        return float(np.sum(np.log(probs)))

    def r_operator(self, probs: np.ndarray) -> np.ndarray:
        v = self.vectors
        weighted = (v.T / probs) @ v.conj() / self.n
        if self.cfg.gamma_h > 0:
            weighted = loss_adjoint(weighted, self.cfg.channel)
        return weighted


def loglikelihood(rho: DensityMatrix, data: QuadratureDataset, cfg: MleConfig) -> float:
    """Sum of ln Tr(rho Pi_j); -inf when any sample is impossible under rho."""
    model = _LikelihoodModel(data, cfg)
    probs = model.probabilities(rho.elements)
    if np.any(probs <= 0.0):
        return float("-inf")
    return float(np.sum(np.log(probs)))


def _sandwich(rho: np.ndarray, r_op: np.ndarray, eps: float) -> np.ndarray:
    step = (1.0 - eps) * np.eye(rho.shape[0]) + eps * r_op
    out = step @ rho @ step.conj().T
    out = 0.5 * (out + out.conj().T)
    return out / np.real(np.trace(out))


def mle_reconstruct(data: QuadratureDataset, cfg: MleConfig,
                    initial: Optional[DensityMatrix] = None) -> MleResult:
    """
    Diluted R rho R iteration with backtracking.

    Each iteration starts at eps = cfg.dilution and halves it until the
    log-likelihood does not decrease. The run stops after `patience`
    consecutive accepted steps whose per-sample gain is below stop_delta, at
    max_iters, or when no step size down to dilution * 1e-4 is accepted.
    """
    model = _LikelihoodModel(data, cfg)
    rho = initial.to_array() if initial is not None else np.eye(cfg.dim.dim, dtype=complex) / cfg.dim.dim

    probs, floored = model.floored(model.probabilities(rho))
    ll = float(np.sum(np.log(probs)))
    history = [ll]
    total_floored = floored
    eps_min = cfg.dilution * MIN_DILUTION_RATIO
    small_steps = 0
    termination = "max_iters"
    eps = cfg.dilution
    iterations = 0

    for iterations in tqdm(range(1, cfg.max_iters + 1), desc="MLE", disable=not cfg.progress):
        r_op = model.r_operator(probs)
        eps = cfg.dilution
        while True:
            candidate = _sandwich(rho, r_op, eps)
            cand_probs, cand_floored = model.floored(model.probabilities(candidate))
            cand_ll = float(np.sum(np.log(cand_probs)))
            if cand_ll >= ll:
                break
            eps /= 2.0
            if eps < eps_min:
                break

        if cand_ll < ll:
            termination = "stalled"
            iterations -= 1
            break

        if logger.isEnabledFor(logging.DEBUG):
            smallest = np.linalg.eigvalsh(candidate)[0]
            assert smallest > -1e-8, f"MLE iterate lost positivity ({smallest:.3g})"
            logger.debug("iter %d: ll=%.6f eps=%.3g", iterations, cand_ll, eps)

        gain = (cand_ll - ll) / model.n
        rho, probs, ll = candidate, cand_probs, cand_ll
        history.append(ll)
        if cand_floored:
            total_floored = max(total_floored, cand_floored)

        small_steps = small_steps + 1 if gain < cfg.stop_delta else 0
        if small_steps >= cfg.patience:
            termination = "stop_delta"
            break

    if total_floored:
        logger.warning("%d samples had probability below %.0e and were floored",
                       total_floored, PROB_FLOOR)
    if termination == "max_iters":
        logger.warning("MLE stopped at max_iters=%d without meeting stop_delta", cfg.max_iters)
    else:
        logger.info("MLE finished after %d iterations (%s)", iterations, termination)

    return MleResult(
        state=DensityMatrix.normalized(rho),
        loglikelihood=ll,
        iterations=iterations,
        termination=termination,
        floored_samples=total_floored,
        final_dilution=eps,
        history=history,
    )


def gamma_h_sensitivity(data: QuadratureDataset, cfg: MleConfig,
                        delta: float = 0.02) -> Dict[str, object]:
    """
    Reconstruct with gamma_h - delta, gamma_h and gamma_h + delta and report
    how far the nearest-CSS fidelity moves.
    """
    results = {}
    for g in (cfg.gamma_h - delta, cfg.gamma_h, cfg.gamma_h + delta):
        g = float(np.clip(g, 0.0, 0.999))
        state = mle_reconstruct(data, replace(cfg, gamma_h=g)).state
        results[g] = (state, nearest_css(state))

    gammas = sorted(results)
    fidelities = [results[g][1].fidelity for g in gammas]
    nominal = results[float(np.clip(cfg.gamma_h, 0.0, 0.999))]
    return {
        "gamma_h": gammas,
        "fidelity": fidelities,
        "alpha": [results[g][1].magnitude for g in gammas],
        "max_shift": float(max(abs(f - nominal[1].fidelity) for f in fidelities)),
        "state_fidelity_to_nominal": [state_fidelity(results[g][0], nominal[0]) for g in gammas],
    }
