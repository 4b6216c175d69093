"""Parametric bootstrap: resample from the point estimate, re-reconstruct, take percentiles."""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional

import numpy as np
from tqdm import tqdm

from ..evaluation.metrics import ReconstructionReport, analyze_state
from ..fock.functionals import purity
from ..fock.states import DensityMatrix
from ..homodyne.dataset import QuadratureDataset
from ..homodyne.sampling import QuadratureSampler, sample_at_phases
from ..phase_space.wigner import PhaseSpaceGrid
from .mle import MleConfig, mle_reconstruct

logger = logging.getLogger(__name__)

LOWER_PERCENTILE = 16
UPPER_PERCENTILE = 84
METRICS = ("fidelity", "alpha", "mean_photon", "w_min")


@dataclass(frozen=True)
class MetricInterval:
    """Point value with 16th/84th percentile band, quoted as point -(point-L) +(U-point)."""
    lower: float
    point: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower percentile {self.lower} above upper {self.upper}")

    @property
    def minus(self) -> float:
        return self.point - self.lower

    @property
    def plus(self) -> float:
        return self.upper - self.point

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def __str__(self):
        return f"{self.point:.3f} -{self.minus:.3f}/+{self.plus:.3f}"


@dataclass
class BootstrapReport:
    point: ReconstructionReport
    resamples: int
    intervals: Dict[str, MetricInterval]
    excluded: int
    point_purity: float
    mean_resample_purity: float
    resample_purity_std: float

    @property
    def purity_bias_sigma(self) -> float:
        """(point purity - mean resample purity) in units of its standard error."""
        used = self.resamples - self.excluded
        stderr = self.resample_purity_std / np.sqrt(max(used, 1))
        if stderr == 0:
            return float("inf") if self.point_purity > self.mean_resample_purity else 0.0
        return float((self.point_purity - self.mean_resample_purity) / stderr)

    def __repr__(self):
        lines = [f"Bootstrap Report ({self.point.label}, {self.resamples} resamples, "
                 f"{self.excluded} excluded):"]
        for name in METRICS:
            lines.append(f"  {name:12} {self.intervals[name]}")
        lines.append(f"  purity: point {self.point_purity:.4f}, resample mean "
                     f"{self.mean_resample_purity:.4f} ({self.purity_bias_sigma:.1f} sigma)")
        return "\n".join(lines) + "\n"


def _resample_seeds(seed: int, n: int) -> List[int]:
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def _run_resample(task, sampler: Optional[QuadratureSampler] = None) -> Dict[str, object]:
    point_estimate, thetas, gamma_h, cfg, grid, resample_seed, label = task
    data = sample_at_phases(point_estimate, gamma_h, thetas, resample_seed, label, sampler)
    result = mle_reconstruct(data, cfg)
    report = analyze_state(result.state, label, grid)
    out = report.metrics()
    out["purity"] = purity(result.state)
    out["termination"] = result.termination
    return out


def bootstrap(point_estimate: DensityMatrix, data_template: QuadratureDataset, n_resamples: int,
              cfg: MleConfig, seed: int, grid: Optional[PhaseSpaceGrid] = None,
              point_report: Optional[ReconstructionReport] = None,
              workers: int = 1, progress: bool = False) -> BootstrapReport:
    """
    Draw n_resamples datasets from point_estimate at the template's recorded
    phases (through gamma_h), reconstruct each and collect Table-1 metrics.

    Resamples that ran into max_iters are left out of the percentiles and
    counted in `excluded`.
    """
    if n_resamples < 2:
        raise ValueError(f"n_resamples must be >= 2, got {n_resamples}")
    grid = grid or PhaseSpaceGrid()
    point_report = point_report or analyze_state(point_estimate, data_template.source_label, grid)

    cfg = replace(cfg, progress=False)
    tasks = [(point_estimate, data_template.thetas, data_template.gamma_h, cfg, grid, s,
              f"resample-{i}")
             for i, s in enumerate(_resample_seeds(seed, n_resamples))]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(tqdm(pool.map(_run_resample, tasks), total=n_resamples,
                                 desc="Bootstrap", disable=not progress))
    else:
        # workers build their own CDF tables; the sequential path shares one
        sampler = QuadratureSampler(point_estimate, data_template.gamma_h)
        outcomes = [_run_resample(t, sampler)
                    for t in tqdm(tasks, desc="Bootstrap", disable=not progress)]

    kept = [o for o in outcomes if o["termination"] != "max_iters"]
    excluded = n_resamples - len(kept)
    if excluded:
        logger.warning("%d of %d resamples hit max_iters and are excluded", excluded, n_resamples)
    if len(kept) < 2:
        raise ValueError(f"only {len(kept)} resamples converged; cannot form percentiles")

    point_metrics = point_report.metrics()
    intervals = {}
    for name in METRICS:
        values = np.sort([o[name] for o in kept])
        lower, upper = np.percentile(values, [LOWER_PERCENTILE, UPPER_PERCENTILE])
        intervals[name] = MetricInterval(float(lower), point_metrics[name], float(upper))

    purities = np.array([o["purity"] for o in kept])
    report = BootstrapReport(
        point=point_report,
        resamples=n_resamples,
        intervals=intervals,
        excluded=excluded,
        point_purity=purity(point_estimate),
        mean_resample_purity=float(np.mean(purities)),
        resample_purity_std=float(np.std(purities, ddof=1)),
    )
    logger.info("Bootstrap finished: %s", report.intervals["fidelity"])
    return report
