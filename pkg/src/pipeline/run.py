"""
End-to-end orchestration: forward model, synthetic homodyne data, MLE
reconstruction, analysis, bootstrap and artifact export.
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Union

import numpy as np
import pandas as pd

from ..evaluation.metrics import ReconstructionReport, analyze_state, check_report_consistency, state_digest
from ..evaluation.table1 import COLUMNS, compare_to_table1, unexpected_failures
from ..fock.constructors import css_state
from ..fock.states import DensityMatrix
from ..homodyne.dataset import QuadratureDataset, save_dataset
from ..homodyne.sampling import sample_quadratures
from ..optics.channels import prepare_squeezed
from ..optics.heralding import background_state, herald_subtract, modal_mixture
from ..phase_space.wigner import PhaseSpaceGrid, wigner_on_grid
from ..tomo.bootstrap import BootstrapReport, bootstrap
from ..tomo.mle import MleResult, mle_reconstruct
from .config import ExperimentConfig, save_config, with_overrides
from .io import load_report, save_bootstrap, save_report, save_state, save_wigner_grid
from .presets import TABLE1_ROWS, get_preset_config

logger = logging.getLogger(__name__)

STAGES = ("forward", "sample", "reconstruct", "analyze", "bootstrap", "export")

# two-photon heralding rate, TES over APD coincidences
REPORTED_HERALD_RATIO = 3.0


class PipelineStageError(RuntimeError):
    """A pipeline stage failed; `stage` names it and the cause is chained."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


@contextmanager
def stage(name: str) -> Iterator[None]:
    logger.info("Stage %s", name)
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as exc:
        raise PipelineStageError(name, exc) from exc


@dataclass
class ForwardResult:
    state: DensityMatrix
    herald_prob: Optional[float] = None


@dataclass
class PipelineResult:
    config: ExperimentConfig
    forward: ForwardResult
    dataset: QuadratureDataset
    mle: MleResult
    report: ReconstructionReport
    bootstrap: Optional[BootstrapReport] = None
    paths: Dict[str, Path] = field(default_factory=dict)
    failed_checks: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failed_checks

    def __repr__(self):
        status = "all checks passed" if self.passed else f"{len(self.failed_checks)} checks FAILED"
        return f"""Pipeline Result ({self.config.label}):
  Samples: {len(self.dataset):,}
  MLE: {self.mle.iterations:,} iterations ({self.mle.termination})
  W_min: {self.report.w_min:+.4f}   <n>: {self.report.mean_photon:.3f}
  Nearest CSS: |alpha| = {self.report.alpha:.3f}, F = {self.report.fidelity:.3f}
  Status: {status}
"""


def simulate_forward(config: ExperimentConfig) -> ForwardResult:
    """Lossy squeezed vacuum, heralded subtraction, then mixing with the unheralded background."""
    rho_s = prepare_squeezed(config.squeeze, config.dim)
    if config.herald is None:
        return ForwardResult(rho_s)

    hc = config.herald
    rho_h, prob = herald_subtract(rho_s, hc)
    rho = modal_mixture(rho_h, background_state(rho_s, hc.reflectivity_R), hc.modal_purity_xi)
    logger.info("Forward model %s: herald probability %.4g", config.label, prob)
    return ForwardResult(rho, prob)


def forward_model(config: ExperimentConfig) -> DensityMatrix:
    return simulate_forward(config).state


def export_wigner_grid(rho: DensityMatrix, grid: PhaseSpaceGrid,
                       path: Union[str, Path]) -> Path:
    return save_wigner_grid(wigner_on_grid(rho, grid), grid, state_digest(rho), path)


def compare_herald_rates(config_a: ExperimentConfig, config_b: ExperimentConfig) -> float:
    """Herald probability of config_a divided by that of config_b."""
    if config_a.herald is None or config_b.herald is None:
        raise ValueError("both configurations need a herald to compare rates")
    return simulate_forward(config_a).herald_prob / simulate_forward(config_b).herald_prob


def bootstrap_seed(seed: int) -> int:
    # distinct stream from the sampling seed tree
    return int(np.random.SeedSequence([seed, 1]).generate_state(1, dtype=np.uint64)[0])


def run_pipeline(config: ExperimentConfig, out_dir: Union[str, Path],
                 workers: int = 1, progress: bool = False) -> PipelineResult:
    """
    Run every stage for one configuration and write its artifacts to out_dir.

    Identical config and seed give byte-identical dataset and report values.
    Consistency problems (report vs stored state, file round trips) are
    collected in `failed_checks` rather than raised.
    """
    out_dir = Path(out_dir)
    paths: Dict[str, Path] = {}
    failed: List[str] = []

    with stage("export"):
        paths["config"] = save_config(config, out_dir / "config.json")

    with stage("forward"):
        forward = simulate_forward(config)

    with stage("sample"):
        data = sample_quadratures(forward.state, config.gamma_h, config.schedule,
                                  config.n_samples, config.seed, config.label)

    with stage("reconstruct"):
        mle = mle_reconstruct(data, replace(config.mle, progress=progress))

    with stage("analyze"):
        report = analyze_state(mle.state, config.label, config.grid,
                               herald_prob=forward.herald_prob, diagnostics=mle.diagnostics())
        failed += [f"report: {p}" for p in check_report_consistency(report)]

    boot = None
    if config.bootstrap_n > 0:
        with stage("bootstrap"):
            boot = bootstrap(mle.state, data, config.bootstrap_n, config.mle,
                             bootstrap_seed(config.seed), grid=config.grid,
                             point_report=report, workers=workers, progress=progress)

    with stage("export"):
        paths["state_forward"] = save_state(forward.state, out_dir / "state_forward.json")
        paths["dataset"] = save_dataset(data, out_dir / "dataset.csv")
        paths["state_mle"] = save_state(mle.state, out_dir / "state_mle.json")
        paths["report"] = save_report(report, out_dir / "report.json")
        paths["wigner"] = export_wigner_grid(mle.state, config.grid, out_dir / "wigner.csv")
        ideal = DensityMatrix.from_pure(css_state(report.css.alpha, report.parity, config.dim))
        paths["wigner_ideal_css"] = export_wigner_grid(ideal, config.grid,
                                                       out_dir / "wigner_ideal_css.csv")
        if boot is not None:
            paths["bootstrap"] = save_bootstrap(boot, out_dir / "bootstrap.json")

        reread = load_report(paths["report"])
        failed += [f"report file: {p}" for p in check_report_consistency(reread)]

    for problem in failed:
        logger.warning("%s: %s", config.label, problem)
    return PipelineResult(config, forward, data, mle, report, boot, paths, failed)


def reproduce_table1(out_dir: Union[str, Path], samples: Optional[int] = None,
                     resamples: Optional[int] = None, dim: Optional[int] = None,
                     seed: Optional[int] = None, workers: int = 1,
                     progress: bool = False) -> pd.DataFrame:
    """
    Run every preset that has a Table-1 row and compare against the published values.

    Writes table1.csv to out_dir. Consistency failures of a run appear as
    extra rows with metric "report_consistency"; the TES/APD two-photon
    herald-rate ratio is recorded as an unchecked remark row.
    """
    out_dir = Path(out_dir)
    frames = []
    herald_probs: Dict[str, float] = {}

    for preset, row in TABLE1_ROWS.items():
        config = with_overrides(get_preset_config(preset), seed=seed, resamples=resamples,
                                dim=dim, samples=samples)
        result = run_pipeline(config, out_dir / preset.value, workers=workers, progress=progress)
        herald_probs[row] = result.forward.herald_prob
        frames.append(compare_to_table1(row, result.report, result.bootstrap))
        for problem in result.failed_checks:
            frames.append(pd.DataFrame([{
                "row": row, "metric": "report_consistency", "published": np.nan, "model": np.nan,
                "abs_delta": np.nan, "tolerance": np.nan, "band_ok": None, "passed": False,
                "known_gap": False,
            }], columns=COLUMNS))
            logger.warning("%s: %s", row, problem)

    ratio = herald_probs["TES-2"] / herald_probs["APD-2"]
    frames.append(pd.DataFrame([{
        "row": "remark", "metric": "herald_rate_ratio_TES2_APD2",
        "published": REPORTED_HERALD_RATIO, "model": ratio,
        "abs_delta": abs(ratio - REPORTED_HERALD_RATIO), "tolerance": np.nan,
        "band_ok": None, "passed": True, "known_gap": False,
    }], columns=COLUMNS))

    table = pd.concat(frames, ignore_index=True)
    out_dir.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_dir / "table1.csv", index=False)
    n_failed = int((~table["passed"].astype(bool)).sum())
    logger.info("Table 1 reproduced: %d of %d checks failed, %d outside the known model gaps",
                n_failed, len(table), len(unexpected_failures(table)))
    return table
