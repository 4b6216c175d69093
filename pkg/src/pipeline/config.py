"""
Run configuration: typed dataclasses and their JSON file form.

Every physical quantity must be spelled out in a config file; only numerical
settings (truncation, iteration limits, schedule, grid, seed) have defaults.
"""
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..fock.states import SqueezeParams
from ..homodyne.schedule import PhaseSchedule
from ..optics.detectors import DetectorKind, DetectorModel
from ..optics.heralding import HeraldConfig
from ..phase_space.wigner import PhaseSpaceGrid, outside_validity, validity_radius
from ..tomo.mle import MleConfig

DEFAULT_DIM = 30
DEFAULT_HALF_WIDTH = 5.0
DEFAULT_GRID_POINTS = 201


class ConfigError(ValueError):
    """Missing or inconsistent configuration entry."""


def grid_for_dim(dim: int, n_points: int = DEFAULT_GRID_POINTS) -> PhaseSpaceGrid:
    """Default +/-5 grid, shrunk when the truncation cannot support its corners."""
    half = min(DEFAULT_HALF_WIDTH, np.floor(100.0 * validity_radius(dim) / np.sqrt(2.0)) / 100.0)
    return PhaseSpaceGrid(-half, half, -half, half, n_points, n_points)


@dataclass(frozen=True)
class ExperimentConfig:
    squeeze: SqueezeParams
    herald: Optional[HeraldConfig]
    gamma_h: float
    schedule: PhaseSchedule
    n_samples: int
    mle: MleConfig
    bootstrap_n: int
    seed: int
    label: str
    grid: PhaseSpaceGrid = field(default_factory=PhaseSpaceGrid)

    def __post_init__(self):
        if not self.label:
            raise ConfigError("label must be nonempty")
        if not 0.0 <= self.gamma_h < 1.0:
            raise ConfigError(f"gamma_h must be in [0, 1), got {self.gamma_h}")
        if self.mle.gamma_h != self.gamma_h:
            raise ConfigError(
                f"mle.gamma_h={self.mle.gamma_h} differs from measurement gamma_h={self.gamma_h}"
            )
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.bootstrap_n != 0 and self.bootstrap_n < 2:
            raise ConfigError(f"bootstrap_n must be 0 or >= 2, got {self.bootstrap_n}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if outside_validity(self.grid.max_radius(), self.dim):
            raise ConfigError(
                f"grid reaches |q+ip|={self.grid.max_radius():.3g}, beyond what dim={self.dim} supports"
            )

    @property
    def dim(self) -> int:
        return self.mle.dim.dim


def with_overrides(config: ExperimentConfig, seed: Optional[int] = None,
                   resamples: Optional[int] = None, dim: Optional[int] = None,
                   samples: Optional[int] = None) -> ExperimentConfig:
    """Apply command-line overrides; changing dim refits the grid if needed."""
    changes: Dict[str, Any] = {}
    if seed is not None:
        changes["seed"] = seed
    if resamples is not None:
        changes["bootstrap_n"] = resamples
    if samples is not None:
        changes["n_samples"] = samples
    if dim is not None:
        changes["mle"] = replace(config.mle, dim=dim)
        if outside_validity(config.grid.max_radius(), dim):
            changes["grid"] = grid_for_dim(dim, config.grid.n_q)
    return replace(config, **changes)


def _require(section: Dict[str, Any], key: str, where: str) -> Any:
    if key not in section:
        raise ConfigError(f"missing required key '{where}{key}'")
    return section[key]


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    herald = None
    if config.herald is not None:
        det = config.herald.detector
        herald = {
            "reflectivity_R": config.herald.reflectivity_R,
            "n_subtract": config.herald.n_subtract,
            "modal_purity_xi": config.herald.modal_purity_xi,
            "detector": {
                "kind": det.kind.value,
                "efficiency": det.efficiency,
                "max_resolved": det.max_resolved,
                "n_apds": det.n_apds,
            },
        }
    return {
        "label": config.label,
        "squeeze": {"V0_dB": config.squeeze.V0_dB, "gamma_s": config.squeeze.gamma_s},
        "herald": herald,
        "gamma_h": config.gamma_h,
        "schedule": config.schedule.to_dict(),
        "n_samples": config.n_samples,
        "mle": {
            "dim": config.mle.dim.dim,
            "max_iters": config.mle.max_iters,
            "stop_delta": config.mle.stop_delta,
            "dilution": config.mle.dilution,
        },
        "bootstrap_n": config.bootstrap_n,
        "seed": config.seed,
        "grid": config.grid.to_dict(),
    }


def config_from_dict(raw: Dict[str, Any]) -> ExperimentConfig:
    squeeze_raw = _require(raw, "squeeze", "")
    squeeze = SqueezeParams(V0_dB=float(_require(squeeze_raw, "V0_dB", "squeeze.")),
                            gamma_s=float(_require(squeeze_raw, "gamma_s", "squeeze.")))
    gamma_h = float(_require(raw, "gamma_h", ""))

    herald_raw = _require(raw, "herald", "")
    herald = None
    if herald_raw is not None:
        det_raw = _require(herald_raw, "detector", "herald.")
        kind = DetectorKind(_require(det_raw, "kind", "herald.detector."))
        resolution = {}
        # a single APD has no resolution parameter
        if kind is DetectorKind.TES:
            resolution["max_resolved"] = int(_require(det_raw, "max_resolved", "herald.detector."))
        elif kind is DetectorKind.MULTIPLEXED_APD:
            resolution["n_apds"] = int(_require(det_raw, "n_apds", "herald.detector."))
        detector = DetectorModel(
            kind=kind,
            efficiency=float(_require(det_raw, "efficiency", "herald.detector.")),
            **resolution,
        )
        herald = HeraldConfig(
            reflectivity_R=float(_require(herald_raw, "reflectivity_R", "herald.")),
            detector=detector,
            n_subtract=int(_require(herald_raw, "n_subtract", "herald.")),
            modal_purity_xi=float(_require(herald_raw, "modal_purity_xi", "herald.")),
        )

    mle_raw = raw.get("mle", {})
    dim = int(mle_raw.get("dim", DEFAULT_DIM))
    mle = MleConfig(
        dim=dim,
        gamma_h=gamma_h,
        max_iters=int(mle_raw.get("max_iters", 2000)),
        stop_delta=float(mle_raw.get("stop_delta", 1e-9)),
        dilution=float(mle_raw.get("dilution", 1.0)),
    )

    schedule_raw = raw.get("schedule", {})
    schedule = PhaseSchedule(
        kind=schedule_raw.get("kind", "sawtooth"),
        n_phases=int(schedule_raw.get("n_phases", 0)),
        cycles=int(schedule_raw.get("cycles", 20)),
        phase=float(schedule_raw.get("phase", 0.0)),
    )

    grid = PhaseSpaceGrid(**raw["grid"]) if "grid" in raw else grid_for_dim(dim)

    return ExperimentConfig(
        squeeze=squeeze,
        herald=herald,
        gamma_h=gamma_h,
        schedule=schedule,
        n_samples=int(raw.get("n_samples", 100_000)),
        mle=mle,
        bootstrap_n=int(raw.get("bootstrap_n", 0)),
        seed=int(raw.get("seed", 0)),
        label=str(_require(raw, "label", "")),
        grid=grid,
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    with open(path) as f:
        return config_from_dict(json.load(f))


def save_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    """Write the fully resolved configuration, defaults included."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(config_to_dict(config), f, indent=2)
        f.write("\n")
    return path
