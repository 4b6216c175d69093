from enum import Enum
from typing import Dict, Optional

from ..fock.states import SqueezeParams
from ..homodyne.schedule import PhaseKind, PhaseSchedule
from ..optics.detectors import DetectorKind, DetectorModel
from ..optics.heralding import HeraldConfig
from ..tomo.mle import MleConfig
from .config import ExperimentConfig, grid_for_dim


class Preset(Enum):
    """Built-in experiment configurations."""

    ONE_PHOTON_APD = "one-photon-apd"        # Table 1, one-photon APD row
    TWO_PHOTON_APD = "two-photon-apd"        # Table 1, two-photon APDs row (coincidence)
    TWO_PHOTON_TES = "two-photon-tes"        # Table 1, two-photon TES row
    THREE_PHOTON_TES = "three-photon-tes"    # Table 1, three-photon TES row
    VACUUM_CHECK = "vacuum-check"            # no squeezing, no herald

# Source values shared by every experiment
V0_DB = -6.8          # minimum quadrature variance of the pure squeezed state
GAMMA_S = 0.36        # loss before subtraction (squeezing purity 0.64)
GAMMA_H = 0.15        # homodyne loss, 15 +/- 2 %
TES_EFFICIENCY = 0.85
TES_MAX_RESOLVED = 10

# Not given by the source; labeled assumptions
APD_EFFICIENCY = 0.50
TWO_PHOTON_REFLECTIVITY = 0.10

DEFAULT_SAMPLES = 100_000
THREE_PHOTON_SAMPLES = 1087      # three-photon events collected in the experiment

TABLE1_ROWS = {
    Preset.ONE_PHOTON_APD: "APD-1",
    Preset.TWO_PHOTON_APD: "APD-2",
    Preset.TWO_PHOTON_TES: "TES-2",
    Preset.THREE_PHOTON_TES: "TES-3",
}


def get_preset(name: str) -> Preset:
    try:
        return Preset(name)
    except ValueError:
        valid = ", ".join(p.value for p in Preset)
        raise ValueError(f"unknown preset {name!r}; choose from {valid}") from None


def get_table1_row(preset: Preset) -> Optional[str]:
    return TABLE1_ROWS.get(preset)


def _herald(preset: Preset) -> Optional[HeraldConfig]:
    if preset is Preset.ONE_PHOTON_APD:
        # R = 2.5 %, xi_1 = 0.91
        return HeraldConfig(0.025, DetectorModel(DetectorKind.APD, APD_EFFICIENCY), 1, 0.91)
    if preset is Preset.TWO_PHOTON_APD:
        # two APDs behind a 50/50 splitter, coincidence; xi_2,APD = 0.85
        det = DetectorModel(DetectorKind.MULTIPLEXED_APD, APD_EFFICIENCY, n_apds=2)
        return HeraldConfig(TWO_PHOTON_REFLECTIVITY, det, 2, 0.85)
    if preset is Preset.TWO_PHOTON_TES:
        # xi_2,TES = 0.62
        det = DetectorModel(DetectorKind.TES, TES_EFFICIENCY, max_resolved=TES_MAX_RESOLVED)
        return HeraldConfig(TWO_PHOTON_REFLECTIVITY, det, 2, 0.62)
    if preset is Preset.THREE_PHOTON_TES:
        # R = 20 %, xi_3 = 0.84
        det = DetectorModel(DetectorKind.TES, TES_EFFICIENCY, max_resolved=TES_MAX_RESOLVED)
        return HeraldConfig(0.20, det, 3, 0.84)
    return None


def get_preset_config(preset: Preset, dim: int = 30) -> ExperimentConfig:
    preset = Preset(preset)
    if preset is Preset.VACUUM_CHECK:
        squeeze = SqueezeParams(V0_dB=0.0, gamma_s=0.0)
    else:
        squeeze = SqueezeParams(V0_dB=V0_DB, gamma_s=GAMMA_S)

    three_photon = preset is Preset.THREE_PHOTON_TES
    return ExperimentConfig(
        squeeze=squeeze,
        herald=_herald(preset),
        gamma_h=GAMMA_H,
        schedule=PhaseSchedule(PhaseKind.SAWTOOTH, n_phases=0, cycles=20),
        n_samples=THREE_PHOTON_SAMPLES if three_photon else DEFAULT_SAMPLES,
        mle=MleConfig(dim=dim, gamma_h=GAMMA_H),
        bootstrap_n=1000 if three_photon else 100,
        seed=0,
        label=preset.value,
        grid=grid_for_dim(dim),
    )


def get_preset_description(preset: Preset) -> str:
    descriptions: Dict[Preset, str] = {
        Preset.ONE_PHOTON_APD: "Odd CSS: one photon subtracted, single APD click, R = 2.5 %",
        Preset.TWO_PHOTON_APD: "Even CSS: two photons, coincidence of two APDs behind 50/50 (R assumed 10 %)",
        Preset.TWO_PHOTON_TES: "Even CSS: two photons counted by the TES (R assumed 10 %)",
        Preset.THREE_PHOTON_TES: "Odd CSS: three photons counted by the TES, R = 20 %, 1087 events",
        Preset.VACUUM_CHECK: "Vacuum through the measurement chain (no squeezing, no herald)",
    }
    return descriptions.get(Preset(preset), "Unknown preset")
