"""Shared fixtures: small truncations and sample counts keep the fast suite fast."""
import pytest

from src.fock.constructors import coherent_state, css_state, fock_state
from src.fock.states import DensityMatrix, Parity
from src.homodyne.schedule import PhaseKind, PhaseSchedule
from src.optics.detectors import DetectorKind
from src.pipeline.config import config_from_dict, grid_for_dim

SMALL_DIM = 14


def small_config_dict(**changes):
    """Weakly squeezed one-photon APD run that finishes in seconds."""
    raw = {
        "label": "small-apd",
        "squeeze": {"V0_dB": -3.0, "gamma_s": 0.2},
        "herald": {
            "reflectivity_R": 0.05,
            "n_subtract": 1,
            "modal_purity_xi": 0.9,
            "detector": {"kind": DetectorKind.APD.value, "efficiency": 0.5},
        },
        "gamma_h": 0.1,
        "schedule": {"kind": "sawtooth", "cycles": 10},
        "n_samples": 3000,
        "mle": {"dim": SMALL_DIM, "max_iters": 400, "stop_delta": 1e-6},
        "bootstrap_n": 0,
        "seed": 7,
        "grid": grid_for_dim(SMALL_DIM, 41).to_dict(),
    }
    raw.update(changes)
    return raw


@pytest.fixture
def small_config():
    return config_from_dict(small_config_dict())


@pytest.fixture
def vacuum():
    return DensityMatrix.from_pure(fock_state(0, 10))


@pytest.fixture
def single_photon():
    return DensityMatrix.from_pure(fock_state(1, 10))


@pytest.fixture
def odd_css():
    return DensityMatrix.from_pure(css_state(1.32, Parity.ODD, 25))


@pytest.fixture
def weak_coherent():
    return DensityMatrix.from_pure(coherent_state(0.6, 8))


@pytest.fixture
def fixed_phase():
    return PhaseSchedule(PhaseKind.FIXED, phase=0.0)
