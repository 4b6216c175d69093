"""Tests for the loss-aware maximum-likelihood reconstruction."""
import numpy as np
import pytest

from src.fock.constructors import fock_state
from src.fock.functionals import fidelity, state_fidelity, trace_distance
from src.fock.states import DensityMatrix
from src.homodyne.dataset import QuadratureDataset
from src.homodyne.sampling import sample_quadratures
from src.homodyne.schedule import PhaseKind, PhaseSchedule
from src.optics.channels import LossChannel, apply_loss, loss_adjoint
from src.phase_space.quadratures import oscillator_eigenfunctions, quad_pdf, quadrature_vectors
from src.phase_space.wigner import wigner
from src.pipeline.presets import TABLE1_ROWS, Preset, get_preset_config
from src.pipeline.run import forward_model
from src.tomo.mle import MleConfig, gamma_h_sensitivity, loglikelihood, mle_reconstruct, povm_element

RANDOM_PHASES = PhaseSchedule(PhaseKind.UNIFORM_RANDOM)


def vacuum_data(n=4000, gamma_h=0.1, seed=21):
    return sample_quadratures(DensityMatrix.from_pure(fock_state(0, 6)), gamma_h,
                              RANDOM_PHASES, n, seed, "vacuum")


def test_povm_is_projector_without_loss():
    """At gamma_h = 0 the POVM element is the rank-1 projector on |x_theta>."""
    cfg = MleConfig(dim=8, gamma_h=0.0)
    pi = povm_element(0.7, 0.4, cfg)
    assert np.linalg.matrix_rank(pi, tol=1e-10) == 1
    v = quadrature_vectors(0.7, 0.4, 8)[0]
    assert np.allclose(pi, np.outer(v, v.conj()))


def test_povm_complete_loss():
    """Total loss leaves only the vacuum component: psi_0(x)^2 times the identity."""
    v = quadrature_vectors(0.2, 0.9, 6)[0]
    out = loss_adjoint(np.outer(v, v.conj()), LossChannel(1.0))
    psi0 = oscillator_eigenfunctions(0.9, 6)[0, 0]
    assert np.allclose(out, psi0 ** 2 * np.eye(6))


def test_povm_matches_lossy_density():
    """Tr(rho Pi) equals the quadrature density of the state after loss."""
    rho = DensityMatrix.from_pure(fock_state(2, 8))
    cfg = MleConfig(dim=8, gamma_h=0.15)
    for theta, x in [(0.0, 0.3), (1.1, -1.4), (2.5, 2.0)]:
        lhs = np.real(np.trace(rho.elements @ povm_element(theta, x, cfg)))
        rhs = quad_pdf(apply_loss(rho, LossChannel(0.15)), theta, x)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_vacuum_loglikelihood():
    """ln pr(x) for vacuum is -x^2 - ln sqrt(pi) at every phase and loss."""
    data = vacuum_data(n=2000)
    expected = np.sum(-data.xs ** 2 - 0.5 * np.log(np.pi))
    rho = DensityMatrix.from_pure(fock_state(0, 6))
    assert loglikelihood(rho, data, MleConfig(6, 0.1)) == pytest.approx(expected, rel=1e-9)
    assert loglikelihood(rho, data, MleConfig(6, 0.0)) == pytest.approx(expected, rel=1e-9)
    # sample mean of the per-record value approaches -(1/2 + ln sqrt(pi))
    assert expected / len(data) == pytest.approx(-(0.5 + 0.5 * np.log(np.pi)), abs=0.05)


def test_impossible_sample_gives_minus_infinity():
    """|1> has a node at x = 0, so a lossless record there is impossible."""
    data = QuadratureDataset([0.3], [0.0], 0.0, 0)
    rho = DensityMatrix.from_pure(fock_state(1, 6))
    assert loglikelihood(rho, data, MleConfig(6, 0.0)) == float("-inf")


def test_mle_config_validation():
    """Out-of-range settings are rejected."""
    with pytest.raises(ValueError):
        MleConfig(dim=6, gamma_h=1.0)
    with pytest.raises(ValueError):
        MleConfig(dim=6, gamma_h=0.1, dilution=0.0)
    with pytest.raises(ValueError):
        MleConfig(dim=6, gamma_h=0.1, stop_delta=0.0)
    with pytest.raises(ValueError):
        MleConfig(dim=1, gamma_h=0.1)


def test_vacuum_round_trip():
    """Vacuum data reconstructs to vacuum."""
    data = vacuum_data(n=6000)
    result = mle_reconstruct(data, MleConfig(6, 0.1, max_iters=1000, stop_delta=1e-7))
    assert fidelity(result.state, fock_state(0, 6)) >= 0.99
    assert result.floored_samples == 0


def test_loglikelihood_history_is_monotone():
    """Backtracking never accepts a step that lowers the likelihood."""
    result = mle_reconstruct(vacuum_data(), MleConfig(6, 0.1, max_iters=200, stop_delta=1e-7))
    assert np.all(np.diff(result.history) >= -1e-9)
    assert result.loglikelihood == result.history[-1]
    assert len(result.history) == result.iterations + 1


def test_dilution_does_not_change_the_estimate():
    """Diluted and undiluted iterations converge to the same state."""
    data = vacuum_data(n=3000, seed=5)
    full = mle_reconstruct(data, MleConfig(6, 0.1, max_iters=3000, stop_delta=1e-9))
    half = mle_reconstruct(data, MleConfig(6, 0.1, max_iters=3000, stop_delta=1e-9, dilution=0.5))
    assert trace_distance(full.state, half.state) <= 1e-2


def test_max_iters_termination():
    """A run that cannot converge in time reports max_iters."""
    result = mle_reconstruct(vacuum_data(n=500), MleConfig(6, 0.1, max_iters=3, stop_delta=1e-12))
    assert result.termination == "max_iters"
    assert result.iterations == 3
    assert result.diagnostics()["termination"] == "max_iters"


def test_initial_state_is_a_fixed_point():
    """Starting from a good estimate, the likelihood can only improve."""
    data = vacuum_data(n=1000, seed=8)
    cfg = MleConfig(6, 0.1, max_iters=50, stop_delta=1e-7)
    start = DensityMatrix.from_pure(fock_state(0, 6))
    result = mle_reconstruct(data, cfg, initial=start)
    assert result.loglikelihood >= loglikelihood(start, data, cfg) - 1e-9
    assert fidelity(result.state, fock_state(0, 6)) >= 0.98


def test_gamma_h_sensitivity():
    """Assuming more or less detector loss moves the fit by a small, reported amount."""
    data = vacuum_data(n=1500, seed=9)
    out = gamma_h_sensitivity(data, MleConfig(6, 0.1, max_iters=500, stop_delta=1e-6))
    assert out["gamma_h"] == pytest.approx([0.08, 0.1, 0.12])
    assert len(out["fidelity"]) == 3
    assert out["max_shift"] <= 0.03
    assert out["state_fidelity_to_nominal"][1] == pytest.approx(1.0, abs=1e-6)


@pytest.mark.slow
def test_gamma_h_sensitivity_one_photon():
    """A +/-0.02 error in the assumed homodyne loss moves the one-photon CSS fidelity by at most 0.03."""
    config = get_preset_config(Preset.ONE_PHOTON_APD)
    data = sample_quadratures(forward_model(config), config.gamma_h, config.schedule, 20000,
                              seed=5, source_label="apd-1")
    cfg = MleConfig(config.dim, config.gamma_h, max_iters=400, stop_delta=1e-7)
    out = gamma_h_sensitivity(data, cfg)
    assert out["gamma_h"] == pytest.approx([0.13, 0.15, 0.17])
    assert out["max_shift"] <= 0.03
    assert min(out["state_fidelity_to_nominal"]) > 0.9


@pytest.mark.slow
def test_single_photon_round_trip():
    """Lossy |1> data reconstructs with a negative Wigner function after loss correction."""
    rho = DensityMatrix.from_pure(fock_state(1, 10))
    data = sample_quadratures(rho, 0.15, RANDOM_PHASES, 50000, seed=17, source_label="one")
    result = mle_reconstruct(data, MleConfig(10, 0.15, max_iters=2000, stop_delta=1e-8))
    assert fidelity(result.state, fock_state(1, 10)) >= 0.97
    assert wigner(result.state, 0.0, 0.0) < -0.25


@pytest.mark.slow
@pytest.mark.parametrize("preset", list(TABLE1_ROWS))
def test_preset_round_trip(preset):
    """1e5 samples of each preset's forward state reconstruct with fidelity >= 0.98."""
    config = get_preset_config(preset)
    truth = forward_model(config)
    data = sample_quadratures(truth, config.gamma_h, config.schedule, 100_000, seed=config.seed,
                              source_label=config.label)
    result = mle_reconstruct(data, config.mle)
    assert state_fidelity(result.state, truth) >= 0.98
