"""Tests for loss channels, detector models and heralded subtraction."""
import numpy as np
import pytest

from src.fock.constructors import coherent_state, css_state, fock_state, squeezed_vacuum
from src.fock.functionals import fidelity, mean_photon, purity
from src.fock.states import DensityMatrix, Parity, SqueezeParams
from src.optics.channels import (LossChannel, apply_loss, binomial_kraus, compose_losses, db_to_r,
                                 loss_adjoint, loss_map, prepare_squeezed, quadrature_variance)
from src.optics.detectors import DetectorKind, DetectorModel, detector_povm, outcome_probabilities
from src.optics.heralding import (HeraldConfig, HeraldingError, background_state, herald_outcome_table,
                                  herald_subtract, modal_mixture, subtraction_kraus)

R_TABLE = 6.8 * np.log(10.0) / 20.0


def lossy_squeezed():
    return prepare_squeezed(SqueezeParams(V0_dB=-6.8, gamma_s=0.36), 30)


def test_db_to_r():
    """dB levels convert to squeezing parameters with V_min = e^{-2r}/2."""
    assert db_to_r(0.0) == 0.0
    r = db_to_r(-6.8)
    assert r == pytest.approx(R_TABLE)
    assert 10 * np.log10(np.exp(-2 * r)) == pytest.approx(-6.8)
    assert np.exp(-2 * db_to_r(-3.0103)) == pytest.approx(0.5, abs=1e-5)
    with pytest.raises(ValueError):
        db_to_r(2.0)


def test_kraus_completeness():
    """Loss Kraus operators resolve the identity."""
    ch = LossChannel(0.3)
    total = sum(a.conj().T @ a for a in ch.kraus_operators(12))
    assert np.allclose(total, np.eye(12))


def test_loss_limits():
    """gamma = 0 is the identity, gamma = 1 returns vacuum."""
    rho = DensityMatrix.from_pure(coherent_state(0.8, 12))
    assert apply_loss(rho, LossChannel(0.0)) is rho

    gone = apply_loss(rho, LossChannel(1.0))
    assert gone.elements[0, 0].real == pytest.approx(1.0)
    assert mean_photon(gone) == pytest.approx(0.0, abs=1e-12)


def test_loss_scales_coherent_amplitude():
    """A coherent state through loss gamma stays coherent with amplitude sqrt(1-gamma) alpha."""
    rho = DensityMatrix.from_pure(coherent_state(1.0, 20))
    out = apply_loss(rho, LossChannel(0.36))
    assert fidelity(out, coherent_state(0.8, 20)) == pytest.approx(1.0, abs=1e-8)


def test_loss_adjoint_duality():
    """Tr(Lambda(rho) X) = Tr(rho Lambda^dag(X))."""
    rng = np.random.default_rng(3)
    rho = DensityMatrix.from_pure(coherent_state(0.5 + 0.4j, 10))
    x = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
    ch = LossChannel(0.25)
    lhs = np.trace(loss_map(rho.elements, ch) @ x)
    rhs = np.trace(rho.elements @ loss_adjoint(x, ch))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_compose_losses():
    """Two losses in series equal one with combined transmission."""
    rho = DensityMatrix.from_pure(coherent_state(0.9, 12))
    a, b = LossChannel(0.2), LossChannel(0.3)
    twice = apply_loss(apply_loss(rho, a), b)
    once = apply_loss(rho, compose_losses(a, b))
    assert np.allclose(twice.elements, once.elements, atol=1e-12)
    assert compose_losses(a, b).gamma == pytest.approx(0.44)


def test_prepare_squeezed():
    """Lossy squeezed vacuum: vacuum limit, photon number, purity and minimum variance."""
    vac = prepare_squeezed(SqueezeParams(V0_dB=0.0, gamma_s=0.0), 10)
    assert vac.elements[0, 0].real == pytest.approx(1.0)

    pure = prepare_squeezed(SqueezeParams(V0_dB=-6.8, gamma_s=0.0), 30)
    assert purity(pure) == pytest.approx(1.0, abs=1e-10)

    rho = lossy_squeezed()
    assert mean_photon(rho) == pytest.approx(0.64 * np.sinh(R_TABLE) ** 2, abs=1e-4)
    expected_min = 0.64 * 0.5 * np.exp(-2 * R_TABLE) + 0.36 * 0.5
    assert quadrature_variance(rho, 0.0) == pytest.approx(expected_min, abs=1e-4)


def test_lossy_squeezed_purity_two_ways():
    """Purity from the Frobenius norm agrees with the eigenvalue sum of squares."""
    rho = lossy_squeezed()
    p = purity(rho)
    assert 0.0 < p < 1.0
    assert p == pytest.approx(np.sum(rho.eigenvalues() ** 2), abs=1e-10)


def test_subtraction_kraus_no_photon():
    """B_0 is diagonal (1-R)^{n/2}."""
    b0 = subtraction_kraus(0.1, 0, 8)
    assert np.allclose(b0, np.diag(0.9 ** (np.arange(8) / 2)))
    assert np.allclose(binomial_kraus(0.1, 0, 8), b0)


def test_tes_povm():
    """TES effects are binomial below the overflow outcome."""
    ideal = DetectorModel(DetectorKind.TES, efficiency=1.0)
    assert np.allclose(detector_povm(ideal, 2, 8), np.diag(np.eye(8)[2]))

    tes = DetectorModel(DetectorKind.TES, efficiency=0.85)
    two = DensityMatrix.from_pure(fock_state(2, 6))
    assert outcome_probabilities(two, tes)[1] == pytest.approx(2 * 0.85 * 0.15)


def test_tes_overflow_pools_high_counts():
    """The last TES outcome collects every count at or above max_resolved."""
    tes = DetectorModel(DetectorKind.TES, efficiency=1.0, max_resolved=3)
    effects = tes.response(np.arange(8))
    assert effects.shape == (4, 8)
    assert np.allclose(effects[3], [0, 0, 0, 1, 1, 1, 1, 1])
    assert np.allclose(effects.sum(axis=0), 1.0)


def test_two_apd_coincidence():
    """Two APDs behind a balanced splitter both click on |2> with probability eta^2/2."""
    eta = 0.5
    det = DetectorModel(DetectorKind.MULTIPLEXED_APD, efficiency=eta, n_apds=2)
    two = DensityMatrix.from_pure(fock_state(2, 6))
    probs = outcome_probabilities(two, det)
    assert probs[2] == pytest.approx(eta ** 2 / 2)
    assert probs.sum() == pytest.approx(1.0)


def test_single_apd():
    """A single APD clicks with probability 1 - (1-eta)^n."""
    det = DetectorModel(DetectorKind.APD, efficiency=0.5)
    assert det.n_outcomes == 2
    three = DensityMatrix.from_pure(fock_state(3, 6))
    assert outcome_probabilities(three, det)[1] == pytest.approx(1 - 0.5 ** 3)


@pytest.mark.parametrize("det", [
    DetectorModel(DetectorKind.TES, 0.85),
    DetectorModel(DetectorKind.APD, 0.5),
    DetectorModel(DetectorKind.MULTIPLEXED_APD, 0.5, n_apds=4),
])
def test_detector_outcomes_sum_to_one(det):
    """Every detector model's outcome probabilities sum to 1."""
    rho = DensityMatrix.from_pure(coherent_state(1.1, 16))
    assert outcome_probabilities(rho, det).sum() == pytest.approx(1.0, abs=1e-10)


def test_detector_validation():
    """Dark counts are refused and outcomes must exist."""
    with pytest.raises(ValueError):
        DetectorModel(DetectorKind.APD, 0.5, dark_count_prob=1e-6)
    with pytest.raises(ValueError):
        DetectorModel(DetectorKind.TES, 1.2)
    with pytest.raises(ValueError):
        detector_povm(DetectorModel(DetectorKind.APD, 0.5), 2, 6)


def test_herald_config_validation():
    """n_subtract must be an outcome of the detector."""
    apd = DetectorModel(DetectorKind.APD, 0.5)
    with pytest.raises(ValueError):
        HeraldConfig(0.05, apd, 2, 0.9)
    with pytest.raises(ValueError):
        HeraldConfig(0.0, apd, 1, 0.9)
    with pytest.raises(ValueError):
        HeraldConfig(0.05, apd, 1, 1.5)


def test_herald_from_vacuum_fails():
    """Vacuum cannot herald a photon."""
    hc = HeraldConfig(0.1, DetectorModel(DetectorKind.TES, 0.85), 1, 1.0)
    with pytest.raises(HeraldingError):
        herald_subtract(DensityMatrix.from_pure(fock_state(0, 10)), hc)


def test_ideal_single_subtraction_flips_parity():
    """Subtracting exactly one photon from squeezed vacuum leaves only odd photon numbers."""
    rho = DensityMatrix.from_pure(squeezed_vacuum(0.5, 20))
    hc = HeraldConfig(0.001, DetectorModel(DetectorKind.TES, 1.0), 1, 1.0)
    out, prob = herald_subtract(rho, hc)
    assert prob > 0
    assert np.all(out.populations()[0::2] < 1e-20)


def test_herald_outcome_table_sums_to_one():
    """Probabilities over every detector outcome sum to 1."""
    table = herald_outcome_table(lossy_squeezed(), 0.2, DetectorModel(DetectorKind.TES, 0.85))
    assert table.sum() == pytest.approx(1.0, abs=1e-8)
    assert np.all(table >= 0)


def test_herald_probability_matches_table():
    """herald_subtract reports the same probability as the outcome table."""
    rho = lossy_squeezed()
    det = DetectorModel(DetectorKind.MULTIPLEXED_APD, 0.5, n_apds=2)
    _, prob = herald_subtract(rho, HeraldConfig(0.1, det, 2, 0.85))
    assert prob == pytest.approx(herald_outcome_table(rho, 0.1, det)[2], rel=1e-10)


def test_background_state_is_loss():
    """The unheralded background is the transmitted beam averaged over reflections."""
    rho = lossy_squeezed()
    bg = background_state(rho, 0.2)
    assert mean_photon(bg) == pytest.approx(0.8 * mean_photon(rho), abs=1e-10)


def test_modal_mixture():
    """xi interpolates linearly between the heralded and background states."""
    rho = lossy_squeezed()
    hc = HeraldConfig(0.1, DetectorModel(DetectorKind.TES, 0.85), 2, 0.62)
    herald, _ = herald_subtract(rho, hc)
    bg = background_state(rho, 0.1)

    assert np.allclose(modal_mixture(herald, bg, 1.0).elements, herald.elements)
    assert np.allclose(modal_mixture(herald, bg, 0.0).elements, bg.elements)

    psi = css_state(1.16, Parity.EVEN, 30)
    mixed = modal_mixture(herald, bg, 0.62)
    expected = 0.62 * fidelity(herald, psi) + 0.38 * fidelity(bg, psi)
    assert fidelity(mixed, psi) == pytest.approx(expected, abs=1e-10)

    with pytest.raises(ValueError):
        modal_mixture(herald, bg, 1.1)
