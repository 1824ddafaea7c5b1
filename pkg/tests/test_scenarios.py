import dataclasses

import numpy as np
import pytest

from fockvampire.channels import DetectorModel
from fockvampire.errors import ArgumentError, TruncationRiskError
from fockvampire.fock_core import ModeSet, fidelity, fock_state, mean_photon_number
from fockvampire.scenarios import (
    ExperimentConfig,
    ShadowMechanism,
    SubtractionMechanism,
    bob_mean_photons,
    gaussian_profile,
    heralded_fock_prep,
    shadow_demo,
    simulate_bob_mean_photons,
    vampire_pipeline,
)

IDEAL = DetectorModel()


def test_default_config():
    config = ExperimentConfig()
    assert config.tap_reflectivity == 0.06
    assert config.split_mu == pytest.approx(1 / np.sqrt(2))
    assert config.split_lambda == pytest.approx(1 / np.sqrt(2))
    assert config.detection_efficiency == 0.53
    assert len(config.phases) == 12
    assert config.tomography_settings().efficiency_compensation == 0.53


@pytest.mark.parametrize(
    "changes",
    [
        {"squeezing": 1.0},
        {"tap_reflectivity": 1.5},
        {"detection_efficiency": 0.0},
        {"split_mu": 0.5},
        {"samples_per_phase": 0},
        {"phases": (0.0, 3.5)},
        {"phases": ()},
        {"cutoff": 1},
        {"seed": -1},
    ],
)
def test_config_validation(changes):
    with pytest.raises(ArgumentError):
        ExperimentConfig(**changes)


def test_single_photon_herald_in_the_weak_squeezing_limit():
    s = 0.01
    signal, probability = heralded_fock_prep(ExperimentConfig(squeezing=s), 1)
    assert fidelity(signal, fock_state(ModeSet(1, 5), (1,))) >= 1 - s**2 - 1e-12
    assert probability == pytest.approx(s**2, rel=1e-9)


def test_unheralded_signal_is_thermal():
    s = 0.1
    signal, probability = heralded_fock_prep(ExperimentConfig(squeezing=s), 1, herald=False)
    assert probability == 1.0
    assert mean_photon_number(signal, 0) == pytest.approx(s**2 / (1 - s**2), rel=1e-9)
    np.testing.assert_allclose(signal.matrix, np.diag(np.diag(signal.matrix)), atol=1e-15)


def test_two_photon_herald():
    s = 0.2
    signal, probability = heralded_fock_prep(ExperimentConfig(squeezing=s), 2)
    n = np.arange(6)
    # Both detectors behind a 50:50 split of n idler photons click with 1 - 2^(1 - n).
    weights = s ** (2 * n) * np.where(n > 0, 1 - 2.0 ** (1 - n), 0.0)
    expected = weights / weights.sum()
    populations = np.real(np.diag(signal.matrix))
    np.testing.assert_allclose(populations, expected, atol=1e-12)
    assert np.argmax(populations) == 2
    assert probability == pytest.approx((1 - s**2) * weights.sum(), rel=1e-7)


def test_herald_rejects_other_photon_numbers():
    with pytest.raises(ArgumentError):
        heralded_fock_prep(ExperimentConfig(), 3)


def test_herald_rejects_strong_squeezing():
    with pytest.raises(TruncationRiskError):
        heralded_fock_prep(ExperimentConfig(squeezing=0.5), 1)


def test_bob_mean_photons():
    assert bob_mean_photons(2, 0.5, False) == pytest.approx(1.0)
    assert bob_mean_photons(2, 0.5, True) == pytest.approx(0.5)
    assert bob_mean_photons(1, 0.3, True) == 0.0
    with pytest.raises(ArgumentError):
        bob_mean_photons(0, 0.5, True)
    with pytest.raises(ArgumentError):
        bob_mean_photons(2, 1.0, False)


@pytest.mark.parametrize("N, lambda_sq", [(1, 0.5), (2, 0.5), (3, 0.3)])
def test_simulated_mean_photons_match(N, lambda_sq):
    for subtracted in (False, True):
        assert simulate_bob_mean_photons(N, lambda_sq, subtracted) == pytest.approx(
            bob_mean_photons(N, lambda_sq, subtracted), abs=1e-12
        )


def test_mean_photons_through_a_physical_tap():
    value = simulate_bob_mean_photons(2, 0.5, True, tap_reflectivity=0.06, detector=IDEAL)
    assert value == pytest.approx(0.5, abs=0.05)


def test_pipeline_single_photon_ideal_subtraction():
    config = ExperimentConfig(subtraction_detector=IDEAL, samples_per_phase=4200)
    report = vampire_pipeline(config, 1)
    conditioned = report.branches["conditioned"]
    unconditioned = report.branches["unconditioned"]
    assert conditioned.reference_photons == 0
    assert conditioned.reconstructed_distribution[0] >= 0.95
    assert unconditioned.reconstructed_distribution[1] >= 0.90
    assert conditioned.click_probability == pytest.approx(0.03, rel=0.1)
    assert np.all(np.diff(conditioned.tomography.loglik_trace) >= -1e-9)


def test_pipeline_two_photons_ideal_subtraction():
    config = ExperimentConfig(subtraction_detector=IDEAL)
    report = vampire_pipeline(config, 2)
    assert report.branches["unconditioned"].reconstructed_distribution[2] >= 0.90
    assert report.branches["conditioned"].reconstructed_distribution[1] >= 0.90


def test_pipeline_two_photons_dark_count_residual():
    report = vampire_pipeline(ExperimentConfig(), 2)
    conditioned = report.branches["conditioned"]
    assert 0.03 <= conditioned.true_distribution[2] <= 0.10
    assert np.argmax(conditioned.reconstructed_distribution) == 1
    assert np.argmax(report.branches["unconditioned"].reconstructed_distribution) == 2


def test_pipeline_without_subtraction():
    report = vampire_pipeline(ExperimentConfig(), 1, SubtractionMechanism.NONE)
    assert list(report.branches) == ["unconditioned"]
    assert report.branches["unconditioned"].fidelity_reconstructed >= 0.95


@pytest.mark.parametrize("target", [1, 2])
def test_exact_subtraction_preserves_the_mode(target):
    config = ExperimentConfig(samples_per_phase=50)
    report = vampire_pipeline(config, target, SubtractionMechanism.EXACT)
    for branch in report.branches.values():
        assert branch.orthogonal_population < 1e-12


@pytest.mark.parametrize("target", [1, 2])
def test_weak_tap_approaches_the_next_lower_fock_state(target):
    config = ExperimentConfig(
        squeezing=0.02, tap_reflectivity=0.01, subtraction_detector=IDEAL, samples_per_phase=50
    )
    report = vampire_pipeline(config, target)
    assert report.branches["conditioned"].fidelity_true >= 0.99


def test_pipeline_report_is_deterministic():
    config = ExperimentConfig(samples_per_phase=100)
    first = vampire_pipeline(config, 1).to_dict()
    second = vampire_pipeline(config, 1).to_dict()
    assert first == second
    other = vampire_pipeline(dataclasses.replace(config, seed=1), 1).to_dict()
    assert other["branches"] != first["branches"]


def test_histogram_rows():
    report = vampire_pipeline(ExperimentConfig(samples_per_phase=100), 1)
    rows = report.branches["conditioned"].histogram_rows()
    assert len(rows) == 120
    assert sum(count for _, _, count, _ in rows) == 1200
    left, right, _, _ = rows[0]
    assert (left, right) == pytest.approx((-6.0, -5.9))
    density = np.array([theory for *_, theory in rows])
    assert np.sum(density) * 0.1 == pytest.approx(1.0, abs=1e-3)


def test_no_shadow_from_annihilation(random_profile):
    c = random_profile(4)
    report = shadow_demo(4, c, [1, 3], ShadowMechanism.EXACT_ANNIHILATION, 2)
    assert report.contrast < 1e-12
    assert report.total_output == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(report.output_profile, np.abs(c) ** 2, atol=1e-12)


def test_no_shadow_for_random_clouds(rng, random_profile):
    for _ in range(8):
        K = int(rng.integers(2, 5))
        N = int(rng.integers(1, 4))
        size = int(rng.integers(1, K))
        cloud = rng.choice(K, size=size, replace=False)
        c = random_profile(K)
        report = shadow_demo(K, c, cloud, ShadowMechanism.EXACT_ANNIHILATION, N)
        np.testing.assert_allclose(report.output_profile, (N - 1) * np.abs(c) ** 2, atol=1e-12)


def test_absorbing_cloud_casts_a_shadow(random_profile):
    c = random_profile(4)
    report = shadow_demo(4, c, [0, 1], ShadowMechanism.ATTENUATION, 2, gamma=0.5)
    assert report.uncovered_ratio - report.covered_ratio > 0.1
    assert report.covered_ratio == pytest.approx(0.5, abs=1e-12)
    assert report.uncovered_ratio == pytest.approx(1.0, abs=1e-12)
    assert report.contrast > 0


def test_transparent_cloud_changes_nothing():
    c = gaussian_profile(3)
    report = shadow_demo(3, c, [2], ShadowMechanism.ATTENUATION, 2, gamma=0.0)
    np.testing.assert_allclose(report.output_profile, report.input_profile, atol=1e-12)


def test_gaussian_profile():
    c = gaussian_profile(5)
    assert np.linalg.norm(c) == pytest.approx(1.0)
    assert np.argmax(c) == 2
    with pytest.raises(ArgumentError):
        gaussian_profile(0)


def test_ccd_frame():
    report = shadow_demo(3, gaussian_profile(3), [0], ShadowMechanism.ATTENUATION, 1, gamma=0.5)
    image = report.to_ccd_image(scale=4)
    assert image.size == (12, 8)
    assert image.mode == "L"
    assert image.getpixel((5, 1)) == 255
    assert image.getpixel((1, 5)) < image.getpixel((1, 1))


def test_shadow_report_serialization():
    report = shadow_demo(3, gaussian_profile(3), [0], ShadowMechanism.EXACT_ANNIHILATION, 2)
    payload = report.to_dict()
    assert payload["mechanism"] == "exact"
    assert payload["cloud"] == [0]
    assert payload["total_output"] == pytest.approx(1.0)
    assert len(payload["coefficients"]) == 3
