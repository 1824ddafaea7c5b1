import numpy as np
import pytest

from fockvampire.channels import (
    AttenuationChannel,
    DetectorModel,
    LossOrdering,
    attenuate,
    click_povm,
    condition_on_click,
    exact_annihilation,
    loss_generator,
    physical_subtraction,
    unconditional_map,
)
from fockvampire.errors import ArgumentError, ImpossibleEventError, ZeroNormError
from fockvampire.fock_core import (
    MixedState,
    ModeSet,
    apply_annihilation,
    as_mixed,
    coherent_state,
    embed,
    fidelity,
    fock_state,
    mean_photon_number,
    normalize,
    partial_trace,
    photon_number_probabilities,
    trace_distance,
    vacuum,
)
from fockvampire.linear_optics import BeamSplitter, apply_beamsplitter

IDEAL = DetectorModel()


def test_detector_validation():
    with pytest.raises(ArgumentError):
        DetectorModel(efficiency=1.2)
    with pytest.raises(ArgumentError):
        DetectorModel(dark_prob=1.0)
    with pytest.raises(ArgumentError):
        AttenuationChannel(-0.1)


def test_exact_annihilation_examples():
    modes = ModeSet(1, 3)
    state, weight = exact_annihilation(fock_state(modes, (1,)), 0)
    np.testing.assert_allclose(state.vector, vacuum(modes).vector)
    assert weight == pytest.approx(1.0)

    coherent = coherent_state(ModeSet(1, 12), 0, 0.5)
    state, weight = exact_annihilation(coherent, 0)
    assert weight == pytest.approx(0.25, abs=1e-8)
    assert fidelity(state, coherent) == pytest.approx(1.0, abs=1e-8)

    with pytest.raises(ZeroNormError):
        exact_annihilation(vacuum(modes), 0)


def test_annihilation_on_alice_halves_bobs_photons():
    split = apply_beamsplitter(fock_state(ModeSet(2, 2), (2, 0)), 0, 1, BeamSplitter.balanced())
    assert mean_photon_number(split, 1) == pytest.approx(1.0, abs=1e-12)
    after, weight = exact_annihilation(split, 0)
    assert weight == pytest.approx(1.0, abs=1e-12)
    assert mean_photon_number(after, 1) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("output_mode", [0, 1])
def test_annihilation_acts_on_the_whole_mode(random_pure_state, random_beamsplitter, output_mode):
    single = ModeSet(1, 4)
    for _ in range(10):
        psi = random_pure_state(single)
        bs = random_beamsplitter()
        split = apply_beamsplitter(embed(psi, 1), 0, 1, bs)
        after, _ = exact_annihilation(split, output_mode)
        recombined = apply_beamsplitter(after, 0, 1, bs.inverse())
        populations = photon_number_probabilities(recombined, 1)
        assert 1 - populations[0] < 1e-12
        expected, _ = normalize(apply_annihilation(psi, 0))
        reduced = partial_trace(recombined, [0])
        np.testing.assert_allclose(reduced.matrix, as_mixed(expected).matrix, atol=1e-12)


def test_click_povm_examples():
    povm = click_povm(IDEAL, 4)
    np.testing.assert_allclose(np.diag(povm.click).real, [0, 1, 1, 1])
    dark = click_povm(DetectorModel(dark_prob=0.01), 3)
    assert dark.click[0, 0].real == pytest.approx(0.01)
    half = click_povm(DetectorModel(efficiency=0.5), 3)
    assert half.click[1, 1].real == pytest.approx(0.5)


@pytest.mark.parametrize("resolving", [False, True])
def test_click_povm_is_complete(resolving):
    povm = click_povm(DetectorModel(efficiency=0.7, dark_prob=0.02, number_resolving=resolving), 6)
    np.testing.assert_allclose(sum(povm), np.eye(6), atol=1e-12)
    for element in povm:
        assert np.linalg.eigvalsh(element).min() >= -1e-12


def test_number_resolving_click_is_a_single_count():
    povm = click_povm(DetectorModel(number_resolving=True), 4)
    np.testing.assert_allclose(np.diag(povm.click).real, [0, 1, 0, 0])
    np.testing.assert_allclose(np.diag(povm.multi_click).real, [0, 0, 1, 1])


def test_condition_on_click_examples():
    modes = ModeSet(2, 2)
    with pytest.raises(ImpossibleEventError):
        condition_on_click(fock_state(modes, (1, 0)), 1, IDEAL)

    state, probability = condition_on_click(fock_state(modes, (0, 1)), 1, IDEAL)
    assert probability == pytest.approx(1.0)
    np.testing.assert_allclose(state.matrix, np.diag([1, 0, 0]), atol=1e-15)

    state, probability = condition_on_click(vacuum(modes), 1, DetectorModel(dark_prob=0.003))
    assert probability == pytest.approx(0.003)
    assert state.trace_weight == pytest.approx(0.003)

    with pytest.raises(ArgumentError):
        condition_on_click(fock_state(ModeSet(1, 2), (1,)), 0, IDEAL)


def test_physical_subtraction_from_single_photon():
    state, probability = physical_subtraction(fock_state(ModeSet(1, 2), (1,)), 0, 0.06, IDEAL)
    assert probability == pytest.approx(0.06, abs=1e-12)
    assert fidelity(state, vacuum(ModeSet(1, 2))) == pytest.approx(1.0, abs=1e-12)


def test_physical_subtraction_from_two_photons():
    state, probability = physical_subtraction(fock_state(ModeSet(1, 2), (2,)), 0, 0.06, IDEAL)
    # Single-photon tap events 2 t^2 r^2 against two-photon events r^4.
    assert probability == pytest.approx(2 * 0.94 * 0.06 + 0.06**2, abs=1e-12)
    value = fidelity(state, fock_state(ModeSet(1, 2), (1,)))
    assert value == pytest.approx(0.1128 / 0.1164, abs=1e-12)
    assert value >= 0.96


def test_physical_subtraction_range():
    with pytest.raises(ArgumentError):
        physical_subtraction(fock_state(ModeSet(1, 2), (1,)), 0, 0.0, IDEAL)
    with pytest.raises(ArgumentError):
        physical_subtraction(fock_state(ModeSet(1, 2), (1,)), 0, 1.0, IDEAL)


def test_tap_limit_convergence():
    two = fock_state(ModeSet(1, 2), (2,))
    exact, _ = exact_annihilation(two, 0)
    distances = [
        trace_distance(physical_subtraction(two, 0, tap, IDEAL)[0], exact)
        for tap in (0.1, 0.05, 0.025)
    ]
    for coarse, fine in zip(distances, distances[1:]):
        assert fine / coarse == pytest.approx(0.5, rel=0.2)


def test_attenuation_examples():
    one = fock_state(ModeSet(1, 3), (1,))
    np.testing.assert_allclose(
        attenuate(one, 0, AttenuationChannel(0.0)).matrix, as_mixed(one).matrix, atol=1e-15
    )
    out = attenuate(one, 0, AttenuationChannel(0.3))
    np.testing.assert_allclose(np.diag(out.matrix).real, [0.3, 0.7, 0, 0], atol=1e-15)

    alpha, gamma = 0.6, 0.4
    coherent = coherent_state(ModeSet(1, 14), 0, alpha)
    out = attenuate(coherent, 0, AttenuationChannel(gamma))
    target = coherent_state(ModeSet(1, 14), 0, np.sqrt(1 - gamma) * alpha)
    assert fidelity(out, target) == pytest.approx(1.0, abs=1e-10)


def test_attenuation_preserves_trace_and_composes(random_density_matrix):
    modes = ModeSet(2, 2)
    rho = MixedState(modes, random_density_matrix(modes.dim))
    first = attenuate(attenuate(rho, 1, AttenuationChannel(0.2)), 1, AttenuationChannel(0.5))
    combined = attenuate(rho, 1, AttenuationChannel(1 - 0.8 * 0.5))
    assert first.trace == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(first.matrix, combined.matrix, atol=1e-10)


def test_unconditional_map_is_trace_preserving(random_density_matrix):
    modes = ModeSet(2, 2)
    detector = DetectorModel(efficiency=0.3, dark_prob=0.0025)
    for _ in range(50):
        rho = MixedState(modes, random_density_matrix(modes.dim))
        out = unconditional_map(rho, 0, 0.06, detector)
        assert out.trace == pytest.approx(1.0, abs=1e-12)


def test_unconditional_map_limits():
    modes = ModeSet(1, 3)
    one = fock_state(modes, (1,))
    np.testing.assert_allclose(
        unconditional_map(one, 0, 0.0, IDEAL).matrix, as_mixed(one).matrix, atol=1e-10
    )
    out = unconditional_map(one, 0, 0.06, DetectorModel(efficiency=0.3, dark_prob=0.0025))
    np.testing.assert_allclose(
        out.matrix, attenuate(one, 0, AttenuationChannel(0.06)).matrix, atol=1e-12
    )
    assert trace_distance(out, one) < 0.07


def test_loss_generator_orderings():
    rho = fock_state(ModeSet(1, 3), (1,))
    standard = loss_generator(rho, 0)
    printed = loss_generator(rho, 0, LossOrdering.AS_PRINTED)
    assert np.trace(standard).real == pytest.approx(0.0, abs=1e-15)
    assert np.trace(printed).real == pytest.approx(-1.0)
    np.testing.assert_allclose(np.diag(standard).real, [1, -1, 0, 0])
