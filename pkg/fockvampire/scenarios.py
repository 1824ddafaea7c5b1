"""
End-to-end experiments: heralded Fock-state preparation, photon subtraction from one arm of a
split state followed by homodyne tomography of the recombined mode, the pixel-mode shadow
comparison between photon annihilation and linear absorption, and mean-photon bookkeeping.
"""

#  Copyright 2024 The fockvampire Contributors
#
#  This file is part of fockvampire.
#
#  fockvampire is free software: you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation, either version 3 of the License, or
#  (at your option) any later version.
#
#  fockvampire is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with fockvampire.  If not, see <https://www.gnu.org/licenses/>.
from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from ordered_set import OrderedSet

try:
    from PIL import Image
except ImportError:
    from pil import Image  # type: ignore

from fockvampire.channels import (
    AttenuationChannel,
    DetectorModel,
    attenuate,
    condition_on_click,
    exact_annihilation,
    physical_subtraction,
)
from fockvampire.errors import ArgumentError, TruncationRiskError
from fockvampire.fock_core import (
    MixedState,
    ModeSet,
    PureState,
    State,
    as_mixed,
    embed,
    fidelity,
    fock_state,
    mean_photon_number,
    normalize,
    partial_trace,
    photon_number_probabilities,
)
from fockvampire.homodyne import (
    default_phases,
    histogram,
    marginal_distribution,
    sample_quadratures,
)
from fockvampire.linear_optics import (
    BeamSplitter,
    apply_beamsplitter,
    cloud_mode_rotation,
    split_mode,
)
from fockvampire.tomography import (
    TomographyResult,
    TomographySettings,
    maxlik_reconstruct,
    photon_number_distribution,
)
from fockvampire.util import check_probability, complex_to_pair

logger = logging.getLogger(__name__)

DEFAULT_DARK_PROB = 0.0025
HERALD_LEAKAGE_LIMIT = 1e-8


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Parameters of the subtraction experiment. Defaults describe the lab setup: a 50:50
    polarization interferometer, a 6% tap in front of the subtraction detector and 53% overall
    detection efficiency. The subtraction detector's efficiency and dark-count probability
    are calibrated together so dark clicks make up about 6% of the clicks for a two-photon input
    (one photon on average in the tapped arm).
    """

    squeezing: float = 0.1
    herald_detector: DetectorModel = DetectorModel()
    tap_reflectivity: float = 0.06
    subtraction_detector: DetectorModel = DetectorModel(efficiency=0.6, dark_prob=DEFAULT_DARK_PROB)
    split_mu: complex = 1 / np.sqrt(2)
    split_lambda: complex = 1 / np.sqrt(2)
    detection_efficiency: float = 0.53
    samples_per_phase: int = 4000
    phases: tuple[float, ...] = tuple(float(p) for p in default_phases())
    cutoff: int = 5
    seed: int = 0

    def __post_init__(self):
        check_probability(self.squeezing, "squeezing", open_low=True, open_high=True)
        check_probability(self.tap_reflectivity, "tap_reflectivity", open_low=True, open_high=True)
        check_probability(self.detection_efficiency, "detection_efficiency", open_low=True)
        object.__setattr__(self, "split_mu", complex(self.split_mu))
        object.__setattr__(self, "split_lambda", complex(self.split_lambda))
        try:
            self.splitter
        except ArgumentError as err:
            raise ArgumentError(err.message, field="split_mu") from err
        if self.samples_per_phase < 1:
            raise ArgumentError("must be at least 1", field="samples_per_phase")
        phases = tuple(float(p) for p in self.phases)
        if len(phases) == 0 or any(not 0 <= p < np.pi for p in phases):
            raise ArgumentError("must be a nonempty list of angles in [0, pi)", field="phases")
        object.__setattr__(self, "phases", phases)
        if self.cutoff < 2:
            raise ArgumentError("must be at least 2", field="cutoff")
        if self.seed < 0:
            raise ArgumentError("must be nonnegative", field="seed")

    @property
    def splitter(self) -> BeamSplitter:
        return BeamSplitter(self.split_mu, self.split_lambda)

    def tomography_settings(self) -> TomographySettings:
        return TomographySettings(
            cutoff=self.cutoff, efficiency_compensation=self.detection_efficiency
        )


class SubtractionMechanism(Enum):
    NONE = "none"
    EXACT = "exact"
    PHYSICAL = "physical"


class ShadowMechanism(Enum):
    EXACT_ANNIHILATION = "exact"
    ATTENUATION = "attenuation"


def two_mode_squeezed_vacuum(squeezing: float, cutoff: int) -> PureState:
    """sum_n sqrt(1 - s^2) s^n |n, n>, renormalized at the cutoff."""
    leakage = squeezing ** (2 * (cutoff + 1))
    if leakage >= HERALD_LEAKAGE_LIMIT:
        raise TruncationRiskError(
            f"squeezing {squeezing} loses {leakage:.2e} beyond cutoff {cutoff}", field="squeezing"
        )
    n = np.arange(cutoff + 1)
    amps = np.diag(np.sqrt(1 - squeezing**2) * squeezing**n)
    state, _ = normalize(PureState(ModeSet(2, cutoff), amps))
    return state  # type: ignore[return-value]


def heralded_fock_prep(
    config: ExperimentConfig, target_N: int, herald: bool = True
) -> tuple[MixedState, float]:
    """
    Herald a one- or two-photon Fock state in the signal arm of a two-mode squeezed vacuum.
    For two photons the idler is split 50:50 onto two detectors and both must click.
    With ``herald=False`` the idler is simply discarded (thermal signal).

    :return: The signal state and the herald probability.
    """
    if target_N not in (1, 2):
        raise ArgumentError(f"only 1 or 2 photons can be heralded, got {target_N}", field="target_N")
    tmsv = two_mode_squeezed_vacuum(config.squeezing, config.cutoff)
    if not herald:
        signal, _ = normalize(partial_trace(tmsv, [0]))
        return signal, 1.0  # type: ignore[return-value]
    det = config.herald_detector
    if target_N == 1:
        signal, probability = condition_on_click(tmsv, 1, det)
    else:
        idlers = apply_beamsplitter(embed(tmsv, 1), 1, 2, BeamSplitter.balanced())
        after_first, p_first = condition_on_click(idlers, 2, det)
        signal, p_second = condition_on_click(after_first, 1, det)
        probability = p_first * p_second
    logger.info(f"Heralded {target_N}-photon state with probability {probability:.4g}.")
    return signal, probability


def bob_mean_photons(N: int, lambda_sq: float, subtracted: bool) -> float:
    """Mean photon number in the second arm: N |lam|^2, or (N - 1) |lam|^2 after subtraction."""
    check_probability(lambda_sq, "lambda_sq", open_low=True, open_high=True)
    if N < 0:
        raise ArgumentError("must be nonnegative", field="N")
    if subtracted and N < 1:
        raise ArgumentError("cannot subtract a photon from the vacuum", field="N")
    return float((N - 1 if subtracted else N) * lambda_sq)


def simulate_bob_mean_photons(
    N: int,
    lambda_sq: float,
    subtracted: bool,
    tap_reflectivity: float | None = None,
    detector: DetectorModel | None = None,
) -> float:
    """
    :func:`bob_mean_photons` by simulation: |N> is split, the first arm optionally loses a
    photon (exactly, or through a tap of ``tap_reflectivity`` if given) and the second arm's
    mean photon number is returned.
    """
    bob_mean_photons(N, lambda_sq, subtracted)
    state: State = fock_state(ModeSet(1, max(N, 1)), (N,))
    bs = BeamSplitter(np.sqrt(1 - lambda_sq), np.sqrt(lambda_sq))
    state = apply_beamsplitter(embed(state, 1), 0, 1, bs)
    if subtracted:
        if tap_reflectivity is None:
            state, _ = exact_annihilation(state, 0)
        else:
            state, _ = physical_subtraction(state, 0, tap_reflectivity, detector or DetectorModel())
    return mean_photon_number(state, 1)


@dataclass(eq=False)
class BranchReport:
    """One row of the tomography figure: with or without the subtraction click."""

    name: str
    reference_photons: int
    click_probability: float
    true_distribution: np.ndarray
    reconstructed_distribution: np.ndarray
    fidelity_true: float
    fidelity_reconstructed: float
    orthogonal_population: float
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    theory_density: np.ndarray
    tomography: TomographyResult = field(repr=False)

    def histogram_rows(self) -> list[tuple[float, float, int, float]]:
        """(bin_left, bin_right, count, theory_density) rows."""
        return [
            (float(lo), float(hi), int(count), float(theory))
            for lo, hi, count, theory in zip(
                self.histogram_edges[:-1],
                self.histogram_edges[1:],
                self.histogram_counts,
                self.theory_density,
            )
        ]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "reference_photons": self.reference_photons,
            "click_probability": self.click_probability,
            "true_distribution": self.true_distribution.tolist(),
            "reconstructed_distribution": self.reconstructed_distribution.tolist(),
            "fidelity_true": self.fidelity_true,
            "fidelity_reconstructed": self.fidelity_reconstructed,
            "orthogonal_population": self.orthogonal_population,
            "tomography_iterations": self.tomography.iterations_used,
            "tomography_converged": self.tomography.converged,
            "final_loglik": float(self.tomography.loglik_trace[-1]),
        }


@dataclass(eq=False)
class VampireReport:
    target_N: int
    mechanism: SubtractionMechanism
    herald_probability: float
    branches: dict[str, BranchReport]
    config: ExperimentConfig

    def to_dict(self) -> dict:
        config = asdict(self.config)
        config["split_mu"] = complex_to_pair(self.config.split_mu)
        config["split_lambda"] = complex_to_pair(self.config.split_lambda)
        config["phases"] = list(self.config.phases)
        return {
            "target_N": self.target_N,
            "mechanism": self.mechanism.value,
            "herald_probability": self.herald_probability,
            "joint_probabilities": {
                name: self.herald_probability * branch.click_probability
                for name, branch in self.branches.items()
            },
            "branches": {name: branch.to_dict() for name, branch in self.branches.items()},
            "config": config,
        }


def _branch_seeds(seed: int, count: int) -> list[int]:
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(count)]


def _measure_branch(
    name: str,
    arms: State,
    config: ExperimentConfig,
    reference_photons: int,
    click_probability: float,
    seed: int,
) -> BranchReport:
    recombined = apply_beamsplitter(as_mixed(arms), 0, 1, config.splitter.inverse())
    orthogonal = photon_number_probabilities(recombined, 1)
    orthogonal_population = float(1 - orthogonal[0] / orthogonal.sum())
    mode_a, _ = normalize(partial_trace(recombined, [0]))
    detected = attenuate(mode_a, 0, AttenuationChannel(1 - config.detection_efficiency))

    data = sample_quadratures(detected, config.phases, config.samples_per_phase, seed, name)
    settings = config.tomography_settings()
    result = maxlik_reconstruct(data, settings)

    reference = fock_state(ModeSet(1, config.cutoff), (reference_photons,))
    edges, counts = histogram(data, settings.bin_width, settings.limit)
    centers = (edges[:-1] + edges[1:]) / 2
    theory = np.mean([marginal_distribution(detected, phase, centers) for phase in config.phases], axis=0)
    report = BranchReport(
        name=name,
        reference_photons=reference_photons,
        click_probability=click_probability,
        true_distribution=photon_number_distribution(mode_a),  # type: ignore[arg-type]
        reconstructed_distribution=photon_number_distribution(result),
        fidelity_true=fidelity(mode_a, reference),
        fidelity_reconstructed=fidelity(result.rho, reference),
        orthogonal_population=orthogonal_population,
        histogram_edges=edges,
        histogram_counts=counts,
        theory_density=theory,
        tomography=result,
    )
    logger.info(
        f"Branch '{name}': fidelity with |{reference_photons}> is {report.fidelity_true:.4f} "
        f"(reconstructed {report.fidelity_reconstructed:.4f})."
    )
    return report


def vampire_pipeline(
    config: ExperimentConfig,
    target_N: int,
    mechanism: SubtractionMechanism = SubtractionMechanism.PHYSICAL,
) -> VampireReport:
    """
    Herald |N>, split it, subtract a photon from the first arm, recombine, detect with loss and
    reconstruct by homodyne tomography. The unconditioned branch skips the subtraction; the
    conditioned branch (absent for ``SubtractionMechanism.NONE``) is referenced to |N - 1>.
    """
    signal, herald_probability = heralded_fock_prep(config, target_N)
    arms = apply_beamsplitter(embed(signal, 1), 0, 1, config.splitter)
    seeds = _branch_seeds(config.seed, 2)
    branches = {
        "unconditioned": _measure_branch(
            "unconditioned", arms, config, target_N, 1.0, seeds[0]
        )
    }
    if mechanism is not SubtractionMechanism.NONE:
        if mechanism is SubtractionMechanism.EXACT:
            subtracted, probability = exact_annihilation(arms, 0)
        else:
            subtracted, probability = physical_subtraction(
                arms, 0, config.tap_reflectivity, config.subtraction_detector
            )
        branches["conditioned"] = _measure_branch(
            "conditioned", subtracted, config, target_N - 1, probability, seeds[1]
        )
    return VampireReport(target_N, mechanism, herald_probability, branches, config)


def gaussian_profile(pixels: int, width: float = 0.6) -> np.ndarray:
    """Normalized Gaussian beam amplitudes sampled on ``pixels`` points across [-1, 1]."""
    if pixels < 1:
        raise ArgumentError("must be at least 1", field="pixels")
    x = np.linspace(-1, 1, pixels) if pixels > 1 else np.zeros(1)
    amps = np.exp(-(x**2) / (2 * width**2))
    return amps / np.linalg.norm(amps)


@dataclass(eq=False)
class ShadowReport:
    pixels: int
    coefficients: np.ndarray
    cloud: list[int]
    mechanism: ShadowMechanism
    gamma: float
    input_profile: np.ndarray
    output_profile: np.ndarray
    ratios: np.ndarray
    contrast: float
    covered_ratio: float
    uncovered_ratio: float
    heralding_weight: float

    @property
    def total_input(self) -> float:
        return float(self.input_profile.sum())

    @property
    def total_output(self) -> float:
        return float(self.output_profile.sum())

    def to_dict(self) -> dict:
        return {
            "pixels": self.pixels,
            "coefficients": [complex_to_pair(c) for c in self.coefficients],
            "cloud": self.cloud,
            "mechanism": self.mechanism.value,
            "gamma": self.gamma,
            "input_profile": self.input_profile.tolist(),
            "output_profile": self.output_profile.tolist(),
            "ratios": self.ratios.tolist(),
            "contrast": self.contrast,
            "covered_ratio": self.covered_ratio,
            "uncovered_ratio": self.uncovered_ratio,
            "total_input": self.total_input,
            "total_output": self.total_output,
            "heralding_weight": self.heralding_weight,
        }

    def to_ccd_image(self, scale: int = 16) -> Image.Image:
        """
        Grayscale frame: the top band is the input intensity per pixel, the bottom band the
        output, both on the scale of the brightest input pixel.
        """
        peak = self.input_profile.max() if self.input_profile.max() > 0 else 1.0
        bands = np.vstack([self.input_profile, self.output_profile]) / peak
        levels = np.clip(np.round(bands * 255), 0, 255).astype(np.uint8)
        frame = np.kron(levels, np.ones((scale, scale), dtype=np.uint8))
        return Image.fromarray(frame)


def shadow_demo(
    K: int,
    coefficients: Sequence[complex],
    subset: Iterable[int],
    mechanism: ShadowMechanism,
    input_N: int,
    gamma: float = 0.5,
) -> ShadowReport:
    """
    Spread |input_N> over K pixels with profile c and act on the cloud mode covering ``subset``:
    either photon annihilation (conditioned on the click) or unconditional absorption with loss
    fraction ``gamma``. Reports per-pixel mean photon numbers and the shadow contrast
    max_k |I_k / I_k^in - mean ratio|.
    """
    if input_N < 0:
        raise ArgumentError("must be nonnegative", field="input_N")
    c = np.asarray(coefficients, dtype=np.complex128)
    plan = cloud_mode_rotation(K, c, subset)
    cloud = list(OrderedSet(int(k) for k in subset))
    state = split_mode(fock_state(ModeSet(1, max(input_N, 1)), (input_N,)), c)
    input_profile = np.array([mean_photon_number(state, k) for k in range(K)])
    if mechanism is ShadowMechanism.EXACT_ANNIHILATION:
        out, weight = exact_annihilation(state, rotation=plan)
    else:
        out = attenuate(state, None, AttenuationChannel(gamma), rotation=plan)
        weight = 1.0
    output_profile = np.array([mean_photon_number(out, k) for k in range(K)])

    lit = input_profile > 1e-15
    ratios = np.divide(output_profile, input_profile, out=np.zeros(K), where=lit)
    contrast = float(np.max(np.abs(ratios[lit] - ratios[lit].mean()))) if lit.any() else 0.0
    in_cloud = np.zeros(K, dtype=bool)
    in_cloud[cloud] = True
    covered = ratios[lit & in_cloud]
    uncovered = ratios[lit & ~in_cloud]
    report = ShadowReport(
        pixels=K,
        coefficients=c,
        cloud=cloud,
        mechanism=mechanism,
        gamma=float(gamma),
        input_profile=input_profile,
        output_profile=output_profile,
        ratios=ratios,
        contrast=contrast,
        covered_ratio=float(covered.mean()) if covered.size else float("nan"),
        uncovered_ratio=float(uncovered.mean()) if uncovered.size else float("nan"),
        heralding_weight=float(weight),
    )
    logger.info(f"Shadow demo ({mechanism.value}): contrast {contrast:.3e}.")
    return report
