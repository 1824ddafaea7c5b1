"""Non-unitary operations: photon annihilation, tap-and-click subtraction, loss, click detectors."""

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
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import comb

from fockvampire.errors import ArgumentError, ImpossibleEventError
from fockvampire.fock_core import (
    MixedState,
    ModeSet,
    State,
    annihilation_matrix,
    apply_kraus,
    apply_operator,
    as_mixed,
    embed,
    normalize,
)
from fockvampire.linear_optics import BeamSplitter, InterferometerPlan, apply_beamsplitter
from fockvampire.util import ComplexArray, RealArray, check_probability

logger = logging.getLogger(__name__)

IMPOSSIBLE_EVENT_LEVEL = 1e-15


@dataclass(frozen=True)
class DetectorModel:
    """
    Click detector (SPCM). Dark counts are independent per-pulse events OR-ed with true
    detections.

    :param efficiency:          Probability that each incident photon is registered.
    :param dark_prob:           Per-pulse probability of a click without any photon.
    :param number_resolving:    Diagnostic mode: the click element becomes "exactly one count".
    """

    efficiency: float = 1.0
    dark_prob: float = 0.0
    number_resolving: bool = False

    def __post_init__(self):
        check_probability(self.efficiency, "efficiency")
        check_probability(self.dark_prob, "dark_prob", open_high=True)


@dataclass(frozen=True)
class AttenuationChannel:
    """
    Photon loss with the integrated loss fraction ``gamma`` (0 = transparent, 1 = opaque).
    """

    gamma: float

    def __post_init__(self):
        check_probability(self.gamma, "gamma")

    def kraus(self, cutoff: int) -> list[ComplexArray]:
        """E_k with <n-k|E_k|n> = sqrt(C(n, k) (1-gamma)^(n-k) gamma^k)."""
        n = np.arange(cutoff + 1)
        ops = []
        for k in range(cutoff + 1):
            op = np.zeros((cutoff + 1, cutoff + 1), dtype=np.complex128)
            src = n[k:]
            op[src - k, src] = np.sqrt(
                comb(src, k) * (1 - self.gamma) ** (src - k) * self.gamma**k
            )
            ops.append(op)
        return ops


class LossOrdering(Enum):
    STANDARD = "standard"
    AS_PRINTED = "as_printed"


class ClickPovm(NamedTuple):
    no_click: ComplexArray
    click: ComplexArray
    multi_click: ComplexArray


def click_povm(det: DetectorModel, dim: int) -> ClickPovm:
    """
    Diagonal POVM of a click detector on photon numbers 0..dim-1. For a bucket detector
    ``multi_click`` is zero; for the number-resolving diagnostic ``click`` is the probability of
    exactly one count and ``multi_click`` the rest.
    """
    n = np.arange(dim)
    miss = 1 - det.efficiency
    no_click = (1 - det.dark_prob) * miss**n
    if not det.number_resolving:
        click = 1 - no_click
        multi = np.zeros(dim)
    else:
        single_true = np.where(n > 0, n * det.efficiency * miss ** np.maximum(n - 1, 0), 0.0)
        click = (1 - det.dark_prob) * single_true + det.dark_prob * miss**n
        multi = 1 - no_click - click
    return ClickPovm(
        np.diag(no_click).astype(np.complex128),
        np.diag(click).astype(np.complex128),
        np.diag(multi).astype(np.complex128),
    )


def _measure_and_discard(rho: MixedState, mode: int, weights: RealArray) -> MixedState:
    """Unnormalized Tr_mode[(E (x) 1) rho] for a diagonal element E = diag(weights)."""
    count = rho.modes.mode_count
    moved = np.moveaxis(rho.tensor, (mode, count + mode), (0, 1))
    reduced = np.einsum("ii...,i->...", moved, weights)
    modes = ModeSet(count - 1, rho.modes.cutoff)
    mat = reduced.reshape(modes.dim, modes.dim)
    return MixedState(modes, (mat + mat.conj().T) / 2)


def _check_multimode(rho: MixedState, mode: int) -> int:
    mode = rho.modes.check_mode(mode)
    if rho.modes.mode_count < 2:
        raise ArgumentError("conditioning needs a mode to keep besides the detected one", field="mode")
    return mode


def condition_on_click(state: State, mode: int, det: DetectorModel) -> tuple[MixedState, float]:
    """
    Project ``mode`` onto the click outcome of ``det`` and trace it out.

    :return: The normalized conditional state of the remaining modes and the click probability.
    """
    rho = as_mixed(state)
    mode = _check_multimode(rho, mode)
    povm = click_povm(det, rho.modes.levels)
    branch = _measure_and_discard(rho, mode, np.real(np.diag(povm.click)))
    probability = branch.trace / rho.trace
    if probability < IMPOSSIBLE_EVENT_LEVEL:
        raise ImpossibleEventError(
            f"click probability {probability:.3e} on mode {mode} is zero", field="mode"
        )
    conditional, _ = normalize(branch)
    logger.debug(f"Click on mode {mode}: probability {probability:.6g}.")
    return (
        MixedState(conditional.modes, conditional.matrix, trace_weight=rho.trace_weight * probability),  # type: ignore[union-attr]
        probability,
    )


def _tapped(state: State, mode: int, tap_reflectivity: float) -> tuple[MixedState, int]:
    rho = as_mixed(state)
    mode = rho.modes.check_mode(mode)
    tap = rho.modes.mode_count
    extended = embed(rho, 1)
    extended = apply_beamsplitter(extended, mode, tap, BeamSplitter.from_reflectivity(tap_reflectivity))
    return extended, tap  # type: ignore[return-value]


def physical_subtraction(
    state: State, mode: int, tap_reflectivity: float, det: DetectorModel
) -> tuple[MixedState, float]:
    """
    Photon subtraction as done in the lab: a weak beamsplitter taps ``tap_reflectivity`` of the
    energy of ``mode`` onto ``det``; the state is conditioned on a click and the tap discarded.
    For a vanishing tap and an ideal detector this converges to :func:`exact_annihilation`.
    """
    check_probability(tap_reflectivity, "tap_reflectivity", open_low=True, open_high=True)
    extended, tap = _tapped(state, mode, tap_reflectivity)
    return condition_on_click(extended, tap, det)


def unconditional_map(
    state: State, mode: int, tap_reflectivity: float, det: DetectorModel
) -> MixedState:
    """The subtraction apparatus with all detector outcomes summed: a trace-preserving map."""
    check_probability(tap_reflectivity, "tap_reflectivity", open_high=True)
    extended, tap = _tapped(state, mode, tap_reflectivity)
    povm = click_povm(det, extended.modes.levels)
    branches = [
        _measure_and_discard(extended, tap, np.real(np.diag(element))) for element in povm
    ]
    total = sum((b.matrix for b in branches), start=np.zeros_like(branches[0].matrix))
    return MixedState(branches[0].modes, total, trace_weight=as_mixed(state).trace_weight)


def _resolve_mode(mode: int | None, rotation: InterferometerPlan | None) -> int:
    if mode is not None:
        return mode
    if rotation is None or rotation.cloud_mode is None:
        raise ArgumentError("a mode or a cloud rotation is required", field="mode")
    return rotation.cloud_mode


def exact_annihilation(
    state: State, mode: int | None = None, rotation: InterferometerPlan | None = None
) -> tuple[State, float]:
    """
    Apply â to ``mode`` and renormalize. With ``rotation`` the annihilation acts on the rotated
    (cloud) mode: the plan is applied, â acts on ``mode`` (default: the plan's cloud mode) and
    the inverse plan is applied.

    :return: The normalized state and the relative heralding weight <n_mode>.
    """
    mode = _resolve_mode(mode, rotation)
    if rotation is not None:
        state = rotation.apply(state)
    before = state.squared_norm if not isinstance(state, MixedState) else state.trace
    lowered = apply_operator(state, mode, annihilation_matrix(state.modes.cutoff))
    result, norm = normalize(lowered)
    weight = (norm**2 if not isinstance(lowered, MixedState) else norm) / before
    if rotation is not None:
        result = rotation.inverse().apply(result)
    logger.debug(f"Exact annihilation on mode {mode}: weight {weight:.6g}.")
    return result, float(weight)


def attenuate(
    state: State,
    mode: int | None,
    ch: AttenuationChannel,
    rotation: InterferometerPlan | None = None,
) -> MixedState:
    """Photon loss on ``mode`` (or on the cloud mode of ``rotation``), in Kraus form."""
    mode = _resolve_mode(mode, rotation)
    rho = as_mixed(state)
    if rotation is not None:
        rho = rotation.apply(rho)  # type: ignore[assignment]
    out = apply_kraus(rho, mode, ch.kraus(rho.modes.cutoff))
    if rotation is not None:
        out = rotation.inverse().apply(out)  # type: ignore[assignment]
    return MixedState(out.modes, out.matrix, trace_weight=rho.trace_weight)


def _lift(op: np.ndarray, mode: int, modes: ModeSet) -> ComplexArray:
    before = np.eye(modes.levels**mode)
    after = np.eye(modes.levels ** (modes.mode_count - mode - 1))
    return np.kron(np.kron(before, op), after)


def loss_generator(state: State, mode: int, ordering: LossOrdering = LossOrdering.STANDARD) -> ComplexArray:
    """
    d rho / dz of the loss dissipator on ``mode``. The standard ordering uses a^dagger a in the
    anticommutator and is traceless; ``AS_PRINTED`` uses a a^dagger and is not.
    Meaningful for states without support at the cutoff.
    """
    rho = as_mixed(state)
    mode = rho.modes.check_mode(mode)
    a = _lift(annihilation_matrix(rho.modes.cutoff), mode, rho.modes)
    ad = a.conj().T
    anti = ad @ a if ordering is LossOrdering.STANDARD else a @ ad
    return a @ rho.matrix @ ad - 0.5 * (anti @ rho.matrix + rho.matrix @ anti)
