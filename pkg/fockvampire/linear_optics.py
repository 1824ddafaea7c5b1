"""
Passive linear optics: two-mode beamsplitters, chains of them, and the basis change that
isolates a "cloud" mode spread over several pixel modes.

Convention: a beamsplitter (mu, lam) acting on modes (i, j) defines the output modes through

    a   = mu a_i + lam a_j
    a_p = lam* a_i - mu* a_j

where a is the mode entering port i and a_p the (orthogonal) mode entering port j. Creation
operators of the input ports therefore map as

    a_i^dagger -> mu* a_i^dagger + lam* a_j^dagger
    a_j^dagger -> lam a_i^dagger - mu a_j^dagger
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
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from ordered_set import OrderedSet
from scipy.special import comb, gammaln

from fockvampire.errors import ArgumentError, TruncationWarning
from fockvampire.fock_core import (
    LEAKAGE_WARN_LEVEL,
    MixedState,
    PureState,
    State,
    embed,
)
from fockvampire.util import NORM_TOL, ComplexArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BeamSplitter:
    """
    Lossless two-mode transformation. ``|mu|^2`` is the fraction of the input mode's energy
    routed to the first output, ``|lam|^2`` the fraction routed to the second.
    """

    mu: complex
    lam: complex

    def __post_init__(self):
        object.__setattr__(self, "mu", complex(self.mu))
        object.__setattr__(self, "lam", complex(self.lam))
        total = abs(self.mu) ** 2 + abs(self.lam) ** 2
        if abs(total - 1.0) > NORM_TOL:
            raise ArgumentError(f"|mu|^2 + |lam|^2 must be 1, got {total!r}", field="mu")

    @classmethod
    def balanced(cls) -> BeamSplitter:
        return cls(1 / np.sqrt(2), 1 / np.sqrt(2))

    @classmethod
    def from_reflectivity(cls, reflectivity: float) -> BeamSplitter:
        """Beamsplitter sending the energy fraction ``reflectivity`` into the second port."""
        if not 0 <= reflectivity <= 1:
            raise ArgumentError(f"must be in [0, 1], got {reflectivity}", field="reflectivity")
        return cls(np.sqrt(1 - reflectivity), np.sqrt(reflectivity))

    @property
    def distributes(self) -> bool:
        """True if both outputs receive part of the input (nonvanishing mu and lam)."""
        return self.mu != 0 and self.lam != 0

    @property
    def creation_matrix(self) -> ComplexArray:
        """Row k holds the images of input port k's creation operator on the output ports."""
        return np.array(
            [[self.mu.conjugate(), self.lam.conjugate()], [self.lam, -self.mu]],
            dtype=np.complex128,
        )

    def inverse(self) -> BeamSplitter:
        return BeamSplitter(self.mu.conjugate(), self.lam)


@lru_cache(maxsize=64)
def _fock_block(mu: complex, lam: complex, cutoff: int) -> ComplexArray:
    """
    Fock-basis matrix elements block[p, q, a, b] = <p, q| U |a, b>, built by expanding
    (u00 c_i + u01 c_j)^a (u10 c_i + u11 c_j)^b over photon routings. Outputs beyond the cutoff
    are omitted.
    """
    (u00, u01), (u10, u11) = BeamSplitter(mu, lam).creation_matrix
    levels = cutoff + 1
    block = np.zeros((levels,) * 4, dtype=np.complex128)
    for a in range(levels):
        for b in range(levels):
            for k in range(a + 1):
                for l in range(b + 1):
                    p = k + l
                    q = a + b - p
                    if p > cutoff or q > cutoff:
                        continue
                    routing = (
                        comb(a, k, exact=True)
                        * comb(b, l, exact=True)
                        * u00**k
                        * u01 ** (a - k)
                        * u10**l
                        * u11 ** (b - l)
                    )
                    scale = np.exp(
                        0.5 * (gammaln(p + 1) + gammaln(q + 1) - gammaln(a + 1) - gammaln(b + 1))
                    )
                    block[p, q, a, b] += routing * scale
    block.flags.writeable = False
    return block


def _apply_block(tensor: np.ndarray, block: np.ndarray, i: int, j: int) -> np.ndarray:
    moved = np.moveaxis(tensor, (i, j), (0, 1))
    out = np.tensordot(block, moved, axes=([2, 3], [0, 1]))
    return np.moveaxis(out, (0, 1), (i, j))


def apply_beamsplitter(state: State, i: int, j: int, bs: BeamSplitter) -> State:
    """
    Apply ``bs`` to modes ``i`` and ``j``. Amplitude that would end up above the cutoff is dropped
    and reported as ``leakage`` (pure states) with a :class:`TruncationWarning`.
    """
    i = state.modes.check_mode(i)
    j = state.modes.check_mode(j)
    if i == j:
        raise ArgumentError("beamsplitter modes must differ", field="j")
    block = _fock_block(bs.mu, bs.lam, state.modes.cutoff)
    if isinstance(state, PureState):
        out = _apply_block(state.amplitudes, block, i, j)
        leakage = max(0.0, state.squared_norm - float(np.sum(np.abs(out) ** 2)))
        result: State = PureState(state.modes, out, norm_weight=state.norm_weight, leakage=leakage)
    else:
        count = state.modes.mode_count
        tensor = _apply_block(state.tensor, block, i, j)
        tensor = _apply_block(tensor, block.conj(), count + i, count + j)
        mat = tensor.reshape(state.modes.dim, state.modes.dim)
        leakage = max(0.0, state.trace - float(np.trace(mat).real))
        result = MixedState(state.modes, (mat + mat.conj().T) / 2, trace_weight=state.trace_weight)
    if leakage > LEAKAGE_WARN_LEVEL:
        warnings.warn(
            f"Beamsplitter on modes ({i}, {j}) dropped {leakage:.3e} at cutoff {state.modes.cutoff}.",
            TruncationWarning,
            stacklevel=2,
        )
    return result


Step = tuple[int, int, BeamSplitter]


@dataclass(frozen=True)
class InterferometerPlan:
    """
    An ordered list of beamsplitter applications. ``cloud_mode`` is set by
    :func:`cloud_mode_rotation` and names the computational mode the cloud mode is rotated onto.
    """

    steps: tuple[Step, ...] = ()
    cloud_mode: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for i, j, _ in self.steps:
            if i == j or i < 0 or j < 0:
                raise ArgumentError(f"invalid mode pair ({i}, {j})", field="steps")

    def __len__(self):
        return len(self.steps)

    def apply(self, state: State) -> State:
        for i, j, bs in self.steps:
            state = apply_beamsplitter(state, i, j, bs)
        return state

    def inverse(self) -> InterferometerPlan:
        return InterferometerPlan(
            tuple((i, j, bs.inverse()) for i, j, bs in reversed(self.steps)),
            cloud_mode=self.cloud_mode,
        )

    def mode_matrix(self, mode_count: int) -> ComplexArray:
        """
        Net linear map on creation operators: input mode m's creation operator becomes
        sum_n M[m, n] a_n^dagger.
        """
        net = np.eye(mode_count, dtype=np.complex128)
        for i, j, bs in self.steps:
            step = np.eye(mode_count, dtype=np.complex128)
            step[np.ix_([i, j], [i, j])] = bs.creation_matrix
            net = net @ step
        return net


def _normalized_coefficients(coefficients: Sequence[complex]) -> ComplexArray:
    c = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
    if c.size < 1:
        raise ArgumentError("at least one coefficient is required", field="coefficients")
    total = float(np.sum(np.abs(c) ** 2))
    if abs(total - 1.0) > 1e-10:
        raise ArgumentError(f"sum |c_k|^2 must be 1, got {total!r}", field="coefficients")
    return c


def split_plan(coefficients: Sequence[complex], targets: Sequence[int] | None = None) -> InterferometerPlan:
    """
    Beamsplitter chain that maps the mode ``targets[0]`` onto sum_k c_k a_targets[k]
    (the other target modes must hold vacuum).
    """
    c = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
    targets = list(range(c.size)) if targets is None else list(targets)
    tails = np.sqrt(np.cumsum((np.abs(c) ** 2)[::-1])[::-1])
    steps: list[Step] = []
    for k in range(c.size - 1):
        if tails[k] <= NORM_TOL:
            break
        mu = c[k] / tails[k]
        lam = c[-1] / tails[k] if k == c.size - 2 else tails[k + 1] / tails[k]
        steps.append((targets[k], targets[k + 1], BeamSplitter(mu, lam)))
    return InterferometerPlan(tuple(steps))


def split_mode(state: State, coefficients: Sequence[complex]) -> State:
    """
    Distribute a single-mode state over K pixel modes so that a = sum_k c_k a_k.
    Pixel k then carries <n> |c_k|^2 photons on average.
    """
    if state.modes.mode_count != 1:
        raise ArgumentError("split_mode expects a single-mode state", field="state")
    c = _normalized_coefficients(coefficients)
    plan = split_plan(c)
    logger.debug(f"Splitting over {c.size} pixels with {len(plan)} beamsplitters.")
    return plan.apply(embed(state, c.size - 1))


def cloud_mode_rotation(
    pixels: int, coefficients: Sequence[complex], subset: Iterable[int]
) -> InterferometerPlan:
    """
    Givens chain rotating the cloud mode a_1 ~ sum_{k in S} c_k a_k onto the first pixel of
    ``subset``. Applying the plan, acting on that pixel and applying ``plan.inverse()`` acts on
    the cloud mode.

    :param pixels:          Number of pixel modes K.
    :param coefficients:    Beam profile c over the K pixels.
    :param subset:          Pixels S covered by the cloud (a nonempty strict subset).
    """
    c = _normalized_coefficients(coefficients)
    if c.size != pixels:
        raise ArgumentError(f"expected {pixels} coefficients, got {c.size}", field="coefficients")
    cloud = OrderedSet(int(k) for k in subset)
    if len(cloud) == 0:
        raise ArgumentError("cloud subset must not be empty", field="subset")
    if len(cloud) >= pixels:
        raise ArgumentError("cloud subset must be a strict subset of the pixels", field="subset")
    for k in cloud:
        if not 0 <= k < pixels:
            raise ArgumentError(f"pixel {k} out of range [0, {pixels - 1}]", field="subset")
    restricted = c[list(cloud)]
    weight = float(np.linalg.norm(restricted))
    if weight <= NORM_TOL:
        raise ArgumentError("beam profile vanishes on the cloud subset", field="subset")
    spread = split_plan(restricted / weight, list(cloud))
    return InterferometerPlan(spread.inverse().steps, cloud_mode=cloud[0])
