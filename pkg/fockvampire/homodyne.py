"""
Quadrature statistics of single-mode states and synthetic balanced homodyne data.

Convention: x = (a + a^dagger) / sqrt(2), so the vacuum has variance 1/2 and
<x_theta|n> = exp(i n theta) psi_n(x).
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
import os
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from fockvampire.errors import ArgumentError
from fockvampire.fock_core import State, as_mixed, normalize
from fockvampire.util import RealArray, frozen_array

logger = logging.getLogger(__name__)

GRID_LIMIT = 6.0
SAMPLING_STEP = 0.005
DEFAULT_PHASE_COUNT = 12


@dataclass(frozen=True)
class QuadratureSample:
    phase: float
    value: float

    def __post_init__(self):
        if not 0 <= self.phase < np.pi:
            raise ArgumentError(f"phase must be in [0, pi), got {self.phase}", field="phase")
        if not np.isfinite(self.value):
            raise ArgumentError("quadrature value must be finite", field="value")


@dataclass(frozen=True, eq=False)
class QuadratureDataset:
    """
    Homodyne samples stored column-wise; ``samples`` gives the row view.
    """

    phases: RealArray
    values: RealArray
    seed: int
    source_label: str = ""

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=np.float64).reshape(-1)
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if phases.shape != values.shape:
            raise ArgumentError("phases and values differ in length", field="values")
        if np.any((phases < 0) | (phases >= np.pi)):
            raise ArgumentError("phases must be in [0, pi)", field="phases")
        if not np.all(np.isfinite(values)):
            raise ArgumentError("quadrature values must be finite", field="values")
        object.__setattr__(self, "phases", frozen_array(phases, np.float64))
        object.__setattr__(self, "values", frozen_array(values, np.float64))

    @classmethod
    def from_samples(
        cls, samples: Sequence[QuadratureSample], seed: int, source_label: str = ""
    ) -> QuadratureDataset:
        return cls(
            np.array([s.phase for s in samples]),
            np.array([s.value for s in samples]),
            seed,
            source_label,
        )

    def __len__(self):
        return int(self.values.size)

    @property
    def samples(self) -> list[QuadratureSample]:
        return [QuadratureSample(float(p), float(v)) for p, v in zip(self.phases, self.values)]


def default_phases(count: int = DEFAULT_PHASE_COUNT) -> RealArray:
    return np.arange(count) * np.pi / count


def sampling_grid(limit: float = GRID_LIMIT, step: float = SAMPLING_STEP) -> RealArray:
    return np.linspace(-limit, limit, int(round(2 * limit / step)) + 1)


def wavefunction_table(max_n: int, x) -> RealArray:
    """Rows psi_0(x) .. psi_max_n(x), by the three-term recurrence."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    table = np.zeros((max_n + 1, x.size))
    table[0] = np.pi**-0.25 * np.exp(-(x**2) / 2)
    if max_n >= 1:
        table[1] = np.sqrt(2) * x * table[0]
    for n in range(1, max_n):
        table[n + 1] = (np.sqrt(2) * x * table[n] - np.sqrt(n) * table[n - 1]) / np.sqrt(n + 1)
    return table


def quadrature_wavefunction(n: int, x):
    """Hermite-Gaussian <x|n>; scalar in, scalar out."""
    if n < 0:
        raise ArgumentError("photon number must be nonnegative", field="n")
    values = wavefunction_table(n, x)[n]
    return float(values[0]) if np.ndim(x) == 0 else values


def _single_mode(state: State):
    if state.modes.mode_count != 1:
        raise ArgumentError("homodyne statistics need a single-mode state", field="state")
    rho, _ = normalize(as_mixed(state))
    return rho


def marginal_distribution(state: State, phase: float, grid) -> RealArray:
    """Quadrature probability density pr(x | theta) on ``grid``."""
    rho = _single_mode(state)
    grid = np.asarray(grid, dtype=np.float64)
    n = np.arange(rho.modes.levels)
    overlaps = np.exp(1j * n * phase)[:, None] * wavefunction_table(rho.modes.cutoff, grid)
    density = np.einsum("mx,mn,nx->x", overlaps, rho.matrix, overlaps.conj())
    return np.real(density)


def sample_quadratures(
    state: State,
    phases: Sequence[float],
    count_per_phase: int,
    seed: int,
    source_label: str = "",
) -> QuadratureDataset:
    """
    Draw ``count_per_phase`` i.i.d. samples at each phase by inverse-CDF sampling on a dense grid.
    Each phase gets its own child seed, so the result depends only on (seed, phases).
    """
    if count_per_phase < 1:
        raise ArgumentError("must be at least 1", field="count_per_phase")
    _single_mode(state)
    grid = sampling_grid()
    children = np.random.SeedSequence(seed).spawn(len(phases))
    all_phases, all_values = [], []
    for phase, child in zip(phases, children):
        pdf = np.clip(marginal_distribution(state, phase, grid), 0.0, None)
        cdf = cumulative_trapezoid(pdf, grid, initial=0.0)
        cdf /= cdf[-1]
        uniform = np.random.default_rng(child).random(count_per_phase)
        all_values.append(np.interp(uniform, cdf, grid))
        all_phases.append(np.full(count_per_phase, float(phase)))
    logger.debug(f"Sampled {count_per_phase} quadratures at {len(phases)} phases (seed {seed}).")
    return QuadratureDataset(
        np.concatenate(all_phases), np.concatenate(all_values), seed, source_label
    )


def histogram(
    dataset: QuadratureDataset, bin_width: float = 0.1, limit: float = GRID_LIMIT
) -> tuple[RealArray, RealArray]:
    """Counts pooled over all phases on bins of ``bin_width`` spanning [-limit, limit]."""
    edges = np.linspace(-limit, limit, int(round(2 * limit / bin_width)) + 1)
    counts, _ = np.histogram(dataset.values, bins=edges)
    return edges, counts.astype(np.float64)


PathLike = Union[str, os.PathLike]


def dump_dataset(dataset: QuadratureDataset, path: PathLike):
    """Write "phase,value" lines at 17 significant digits under a seed/label header."""
    np.savetxt(
        Path(path),
        np.column_stack([dataset.phases, dataset.values]),
        fmt="%.17g",
        delimiter=",",
        header=f"seed={dataset.seed},source_label={dataset.source_label}",
        comments="# ",
    )


def load_dataset(path: PathLike) -> QuadratureDataset:
    """
    Read a file written by :func:`dump_dataset`.

    :raises ArgumentError: If the header or any row cannot be parsed.
    """
    path = Path(path)
    try:
        with path.open() as f:
            header = f.readline()
    except UnicodeDecodeError as err:
        raise ArgumentError(f"{path} is not a text file: {err}", field="path") from err
    if not header.startswith("# seed="):
        raise ArgumentError(f"{path} has no dataset header", field="path")
    seed_text, _, label_text = header[len("# seed=") :].rstrip("\n").partition(",")
    label = label_text[len("source_label=") :] if label_text.startswith("source_label=") else ""
    try:
        seed = int(seed_text)
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (ValueError, UnicodeDecodeError) as err:
        raise ArgumentError(f"{path} is not a quadrature dataset: {err}", field="path") from err
    if data.ndim != 2 or data.shape[1] != 2:
        raise ArgumentError(f"{path} must hold 'phase,value' rows", field="path")
    return QuadratureDataset(data[:, 0], data[:, 1], seed, label)
