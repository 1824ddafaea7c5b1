"""
Maximum-likelihood reconstruction of a single-mode density matrix from homodyne data, with
detection-loss compensation built into the measurement operators.
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
from dataclasses import asdict, dataclass
from typing import Union

import numpy as np
from sortedcollections import ValueSortedDict

from fockvampire.channels import AttenuationChannel
from fockvampire.errors import ArgumentError, IllPosedDataError
from fockvampire.fock_core import MixedState, ModeSet
from fockvampire.homodyne import GRID_LIMIT, QuadratureDataset, wavefunction_table
from fockvampire.util import ComplexArray, RealArray, matrix_to_pairs, pairs_to_matrix

logger = logging.getLogger(__name__)

INTEGRATION_LIMIT = 14.0
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(12)
_MAX_DILUTIONS = 40
_MAX_STRETCHES = 3


@dataclass(frozen=True)
class TomographySettings:
    """
    :param cutoff:                      Photon-number cutoff of the reconstruction.
    :param efficiency_compensation:     Detection efficiency folded into the POVM (1 = none).
    :param max_iterations:              Iteration cap.
    :param loglik_tolerance:            Stop once the gain of the total log-likelihood drops below.
    :param bin_width:                   Quadrature bin width.
    :param limit:                       Bins span [-limit, limit].
    """

    cutoff: int = 5
    efficiency_compensation: float = 1.0
    max_iterations: int = 2000
    loglik_tolerance: float = 1e-9
    bin_width: float = 0.1
    limit: float = GRID_LIMIT

    def __post_init__(self):
        if self.cutoff < 1:
            raise ArgumentError("must be at least 1", field="cutoff")
        if not 0 < self.efficiency_compensation <= 1:
            raise ArgumentError("must be in (0, 1]", field="efficiency_compensation")
        if self.max_iterations < 0:
            raise ArgumentError("must be nonnegative", field="max_iterations")
        if not self.loglik_tolerance > 0:
            raise ArgumentError("must be positive", field="loglik_tolerance")
        if not self.bin_width > 0:
            raise ArgumentError("must be positive", field="bin_width")
        if not self.limit > 0:
            raise ArgumentError("must be positive", field="limit")

    @property
    def bin_edges(self) -> RealArray:
        return np.linspace(
            -self.limit, self.limit, int(round(2 * self.limit / self.bin_width)) + 1
        )


@dataclass(frozen=True, eq=False)
class TomographyResult:
    rho: MixedState
    loglik_trace: RealArray
    iterations_used: int
    converged: bool
    settings: TomographySettings


def _integrated_products(low: float, high: float, cutoff: int) -> RealArray:
    """G[m, n] = integral of psi_m psi_n over [low, high] by composite Gauss-Legendre."""
    low = max(low, -INTEGRATION_LIMIT)
    high = min(high, INTEGRATION_LIMIT)
    if not high > low:
        return np.zeros((cutoff + 1, cutoff + 1))
    pieces = max(1, int(np.ceil((high - low) / 0.25)))
    edges = np.linspace(low, high, pieces + 1)
    mids = (edges[1:] + edges[:-1]) / 2
    halves = (edges[1:] - edges[:-1]) / 2
    x = (mids[:, None] + halves[:, None] * _GAUSS_NODES).ravel()
    w = (halves[:, None] * _GAUSS_WEIGHTS).ravel()
    psi = wavefunction_table(cutoff, x)
    return (psi * w) @ psi.T


def _loss_adjoint(element: np.ndarray, efficiency: float) -> ComplexArray:
    if efficiency >= 1:
        return element
    cutoff = element.shape[0] - 1
    kraus = AttenuationChannel(1 - efficiency).kraus(cutoff)
    out = sum(op.conj().T @ element @ op for op in kraus)
    return (out + out.conj().T) / 2


def _rotated(products: RealArray, phase: float) -> ComplexArray:
    phases = np.exp(-1j * np.arange(products.shape[0]) * phase)
    return phases[:, None] * products * phases.conj()[None, :]


def povm_element(phase: float, bin_interval: tuple[float, float], settings: TomographySettings) -> ComplexArray:
    """
    Measurement operator for "quadrature at ``phase`` falls in ``bin_interval``", as seen through
    a detector of efficiency ``settings.efficiency_compensation``: traces against the true
    state give the probabilities of the detected state.
    """
    low, high = bin_interval
    if not high > low:
        raise ArgumentError(f"empty bin {bin_interval}", field="bin_interval")
    products = _integrated_products(low, high, settings.cutoff)
    return _loss_adjoint(_rotated(products, phase), settings.efficiency_compensation)


def binned_povms(dataset: QuadratureDataset, settings: TomographySettings) -> tuple[ComplexArray, RealArray]:
    """
    Per-(phase, bin) POVM elements and observed counts, keeping only nonempty bins.
    """
    if len(dataset) == 0:
        raise ArgumentError("dataset is empty", field="data")
    if np.max(np.abs(dataset.values)) > settings.limit:
        raise ArgumentError(
            f"quadrature values exceed the binning range +-{settings.limit}", field="data"
        )
    edges = settings.bin_edges
    products = [
        _integrated_products(lo, hi, settings.cutoff) for lo, hi in zip(edges[:-1], edges[1:])
    ]
    elements, counts = [], []
    for phase in np.unique(dataset.phases):
        binned, _ = np.histogram(dataset.values[dataset.phases == phase], bins=edges)
        for j in np.flatnonzero(binned):
            elements.append(
                _loss_adjoint(_rotated(products[j], phase), settings.efficiency_compensation)
            )
            counts.append(binned[j])
    logger.debug(f"Binned {len(dataset)} samples into {len(counts)} nonempty POVM elements.")
    return np.array(elements), np.array(counts, dtype=np.float64)


def _probabilities(flat_povms: np.ndarray, rho: np.ndarray) -> RealArray:
    return np.real(flat_povms @ rho.T.reshape(-1))


def _normalized_step(rho: np.ndarray, step: np.ndarray) -> np.ndarray:
    out = step @ rho @ step.conj().T
    out = (out + out.conj().T) / 2
    return out / np.trace(out).real


def maxlik_iterate(
    povms: np.ndarray,
    frequencies: np.ndarray,
    settings: TomographySettings,
    initial: np.ndarray | None = None,
) -> TomographyResult:
    """
    The R rho R fixed-point iteration on an explicit POVM list.

    Each step applies rho -> N[R rho R] with R = sum_j (f_j / p_j) Pi_j / sum_j f_j. If that step
    would lower the likelihood, a diluted step N[(1 + eps R) rho (1 + eps R)] is taken instead,
    halving eps until the likelihood does not decrease. If it raises the likelihood, the stretched
    steps N[R^k rho R^k] for k = 2, 4, 8 are tried and the best one is kept.

    ``loglik_trace`` holds the mean log-likelihood per sample, starting with the initial state.
    The iteration stops once the gain of the total log-likelihood (the mean gain times the number
    of samples) drops below ``settings.loglik_tolerance``.
    """
    povms = np.asarray(povms, dtype=np.complex128)
    freqs = np.asarray(frequencies, dtype=np.float64)
    total = freqs.sum()
    if povms.ndim != 3 or povms.shape[0] != freqs.size or not total > 0:
        raise ArgumentError("povms and frequencies do not describe any data", field="data")
    dim = povms.shape[1]
    weights = freqs / total
    flat = povms.reshape(povms.shape[0], -1)
    observed = weights > 0

    rho = np.eye(dim, dtype=np.complex128) / dim if initial is None else np.array(initial, dtype=np.complex128)

    def loglik(probs: RealArray) -> float:
        if np.any(probs[observed] <= 0):
            raise IllPosedDataError("observed bins have zero predicted probability")
        return float(np.dot(weights[observed], np.log(probs[observed])))

    probs = _probabilities(flat, rho)
    current = loglik(probs)
    trace = [current]
    converged = False
    identity = np.eye(dim)
    for _ in range(settings.max_iterations):
        R = (np.divide(weights, probs, out=np.zeros_like(weights), where=observed) @ flat).reshape(dim, dim)
        candidate = _normalized_step(rho, R)
        cand_probs = _probabilities(flat, candidate)
        cand_loglik = loglik(cand_probs)
        eps = 1.0
        dilutions = 0
        while cand_loglik < current and dilutions < _MAX_DILUTIONS:
            candidate = _normalized_step(rho, identity + eps * R)
            cand_probs = _probabilities(flat, candidate)
            cand_loglik = loglik(cand_probs)
            eps /= 2
            dilutions += 1
        if cand_loglik < current:
            converged = True
            break
        if dilutions == 0 and cand_loglik > current:
            power = R
            for _ in range(_MAX_STRETCHES):
                power = power @ power
                stretched = _normalized_step(rho, power)
                stretched_probs = _probabilities(flat, stretched)
                if np.any(stretched_probs[observed] <= 0):
                    break
                stretched_loglik = loglik(stretched_probs)
                if not stretched_loglik > cand_loglik:
                    break
                candidate, cand_probs, cand_loglik = stretched, stretched_probs, stretched_loglik
        gain = (cand_loglik - current) * total
        rho, probs, current = candidate, cand_probs, cand_loglik
        trace.append(current)
        if gain < settings.loglik_tolerance:
            converged = True
            break
    iterations = len(trace) - 1
    logger.debug(
        f"MaxLik stopped after {iterations} iterations (converged={converged}, loglik={current:.9g})."
    )
    return TomographyResult(
        MixedState(ModeSet(1, dim - 1), rho),
        np.array(trace),
        iterations,
        converged,
        settings,
    )


def maxlik_reconstruct(data: QuadratureDataset, settings: TomographySettings) -> TomographyResult:
    """Reconstruct the (loss-compensated) single-mode state behind ``data``."""
    povms, counts = binned_povms(data, settings)
    logger.info(
        f"Reconstructing '{data.source_label}' from {len(data)} samples "
        f"(cutoff {settings.cutoff}, efficiency {settings.efficiency_compensation})."
    )
    return maxlik_iterate(povms, counts, settings)


def photon_number_distribution(result: Union[TomographyResult, MixedState]) -> RealArray:
    """Diagonal of the reconstructed density matrix, clipped at zero and renormalized."""
    rho = result.rho if isinstance(result, TomographyResult) else result
    diag = np.clip(np.real(np.diag(rho.matrix)), 0.0, None)
    return diag / diag.sum()


def dominant_components(distribution, count: int = 3) -> list[tuple[int, float]]:
    """The ``count`` most populated photon numbers, most populated first."""
    ranked = ValueSortedDict({n: -float(p) for n, p in enumerate(distribution)})
    return [(int(n), -v) for n, v in list(ranked.items())[:count]]


def result_to_dict(result: TomographyResult) -> dict:
    return {
        "rho": matrix_to_pairs(result.rho.matrix),
        "photon_numbers": photon_number_distribution(result).tolist(),
        "loglik_trace": result.loglik_trace.tolist(),
        "iterations_used": result.iterations_used,
        "converged": result.converged,
        "settings": asdict(result.settings),
    }


def result_from_dict(payload: dict) -> TomographyResult:
    """Inverse of :func:`result_to_dict`, for reports written by ``fockvampire tomo``."""
    matrix = pairs_to_matrix(payload["rho"])
    return TomographyResult(
        MixedState(ModeSet(1, matrix.shape[0] - 1), matrix),
        np.array(payload["loglik_trace"], dtype=np.float64),
        int(payload["iterations_used"]),
        bool(payload["converged"]),
        TomographySettings(**payload["settings"]),
    )
