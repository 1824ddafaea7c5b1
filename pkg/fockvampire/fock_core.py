"""
Truncated multimode Fock space: states and elementary bosonic operator algebra.

Pure states are stored as dense amplitude tensors with one axis per mode, mixed states as dense
matrices on the C-ordered flattening of that tensor. All values are immutable; every function
returns a new state.
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
import string
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from ordered_set import OrderedSet
from scipy.special import gammaln
from scipy.stats import entropy

from fockvampire.errors import (
    ArgumentError,
    CutoffViolationError,
    TruncationRiskError,
    TruncationWarning,
    UndefinedExpectationError,
    ZeroNormError,
)
from fockvampire.util import (
    HERMITICITY_TOL,
    ComplexArray,
    Occupation,
    RealArray,
    frozen_array,
    psd_sqrt,
)

logger = logging.getLogger(__name__)

LEAKAGE_WARN_LEVEL = 1e-6


@dataclass(frozen=True)
class ModeSet:
    """
    Labels a set of bosonic modes, each truncated at the same maximum photon number.

    :param mode_count:  Number of modes.
    :param cutoff:      Maximum photon number per mode (inclusive).
    """

    mode_count: int
    cutoff: int

    def __post_init__(self):
        if self.mode_count < 1:
            raise ArgumentError("must be at least 1", field="mode_count")
        if self.cutoff < 1:
            raise ArgumentError("must be at least 1", field="cutoff")

    @property
    def levels(self) -> int:
        return self.cutoff + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.levels,) * self.mode_count

    @property
    def dim(self) -> int:
        return self.levels**self.mode_count

    def extended(self, extra: int) -> ModeSet:
        return ModeSet(self.mode_count + extra, self.cutoff)

    def check_mode(self, mode: int) -> int:
        if not 0 <= mode < self.mode_count:
            raise ArgumentError(
                f"mode {mode} out of range [0, {self.mode_count - 1}]", field="mode"
            )
        return int(mode)


@dataclass(frozen=True, eq=False)
class PureState:
    """
    A (possibly sub-normalized) vector in the truncated Fock space.

    ``norm_weight`` defaults to the squared norm of the amplitudes. States returned by
    :func:`normalize` have unit norm and keep the pre-normalization squared norm (the
    conditioning probability) in ``norm_weight``. ``leakage`` is the squared norm dropped at the
    cutoff by the operation that produced the state.
    """

    modes: ModeSet
    amplitudes: ComplexArray
    norm_weight: float = field(default=None)  # type: ignore[assignment]
    leakage: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.size != self.modes.dim:
            raise ArgumentError(
                f"expected {self.modes.dim} amplitudes, got {amps.size}",
                field="amplitudes",
            )
        amps = frozen_array(amps.reshape(self.modes.shape))
        if not np.all(np.isfinite(amps)):
            raise ArgumentError("amplitudes must be finite", field="amplitudes")
        object.__setattr__(self, "amplitudes", amps)
        if self.norm_weight is None:
            object.__setattr__(self, "norm_weight", self.squared_norm)

    @property
    def vector(self) -> ComplexArray:
        return self.amplitudes.reshape(-1)

    @property
    def squared_norm(self) -> float:
        return float(np.vdot(self.vector, self.vector).real)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.squared_norm))


@dataclass(frozen=True, eq=False)
class MixedState:
    """
    A Hermitian positive semi-definite operator on the truncated Fock space.

    ``trace_weight`` defaults to the trace of ``matrix``; conditioned states returned normalized
    carry the accumulated heralding probability here instead.
    """

    modes: ModeSet
    matrix: ComplexArray
    trace_weight: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128).reshape(
            self.modes.dim, self.modes.dim
        )
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITICITY_TOL:
            raise ArgumentError("density matrix is not Hermitian", field="matrix")
        object.__setattr__(self, "matrix", frozen_array(mat))
        if self.trace_weight is None:
            object.__setattr__(self, "trace_weight", self.trace)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def tensor(self) -> ComplexArray:
        """The matrix with one ket axis and one bra axis per mode."""
        return self.matrix.reshape(self.modes.shape * 2)

    def is_physical(self, tol: float = HERMITICITY_TOL) -> bool:
        eigvals = np.linalg.eigvalsh(self.matrix)
        return bool(eigvals.min(initial=0.0) >= -tol and self.trace <= 1 + tol)


State = Union[PureState, MixedState]


def _mixed_from_tensor(modes: ModeSet, tensor: np.ndarray, **kwargs) -> MixedState:
    mat = tensor.reshape(modes.dim, modes.dim)
    return MixedState(modes, (mat + mat.conj().T) / 2, **kwargs)


def annihilation_matrix(cutoff: int) -> ComplexArray:
    """Single-mode â truncated to photon numbers 0..cutoff (exact, no leakage)."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1).astype(np.complex128)


def vacuum(modes: ModeSet) -> PureState:
    return fock_state(modes, (0,) * modes.mode_count)


def fock_state(modes: ModeSet, occupations: Sequence[int]) -> PureState:
    """Unit basis vector |n_1, ..., n_M>."""
    occ: Occupation = tuple(int(n) for n in occupations)
    if len(occ) != modes.mode_count:
        raise ArgumentError(
            f"expected {modes.mode_count} occupations, got {len(occ)}",
            field="occupations",
        )
    for n in occ:
        if n < 0:
            raise ArgumentError("occupations must be nonnegative", field="occupations")
        if n > modes.cutoff:
            raise CutoffViolationError(
                f"occupation {n} exceeds cutoff {modes.cutoff}", field="occupations"
            )
    amps = np.zeros(modes.shape, dtype=np.complex128)
    amps[occ] = 1.0
    return PureState(modes, amps)


def coherent_state(modes: ModeSet, mode: int, alpha: complex) -> PureState:
    """
    Coherent state |alpha> in one mode (all others vacuum), renormalized on the truncated space.
    The truncated Poisson tail is reported as ``leakage``.
    """
    mode = modes.check_mode(mode)
    alpha = complex(alpha)
    if abs(alpha) ** 2 > modes.cutoff / 4:
        raise TruncationRiskError(
            f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds cutoff/4 = {modes.cutoff / 4:.4g}",
            field="alpha",
        )
    n = np.arange(modes.levels)
    if alpha == 0:
        column = (n == 0).astype(np.complex128)
    else:
        log_mag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) - abs(alpha) ** 2 / 2
        column = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    kept = float(np.sum(np.abs(column) ** 2))
    column = column / np.sqrt(kept)
    index: list[slice | int] = [0] * modes.mode_count
    index[mode] = slice(None)
    amps = np.zeros(modes.shape, dtype=np.complex128)
    amps[tuple(index)] = column
    logger.debug(f"Coherent state alpha={alpha}: truncation leakage {1 - kept:.3e}.")
    return PureState(modes, amps, leakage=max(0.0, 1.0 - kept))


def thermal_state(cutoff: int, mean: float) -> MixedState:
    """Single-mode thermal state with the given mean photon number, renormalized at the cutoff."""
    if mean < 0:
        raise ArgumentError("must be nonnegative", field="mean")
    n = np.arange(cutoff + 1)
    probs = (mean / (1 + mean)) ** n / (1 + mean)
    return MixedState(ModeSet(1, cutoff), np.diag(probs / probs.sum()))


def _act_on_axis(tensor: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, tensor, axes=([1], [axis])), 0, axis)


def apply_operator(state: State, mode: int, op: np.ndarray) -> State:
    """
    Apply a single-mode operator: ``op|psi>`` for pure states, ``op rho op^dagger`` for mixed
    states. The result is not renormalized.
    """
    mode = state.modes.check_mode(mode)
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (state.modes.levels,) * 2:
        raise ArgumentError(f"operator shape {op.shape} does not match the cutoff", field="op")
    if isinstance(state, PureState):
        return PureState(state.modes, _act_on_axis(state.amplitudes, op, mode))
    tensor = _act_on_axis(state.tensor, op, mode)
    tensor = _act_on_axis(tensor, op.conj(), state.modes.mode_count + mode)
    return _mixed_from_tensor(state.modes, tensor)


def apply_kraus(state: State, mode: int, kraus: Iterable[np.ndarray]) -> MixedState:
    """Apply the map rho -> sum_k E_k rho E_k^dagger on a single mode."""
    rho = as_mixed(state)
    total = np.zeros_like(rho.matrix)
    for op in kraus:
        total = total + apply_operator(rho, mode, op).matrix
    return MixedState(rho.modes, (total + total.conj().T) / 2)


def apply_annihilation(state: PureState, mode: int) -> PureState:
    """
    â on the given mode. The squared norm of the result equals <n_mode> of the input;
    the vacuum is mapped to the zero vector.
    """
    return apply_operator(state, mode, annihilation_matrix(state.modes.cutoff))  # type: ignore[return-value]


def apply_creation(state: PureState, mode: int) -> PureState:
    """
    â^dagger on the given mode. Amplitude pushed above the cutoff is dropped and reported as
    ``leakage``; a :class:`TruncationWarning` is issued if it exceeds 1e-6.
    """
    mode = state.modes.check_mode(mode)
    cutoff = state.modes.cutoff
    top = np.take(state.amplitudes, cutoff, axis=mode)
    leakage = float((cutoff + 1) * np.sum(np.abs(top) ** 2))
    raised = _act_on_axis(state.amplitudes, annihilation_matrix(cutoff).T, mode)
    if leakage > LEAKAGE_WARN_LEVEL:
        warnings.warn(
            f"Creation on mode {mode} dropped {leakage:.3e} of squared norm at cutoff {cutoff}.",
            TruncationWarning,
            stacklevel=2,
        )
    return PureState(state.modes, raised, leakage=leakage)


def photon_number_probabilities(state: State, mode: int) -> RealArray:
    """Unnormalized photon-number distribution of one mode."""
    mode = state.modes.check_mode(mode)
    if isinstance(state, PureState):
        populations = np.abs(state.amplitudes) ** 2
    else:
        populations = np.real(np.diag(state.matrix)).reshape(state.modes.shape)
    others = tuple(k for k in range(state.modes.mode_count) if k != mode)
    return np.asarray(np.sum(populations, axis=others), dtype=np.float64)


def mean_photon_number(state: State, mode: int) -> float:
    """<n_mode>, normalized by the state's norm or trace."""
    probs = photon_number_probabilities(state, mode)
    total = probs.sum()
    if not total > 0:
        raise UndefinedExpectationError("expectation value of a zero-norm state")
    return float(np.dot(np.arange(probs.size), probs) / total)


def normalize(state: State) -> tuple[State, float]:
    """
    Rescale to unit norm (pure) or unit trace (mixed).

    :return: The normalized state and the pre-normalization norm (pure) or trace (mixed).
    """
    if isinstance(state, PureState):
        sq = state.squared_norm
        if not sq > 0:
            raise ZeroNormError("cannot normalize the zero vector")
        norm = float(np.sqrt(sq))
        return (
            PureState(state.modes, state.amplitudes / norm, norm_weight=sq, leakage=state.leakage),
            norm,
        )
    trace = state.trace
    if not trace > 0:
        raise ZeroNormError("cannot normalize a zero-trace operator")
    return MixedState(state.modes, state.matrix / trace, trace_weight=trace), trace


def as_mixed(state: State) -> MixedState:
    if isinstance(state, MixedState):
        return state
    vec = state.vector
    return MixedState(state.modes, np.outer(vec, vec.conj()))


def embed(state: State, extra: int = 1) -> State:
    """Append ``extra`` vacuum modes after the existing ones."""
    if extra < 0:
        raise ArgumentError("must be nonnegative", field="extra")
    if extra == 0:
        return state
    modes = state.modes.extended(extra)
    vac = np.zeros(state.modes.levels**extra, dtype=np.complex128)
    vac[0] = 1.0
    if isinstance(state, PureState):
        return PureState(
            modes, np.kron(state.vector, vac), norm_weight=state.norm_weight, leakage=state.leakage
        )
    return MixedState(
        modes, np.kron(state.matrix, np.outer(vac, vac)), trace_weight=state.trace_weight
    )


def partial_trace(state: State, keep: Iterable[int]) -> MixedState:
    """
    Trace out every mode not in ``keep``. The remaining modes appear in the order given by
    ``keep``, so this also permutes modes.
    """
    rho = as_mixed(state)
    kept = OrderedSet(rho.modes.check_mode(k) for k in keep)
    if len(kept) == 0:
        raise ArgumentError("at least one mode must be kept", field="keep")
    count = rho.modes.mode_count
    kets = string.ascii_lowercase[:count]
    bras = [c.upper() if k in kept else c for k, c in enumerate(kets)]
    out = "".join(kets[k] for k in kept) + "".join(bras[k] for k in kept)
    reduced = np.einsum(f"{kets}{''.join(bras)}->{out}", rho.tensor)
    return _mixed_from_tensor(
        ModeSet(len(kept), rho.modes.cutoff), reduced, trace_weight=rho.trace_weight
    )


def _check_comparable(a: MixedState, b: MixedState):
    if a.modes != b.modes:
        raise ArgumentError(f"mode sets differ: {a.modes} vs {b.modes}", field="modes")


def _is_pure(rho: MixedState) -> bool:
    return abs(float(np.vdot(rho.matrix, rho.matrix).real) - 1.0) < HERMITICITY_TOL


def fidelity(a: State, b: State) -> float:
    """
    Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 of two unit-trace states. If either state is
    pure this is the overlap <b|rho_a|b>.
    """
    rho_a, rho_b = as_mixed(a), as_mixed(b)
    _check_comparable(rho_a, rho_b)
    for name, rho in (("a", rho_a), ("b", rho_b)):
        if abs(rho.trace - 1.0) > 1e-8:
            raise ArgumentError(f"trace must be 1, got {rho.trace}", field=name)
    if _is_pure(rho_a) or _is_pure(rho_b):
        value = float(np.vdot(rho_a.matrix, rho_b.matrix).real)
    else:
        root = psd_sqrt(rho_a.matrix)
        inner = root @ rho_b.matrix @ root
        eigvals = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
        value = float(np.sum(np.sqrt(np.clip(eigvals, 0.0, None))) ** 2)
    return float(np.clip(value, 0.0, 1.0))


def trace_distance(a: State, b: State) -> float:
    rho_a, rho_b = as_mixed(a), as_mixed(b)
    _check_comparable(rho_a, rho_b)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho_a.matrix - rho_b.matrix))))


def entanglement_entropy(state: State, keep: Iterable[int]) -> float:
    """Von Neumann entropy in bits of the reduced state on ``keep``."""
    reduced, _ = normalize(partial_trace(state, keep))
    eigvals = np.clip(np.linalg.eigvalsh(reduced.matrix), 0.0, None)  # type: ignore[union-attr]
    return float(entropy(eigvals, base=2))
