"""Quick in-process checks of the core physical properties, run by ``fockvampire selftest``."""

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
from collections.abc import Callable
from typing import NamedTuple

import numpy as np

from fockvampire.channels import DetectorModel, unconditional_map
from fockvampire.errors import VampireError
from fockvampire.fock_core import (
    ModeSet,
    PureState,
    apply_annihilation,
    apply_creation,
    embed,
    fidelity,
    fock_state,
    normalize,
    partial_trace,
)
from fockvampire.linear_optics import BeamSplitter, apply_beamsplitter
from fockvampire.scenarios import (
    ShadowMechanism,
    gaussian_profile,
    shadow_demo,
    simulate_bob_mean_photons,
)

logger = logging.getLogger(__name__)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


Check = Callable[[], tuple[bool, str]]
_CHECKS: list[tuple[str, Check]] = []


def _check(name: str) -> Callable[[Check], Check]:
    def register(fn: Check) -> Check:
        _CHECKS.append((name, fn))
        return fn

    return register


@_check("annihilation on one output equals mu* times the split annihilated state")
def _split_annihilation() -> tuple[bool, str]:
    rng = np.random.default_rng(0)
    modes = ModeSet(1, 5)
    worst = 0.0
    for _ in range(10):
        amps = rng.normal(size=6) + 1j * rng.normal(size=6)
        psi, _ = normalize(PureState(modes, amps))
        theta, phi = rng.uniform(0, np.pi / 2), rng.uniform(0, 2 * np.pi)
        bs = BeamSplitter(np.cos(theta), np.exp(1j * phi) * np.sin(theta))
        split = apply_beamsplitter(embed(psi, 1), 0, 1, bs)
        lhs = apply_annihilation(split, 0).vector  # type: ignore[arg-type]
        rhs = apply_beamsplitter(embed(apply_annihilation(psi, 0), 1), 0, 1, bs).vector  # type: ignore[union-attr, arg-type]
        worst = max(worst, float(np.linalg.norm(lhs - np.conj(bs.mu) * rhs)))
    return worst < 1e-12, f"max deviation {worst:.2e}"


@_check("Hong-Ou-Mandel: |1,1> on a 50:50 splitter never gives a coincidence")
def _hong_ou_mandel() -> tuple[bool, str]:
    out = apply_beamsplitter(fock_state(ModeSet(2, 2), (1, 1)), 0, 1, BeamSplitter.balanced())
    coincidence = float(abs(out.amplitudes[1, 1]) ** 2)  # type: ignore[union-attr]
    return coincidence < 1e-14, f"coincidence probability {coincidence:.2e}"


@_check("second arm holds N|lam|^2 photons before and (N-1)|lam|^2 after subtraction")
def _bob_mean_photons() -> tuple[bool, str]:
    before = simulate_bob_mean_photons(2, 0.5, False)
    after = simulate_bob_mean_photons(2, 0.5, True)
    ok = abs(before - 1.0) < 1e-12 and abs(after - 0.5) < 1e-12
    return ok, f"<n> before {before:.12f}, after {after:.12f}"


@_check("annihilating a cloud mode leaves no shadow")
def _no_shadow() -> tuple[bool, str]:
    report = shadow_demo(3, gaussian_profile(3), [0], ShadowMechanism.EXACT_ANNIHILATION, 2)
    ok = report.contrast < 1e-12 and abs(report.total_output - 1.0) < 1e-12
    return ok, f"contrast {report.contrast:.2e}, photons left {report.total_output:.12f}"


@_check("absorbing a cloud mode casts a shadow")
def _shadow() -> tuple[bool, str]:
    report = shadow_demo(3, gaussian_profile(3), [0], ShadowMechanism.ATTENUATION, 2, gamma=0.5)
    return report.covered_ratio < report.uncovered_ratio, f"contrast {report.contrast:.3f}"


@_check("the subtraction apparatus without postselection preserves the trace")
def _no_signaling() -> tuple[bool, str]:
    state = fock_state(ModeSet(2, 2), (1, 1))
    out = unconditional_map(state, 0, 0.06, DetectorModel(efficiency=0.3, dark_prob=0.0025))
    return abs(out.trace - 1.0) < 1e-12, f"trace {out.trace:.15f}"


@_check("creation on one output does not raise the photon number of the whole mode")
def _creation_counterexample() -> tuple[bool, str]:
    bs = BeamSplitter.balanced()
    split = apply_beamsplitter(fock_state(ModeSet(2, 2), (1, 0)), 0, 1, bs)
    raised = apply_beamsplitter(apply_creation(split, 0), 0, 1, bs.inverse())  # type: ignore[arg-type]
    reduced, _ = normalize(partial_trace(raised, [0]))
    value = fidelity(reduced, fock_state(ModeSet(1, 2), (2,)))
    return abs(value - 2 / 3) < 1e-12, f"fidelity with |2> is {value:.12f}"


def run_selftest() -> list[CheckResult]:
    results = []
    for name, fn in _CHECKS:
        try:
            passed, detail = fn()
        except VampireError as err:
            passed, detail = False, f"{type(err).__name__}: {err}"
        logger.debug(f"Selftest '{name}': {'ok' if passed else 'FAILED'} ({detail}).")
        results.append(CheckResult(name, passed, detail))
    return results
